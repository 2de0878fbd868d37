"""Slow, obviously-correct reference implementations used only by the tests.

None of these import the code under test beyond constants.
"""

from __future__ import annotations

import math
from collections import Counter
from decimal import Decimal, localcontext

WORD_END = "</w>"
WORD_START = "▁"


def _symbols(word, end_marker=True):
    return list(word) + [WORD_END] if end_marker else [WORD_START] + list(word)


def _merge(symbols, left, right):
    out, i = [], 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == left and symbols[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def _pair_counts(words, n_tables):
    counts = {}
    for symbols, freqs in words:
        for a, b in zip(symbols, symbols[1:]):
            row = counts.setdefault((a, b), [0] * n_tables)
            for t in range(n_tables):
                row[t] += freqs[t]
    return counts


def brute_force_merges(tables, vocab_size, choose, end_marker=True):
    """Recount every pair from scratch at every step.

    ``choose(counts)`` maps ``{pair: per-table counts}`` to the winning pair.
    Stops when the vocabulary (unk + marker + characters + new merge strings)
    reaches ``vocab_size`` or no pair is left.
    """
    pooled = {}
    for t, table in enumerate(tables):
        for w, f in table.items():
            pooled.setdefault(w, [0] * len(tables))[t] += f
    words = [(_symbols(w, end_marker), tuple(f)) for w, f in pooled.items()]
    chars = {c for w in pooled for c in w}
    vocab = {"<unk>", WORD_END if end_marker else WORD_START} | chars
    merges = []
    while len(vocab) < vocab_size:
        counts = _pair_counts(words, len(tables))
        if not counts:
            break
        left, right = choose(counts)
        merges.append((left, right))
        vocab.add(left + right)
        words = [(_merge(s, left, right), f) for s, f in words]
    return merges


def most_frequent(counts):
    return min(counts, key=lambda pair: (-sum(counts[pair]), pair))


def power_mean(a, b, p):
    if p == -math.inf:
        return min(a, b)
    if p <= 0 and (a == 0 or b == 0):
        return 0.0
    if p == 0:
        return math.sqrt(a * b)
    if a == 0 or b == 0:
        return (a + b) * 2 ** (-1 / p)
    # the direct formula in decimal; a**p = 1 + p*ln(a) near p = 0, so the
    # precision has to grow with the number of leading zeros in p
    with localcontext() as ctx:
        ctx.prec = 60 + max(0, -math.floor(math.log10(abs(p))))
        dp = Decimal(p)
        mean = (Decimal(a) ** dp + Decimal(b) ** dp) / 2
        return float(mean ** (1 / dp))


def round_significant(x, digits):
    if x == 0:
        return 0.0
    return round(x, digits - 1 - math.floor(math.log10(abs(x))))


def segmentations(word, vocab):
    """Every way to cut ``word`` into in-vocabulary pieces."""
    if not word:
        yield ()
        return
    for j in range(1, len(word) + 1):
        head = word[:j]
        if head in vocab:
            for rest in segmentations(word[j:], vocab):
                yield (head, *rest)


def best_segmentation(word, log_probs):
    """Exhaustive argmax with the documented tie rules."""
    best = None
    for seg in segmentations(word, log_probs):
        key = (-math.fsum(log_probs[t] for t in seg), len(seg), seg)
        if best is None or key < best[0]:
            best = (key, seg)
    return list(best[1]), -best[0][0]


def marginal_log_likelihood(word, log_probs):
    terms = [math.fsum(log_probs[t] for t in seg) for seg in segmentations(word, log_probs)]
    top = max(terms)
    return top + math.log(sum(math.exp(t - top) for t in terms))


def posterior_counts(word, log_probs):
    """Expected piece counts under the segmentation posterior, by enumeration."""
    segs = list(segmentations(word, log_probs))
    weights = [math.exp(math.fsum(log_probs[t] for t in s)) for s in segs]
    z = sum(weights)
    out = Counter()
    for seg, w in zip(segs, weights):
        for t in seg:
            out[t] += w / z
    return out


def naive_metrics(gold, pred):
    tags = sorted(set(gold))
    f1s = []
    for t in tags:
        tp = sum(1 for g, p in zip(gold, pred) if g == t and p == t)
        fp = sum(1 for g, p in zip(gold, pred) if g != t and p == t)
        fn = sum(1 for g, p in zip(gold, pred) if g == t and p != t)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(2 * prec * rec / (prec + rec) if prec + rec else 0.0)
    acc = sum(1 for g, p in zip(gold, pred) if g == p) / len(gold)
    return acc, sum(f1s) / len(f1s)


def mean_ranks(values):
    ranks = []
    for v in values:
        less = sum(1 for u in values if u < v)
        equal = sum(1 for u in values if u == v)
        ranks.append(less + (equal + 1) / 2)
    return ranks


def pearson(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def spearman_closed_form(x, y):
    n = len(x)
    rx, ry = mean_ranks(x), mean_ranks(y)
    d2 = sum((a - b) ** 2 for a, b in zip(rx, ry))
    return 1 - 6 * d2 / (n * (n * n - 1))

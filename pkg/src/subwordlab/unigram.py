"""Unigram language-model tokenizer: EM over segmentation lattices with likelihood pruning.

Pieces are learned on bare words. The word-boundary marker is attached at
encode time (``▁`` on the first piece by default), so it never competes for
vocabulary slots.
"""

from __future__ import annotations

import logging
import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence

from .core import (
    UNK,
    MarkerStyle,
    Paradigm,
    TokenizerModel,
    Vocabulary,
    char_inventory,
    split_words,
)

logger = logging.getLogger(__name__)

NEG_INF = float("-inf")
UNK_PENALTY = -20.0


class UnigramTrainingError(ValueError):
    pass


@dataclass(frozen=True)
class UnigramTrainerConfig:
    vocab_size: int = 5000
    seed_size_factor: int = 20
    max_seed_token_len: int = 16
    prune_fraction: float = 0.25
    em_subiters: int = 2

    def __post_init__(self):
        if not 0 < self.prune_fraction < 1:
            raise ValueError(f"prune_fraction must be in (0, 1), got {self.prune_fraction}")
        if self.em_subiters < 1:
            raise ValueError("em_subiters must be at least 1")
        if self.max_seed_token_len < 1 or self.seed_size_factor < 1:
            raise ValueError("seed limits must be positive")

    @property
    def piece_budget(self) -> int:
        # the unk token takes one slot of vocab_size
        return self.vocab_size - 1


def logsumexp(values: Sequence[float]) -> float:
    if not values:
        return NEG_INF
    top = max(values)
    if top == NEG_INF:
        return NEG_INF
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


def renormalize(log_probs: Mapping[str, float]) -> dict[str, float]:
    z = logsumexp(list(log_probs.values()))
    return {tok: lp - z for tok, lp in log_probs.items()}


def seed_vocabulary(table: Mapping[str, int], config: UnigramTrainerConfig) -> Counter:
    """All characters plus the most frequent substrings, by word-weighted count.

    Multi-character substrings are capped at ``max_seed_token_len`` characters
    and the whole seed at ``seed_size_factor * vocab_size`` entries (characters
    are always kept, even past the cap).
    """
    if not table:
        raise ValueError("cannot seed a vocabulary from an empty table")
    chars: Counter = Counter()
    subs: Counter = Counter()
    for word, freq in table.items():
        n = len(word)
        for i in range(n):
            chars[word[i]] += freq
            for j in range(i + 2, min(n, i + config.max_seed_token_len) + 1):
                subs[word[i:j]] += freq
    subs.pop(UNK, None)
    cap = config.seed_size_factor * config.vocab_size - len(chars)
    ranked = sorted(subs.items(), key=lambda kv: (-kv[1], kv[0]))
    seed = Counter(chars)
    for tok, count in ranked[:max(cap, 0)]:
        seed[tok] = count
    return seed


def initial_log_probs(seed: Mapping[str, int]) -> dict[str, float]:
    total = math.fsum(seed.values())
    return {tok: math.log(count / total) for tok, count in seed.items()}


def _max_len(log_probs: Mapping[str, float]) -> int:
    return max((len(t) for t in log_probs), default=1)


def lattice(word: str, log_probs: Mapping[str, float], max_len: int | None = None):
    """Edges ``(start, end, token, log_prob)`` of every in-vocabulary piece of ``word``."""
    if max_len is None:
        max_len = _max_len(log_probs)
    n = len(word)
    edges = []
    for i in range(n):
        for j in range(i + 1, min(n, i + max_len) + 1):
            piece = word[i:j]
            lp = log_probs.get(piece)
            if lp is not None and lp != NEG_INF:
                edges.append((i, j, piece, lp))
    return edges


def forward_backward(word: str, log_probs: Mapping[str, float], max_len: int | None = None):
    """Return ``(log Z, {token: expected count})`` for a single occurrence of ``word``."""
    n = len(word)
    edges = lattice(word, log_probs, max_len)
    incoming = defaultdict(list)
    outgoing = defaultdict(list)
    for e in edges:
        incoming[e[1]].append(e)
        outgoing[e[0]].append(e)
    alpha = [NEG_INF] * (n + 1)
    alpha[0] = 0.0
    for j in range(1, n + 1):
        alpha[j] = logsumexp([alpha[i] + lp for i, _, _, lp in incoming[j]])
    beta = [NEG_INF] * (n + 1)
    beta[n] = 0.0
    for i in range(n - 1, -1, -1):
        beta[i] = logsumexp([lp + beta[j] for _, j, _, lp in outgoing[i]])
    log_z = alpha[n]
    expected: dict[str, float] = defaultdict(float)
    if log_z == NEG_INF:
        return log_z, dict(expected)
    for i, j, piece, lp in edges:
        post = alpha[i] + lp + beta[j] - log_z
        if post != NEG_INF:
            expected[piece] += math.exp(post)
    return log_z, dict(expected)


def em_step(table: Mapping[str, int], log_probs: Mapping[str, float]):
    """One EM iteration.

    Returns the re-estimated log-probabilities and the corpus log-likelihood
    under the *input* probabilities.
    """
    max_len = _max_len(log_probs)
    counts: dict[str, float] = {tok: 0.0 for tok in log_probs}
    likelihood_terms = []
    for word in sorted(table):
        freq = table[word]
        log_z, expected = forward_backward(word, log_probs, max_len)
        if log_z == NEG_INF:
            raise UnigramTrainingError(f"word {word!r} cannot be segmented with the current vocabulary")
        likelihood_terms.append(freq * log_z)
        for tok, c in expected.items():
            counts[tok] += freq * c
    # log(c) - log(total) rather than log(c / total): tiny counts would underflow the ratio
    log_total = math.log(math.fsum(counts.values()))
    new = {
        tok: (math.log(c) - log_total if c > 0 else NEG_INF)
        for tok, c in counts.items()
    }
    return new, math.fsum(likelihood_terms)


def _better(a, b) -> bool:
    # (score, n_tokens, tokens): higher score, then fewer tokens, then smaller sequence
    if a[0] != b[0]:
        return a[0] > b[0]
    if a[1] != b[1]:
        return a[1] < b[1]
    return a[2] < b[2]


def viterbi_segment(
    word: str,
    log_probs: Mapping[str, float],
    *,
    max_len: int | None = None,
    exclude: str | None = None,
    unk_token: str | None = None,
    unk_penalty: float = UNK_PENALTY,
) -> tuple[list[str], float]:
    """Best segmentation of ``word`` and its log-probability.

    Characters missing from ``log_probs`` become ``unk_token`` scored at
    ``unk_penalty``; without an unk token such words score ``-inf``.
    """
    if max_len is None:
        max_len = _max_len(log_probs)
    n = len(word)
    # entries are (score, n_tokens, tokens, token log-probs); the score is an
    # fsum so segmentations using the same pieces in another order tie exactly
    best: list = [None] * (n + 1)
    best[0] = (0.0, 0, (), ())
    for j in range(1, n + 1):
        cand = None
        for i in range(max(0, j - max_len), j):
            prev = best[i]
            if prev is None:
                continue
            piece = word[i:j]
            lp = log_probs.get(piece) if piece != exclude else None
            tok = piece
            if lp is None or lp == NEG_INF:
                if unk_token is None or j != i + 1:
                    continue
                lp, tok = unk_penalty, unk_token
            lps = prev[3] + (lp,)
            entry = (math.fsum(lps), prev[1] + 1, prev[2] + (tok,), lps)
            if cand is None or _better(entry, cand):
                cand = entry
        best[j] = cand
    if best[n] is None:
        return [], NEG_INF
    return list(best[n][2]), best[n][0]


def prune_round(table: Mapping[str, int], log_probs: Mapping[str, float], config: UnigramTrainerConfig) -> dict[str, float]:
    """Drop the multi-character pieces whose removal costs the least likelihood.

    The cost of a piece is the drop in summed Viterbi score over the words
    whose best path uses it. The piece count shrinks to
    ``max(piece_budget, floor(size * (1 - prune_fraction)))``.
    """
    size = len(log_probs)
    budget = config.piece_budget
    if size <= budget:
        return dict(log_probs)
    target = max(budget, math.floor(size * (1 - config.prune_fraction)))
    max_len = _max_len(log_probs)
    loss: dict[str, float] = defaultdict(float)
    for word in sorted(table):
        freq = table[word]
        pieces, score = viterbi_segment(word, log_probs, max_len=max_len)
        for piece in sorted(set(pieces)):
            if len(piece) < 2:
                continue
            _, alt = viterbi_segment(word, log_probs, max_len=max_len, exclude=piece)
            loss[piece] += freq * (score - alt)
    removable = sorted(
        (tok for tok in log_probs if len(tok) > 1),
        key=lambda tok: (loss.get(tok, 0.0), log_probs[tok], tok),
    )
    n_remove = min(size - target, len(removable))
    dropped = set(removable[:n_remove])
    kept = {tok: lp for tok, lp in log_probs.items() if tok not in dropped}
    return renormalize(kept)


CHAR_FLOOR_LOGPROB = -100.0


def revive_characters(log_probs: Mapping[str, float]) -> dict[str, float]:
    """Give characters that EM squeezed to zero a tiny but usable log-prob.

    Repeated EM steps can underflow a character while longer pieces still
    cover it; the word then becomes unsegmentable once those pieces are
    pruned. Revived characters get ``min(weakest live piece - 1, -100)``,
    low enough that renormalizing moves the corpus likelihood by far less
    than 1e-9. Returns the input unchanged when every character is alive.
    """
    dead = [t for t, lp in log_probs.items() if len(t) == 1 and lp == NEG_INF]
    if not dead:
        return dict(log_probs)
    weakest = min(lp for lp in log_probs.values() if lp != NEG_INF)
    floor = min(weakest - 1.0, CHAR_FLOOR_LOGPROB)
    out = dict(log_probs)
    for tok in dead:
        out[tok] = floor
    return renormalize(out)


def _drop_dead(log_probs: Mapping[str, float]) -> dict[str, float]:
    return {t: lp for t, lp in log_probs.items() if lp != NEG_INF}


def train_unigram(
    table: Mapping[str, int],
    config: UnigramTrainerConfig,
    marker_style: MarkerStyle = MarkerStyle.WORD_INITIAL_UNDERSCORE,
    unk_token: str = UNK,
    history: list[float] | None = None,
) -> TokenizerModel:
    """Seed, then alternate EM and pruning until the piece budget is met.

    ``history`` (if given) receives the corpus log-likelihood reported by
    every EM step, in order.
    """
    chars = char_inventory(table)
    if config.piece_budget < len(chars):
        raise ValueError(
            f"vocab_size {config.vocab_size} cannot hold {len(chars)} characters plus the unk token"
        )
    log_probs = initial_log_probs(seed_vocabulary(table, config))
    rounds = 0
    while True:
        for _ in range(config.em_subiters):
            log_probs, ll = em_step(table, log_probs)
            log_probs = revive_characters(log_probs)
            if history is not None:
                history.append(ll)
        if len(log_probs) <= config.piece_budget:
            break
        log_probs = prune_round(table, log_probs, config)
        rounds += 1
        logger.debug("prune round %d: %d pieces", rounds, len(log_probs))
    for _ in range(config.em_subiters):
        log_probs, ll = em_step(table, log_probs)
        log_probs = revive_characters(log_probs)
        if history is not None:
            history.append(ll)
    log_probs = _drop_dead(log_probs)
    pieces = sorted(log_probs, key=lambda t: (-log_probs[t], t))
    return TokenizerModel(
        paradigm=Paradigm.UNIGRAM,
        vocabulary=Vocabulary((unk_token, *pieces)),
        marker_style=marker_style,
        log_probs=log_probs,
        unk_token=unk_token,
    )


def corpus_log_likelihood(table: Mapping[str, int], log_probs: Mapping[str, float]) -> float:
    max_len = _max_len(log_probs)
    terms = []
    for word in sorted(table):
        log_z, _ = forward_backward(word, log_probs, max_len)
        terms.append(table[word] * log_z)
    return math.fsum(terms)


def _mark(pieces: list[str], marker_style: MarkerStyle) -> list[str]:
    if not pieces:
        return pieces
    if marker_style is MarkerStyle.WORD_INITIAL_UNDERSCORE:
        pieces[0] = marker_style.symbol + pieces[0]
    else:
        pieces[-1] = pieces[-1] + marker_style.symbol
    return pieces


def _require_unigram(model: TokenizerModel) -> None:
    if model.paradigm is not Paradigm.UNIGRAM:
        raise ValueError(f"expected a UNIGRAM model, got {model.paradigm.value}")


def encode_viterbi(model: TokenizerModel, text: str, unk_penalty: float = UNK_PENALTY) -> list[str]:
    _require_unigram(model)
    cache = model.cache.setdefault(("viterbi", unk_penalty), {})
    max_len = model.cache.setdefault("max_len", _max_len(model.log_probs))
    out: list[str] = []
    for word in split_words(text):
        pieces = cache.get(word)
        if pieces is None:
            pieces, _ = viterbi_segment(
                word, model.log_probs, max_len=max_len,
                unk_token=model.unk_token, unk_penalty=unk_penalty,
            )
            pieces = tuple(_mark(pieces, model.marker_style))
            cache[word] = pieces
        out.extend(pieces)
    return out


def sample_segment(
    word: str,
    log_probs: Mapping[str, float],
    temperature: float,
    rng: random.Random,
    *,
    unk_token: str = UNK,
    unk_penalty: float = UNK_PENALTY,
) -> list[str]:
    """Forward-filter, backward-sample one segmentation with weight ``P(seg) ** (1/temperature)``."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    n = len(word)
    incoming = defaultdict(list)
    for i, j, piece, lp in lattice(word, log_probs):
        incoming[j].append((i, piece, lp / temperature))
    for i, ch in enumerate(word):
        lp = log_probs.get(ch)
        if lp is None or lp == NEG_INF:
            incoming[i + 1].append((i, unk_token, unk_penalty / temperature))
    alpha = [NEG_INF] * (n + 1)
    alpha[0] = 0.0
    for j in range(1, n + 1):
        alpha[j] = logsumexp([alpha[i] + w for i, _, w in incoming[j]])
    pieces = []
    j = n
    while j > 0:
        options = [(i, piece, alpha[i] + w - alpha[j]) for i, piece, w in incoming[j] if alpha[i] != NEG_INF]
        u = rng.random()
        acc = 0.0
        chosen = options[-1]
        for opt in options:
            acc += math.exp(opt[2])
            if u < acc:
                chosen = opt
                break
        pieces.append(chosen[1])
        j = chosen[0]
    pieces.reverse()
    return pieces


def encode_sampled(model: TokenizerModel, text: str, temperature: float = 1.0, seed: int = 0) -> list[str]:
    _require_unigram(model)
    rng = random.Random(seed)
    out: list[str] = []
    for word in split_words(text):
        pieces = sample_segment(word, model.log_probs, temperature, rng, unk_token=model.unk_token)
        out.extend(_mark(pieces, model.marker_style))
    return out

"""Frequency-greedy byte-pair encoding over whitespace-separated words."""

from __future__ import annotations

import bisect
import heapq
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .core import (
    UNK,
    WORD_END,
    WORD_START,
    MarkerStyle,
    Paradigm,
    TokenizerModel,
    Vocabulary,
    char_inventory,
    split_words,
)

logger = logging.getLogger(__name__)

Pair = tuple[str, str]
# maps per-table pair counts to a sort key; smaller keys win
Priority = Callable[[tuple[int, ...]], tuple]


@dataclass(frozen=True)
class MergeCandidate:
    left: str
    right: str
    frequency: int


def symbolize(word: str, marker_style: MarkerStyle) -> list[str]:
    if marker_style is MarkerStyle.END_OF_WORD_SUFFIX:
        return [*word, WORD_END]
    return [WORD_START, *word]


def merge_symbols(symbols: Sequence[str], pair: Pair) -> list[str]:
    """Merge every non-overlapping occurrence of ``pair``, scanning left to right."""
    left, right = pair
    out = []
    i = 0
    n = len(symbols)
    while i < n:
        if i + 1 < n and symbols[i] == left and symbols[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def count_pairs(table: Mapping[str, int], marker_style=MarkerStyle.END_OF_WORD_SUFFIX) -> list[MergeCandidate]:
    """Weighted adjacent-pair counts of a freshly symbolized table."""
    counts: Counter = Counter()
    for word, freq in table.items():
        symbols = symbolize(word, marker_style)
        for pair in zip(symbols, symbols[1:]):
            counts[pair] += freq
    return [MergeCandidate(l, r, f) for (l, r), f in sorted(counts.items())]


def base_vocabulary(tables: Sequence[Mapping[str, int]], marker_style: MarkerStyle, unk_token: str = UNK) -> list[str]:
    reserved = [unk_token, marker_style.symbol]
    chars = set()
    for table in tables:
        chars |= char_inventory(table)
    return reserved + sorted(chars - set(reserved))


class MergeTrainer:
    """Incremental pair statistics over one or more word tables.

    Each distinct word keeps one count per table, so a merge chosen from the
    pooled statistics re-symbolizes every table at once. Only words that
    contain the merged pair are recounted after each step.
    """

    def __init__(self, tables: Sequence[Mapping[str, int]], marker_style: MarkerStyle, priority: Priority):
        self.n_tables = len(tables)
        self.marker_style = marker_style
        self.priority = priority
        per_word: dict[str, list[int]] = {}
        for t, table in enumerate(tables):
            for word, freq in table.items():
                if freq <= 0:
                    continue
                per_word.setdefault(word, [0] * self.n_tables)[t] += freq
        self.words = [symbolize(w, marker_style) for w in sorted(per_word)]
        self.freqs = [tuple(per_word[w]) for w in sorted(per_word)]
        self.pair_counts: dict[Pair, list[int]] = defaultdict(lambda: [0] * self.n_tables)
        self.where: dict[Pair, set[int]] = defaultdict(set)
        for idx, symbols in enumerate(self.words):
            self._add(idx, symbols, +1)
        self.heap: list = []
        for pair in self.pair_counts:
            self._push(pair)

    def _add(self, idx: int, symbols: Sequence[str], sign: int) -> set[Pair]:
        freq = self.freqs[idx]
        touched = set()
        for pair in zip(symbols, symbols[1:]):
            counts = self.pair_counts[pair]
            for t in range(self.n_tables):
                counts[t] += sign * freq[t]
            touched.add(pair)
            if sign > 0:
                self.where[pair].add(idx)
        return touched

    def _push(self, pair: Pair) -> None:
        counts = tuple(self.pair_counts[pair])
        if sum(counts) > 0:
            heapq.heappush(self.heap, (*self.priority(counts), pair[0], pair[1], counts))

    def best(self) -> tuple[Pair, tuple[int, ...]] | None:
        while self.heap:
            entry = self.heap[0]
            pair = (entry[-3], entry[-2])
            counts = entry[-1]
            current = self.pair_counts.get(pair)
            if current is None or tuple(current) != counts or sum(counts) == 0:
                heapq.heappop(self.heap)
                continue
            return pair, counts
        return None

    def apply(self, pair: Pair) -> None:
        touched: set[Pair] = set()
        for idx in sorted(self.where.pop(pair, ())):
            old = self.words[idx]
            new = merge_symbols(old, pair)
            if len(new) == len(old):
                continue
            touched |= self._add(idx, old, -1)
            for p in set(zip(old, old[1:])) - set(zip(new, new[1:])):
                self.where[p].discard(idx)
            touched |= self._add(idx, new, +1)
            self.words[idx] = new
        for p in touched:
            if sum(self.pair_counts[p]) == 0:
                del self.pair_counts[p]
                self.where.pop(p, None)
            else:
                self._push(p)
        self.pair_counts.pop(pair, None)

    def train(self, base: list[str], vocab_size: int) -> tuple[list[str], list[Pair]]:
        vocab = list(base)
        seen = set(vocab)
        merges: list[Pair] = []
        while len(vocab) < vocab_size:
            found = self.best()
            if found is None:
                logger.info("no pairs left after %d merges", len(merges))
                break
            pair, _ = found
            self.apply(pair)
            merges.append(pair)
            merged = pair[0] + pair[1]
            if merged not in seen:
                seen.add(merged)
                vocab.append(merged)
        return vocab, merges


def _frequency_priority(counts: tuple[int, ...]) -> tuple:
    return (-sum(counts),)


def train_bpe(
    table: Mapping[str, int],
    vocab_size: int,
    marker_style: MarkerStyle = MarkerStyle.END_OF_WORD_SUFFIX,
    unk_token: str = UNK,
) -> TokenizerModel:
    """Learn merges until the vocabulary holds ``vocab_size`` entries.

    The vocabulary starts as ``[unk, marker, *sorted characters]``. Each step
    merges the most frequent adjacent pair; equal counts go to the
    lexicographically smallest ``(left, right)``.
    """
    base = base_vocabulary([table], marker_style, unk_token)
    if vocab_size < len(base):
        raise ValueError(
            f"vocab_size {vocab_size} is below the {len(base)} characters and reserved tokens"
        )
    trainer = MergeTrainer([table], marker_style, _frequency_priority)
    vocab, merges = trainer.train(base, vocab_size)
    return TokenizerModel(
        paradigm=Paradigm.BPE,
        vocabulary=Vocabulary(tuple(vocab)),
        marker_style=marker_style,
        merges=tuple(merges),
        unk_token=unk_token,
    )


def _merge_ranks(model: TokenizerModel) -> dict[Pair, list[int]]:
    cache = model.cache
    ranks = cache.get("ranks")
    if ranks is None:
        ranks = defaultdict(list)
        for rank, pair in enumerate(model.merges):
            ranks[pair].append(rank)
        ranks = dict(ranks)
        cache["ranks"] = ranks
    return ranks


def segment_word(model: TokenizerModel, word: str) -> list[str]:
    """Replay the merge list, in training order, on one word."""
    cache = model.cache.setdefault("words", {})
    hit = cache.get(word)
    if hit is not None:
        return list(hit)
    ranks = _merge_ranks(model)
    vocab = model.vocabulary
    symbols = [s if s in vocab else model.unk_token for s in symbolize(word, model.marker_style)]
    last = -1
    while len(symbols) > 1:
        best_rank = None
        best_pair = None
        for pair in zip(symbols, symbols[1:]):
            pair_ranks = ranks.get(pair)
            if pair_ranks is None:
                continue
            k = bisect.bisect_right(pair_ranks, last)
            if k < len(pair_ranks) and (best_rank is None or pair_ranks[k] < best_rank):
                best_rank = pair_ranks[k]
                best_pair = pair
        if best_pair is None:
            break
        symbols = merge_symbols(symbols, best_pair)
        last = best_rank
    cache[word] = tuple(symbols)
    return symbols


def encode_bpe(model: TokenizerModel, text: str) -> list[str]:
    if model.paradigm not in (Paradigm.BPE, Paradigm.OBPE):
        raise ValueError(f"encode_bpe needs a BPE or OBPE model, got {model.paradigm.value}")
    out: list[str] = []
    for word in split_words(text):
        out.extend(segment_word(model, word))
    return out

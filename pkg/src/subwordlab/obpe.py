"""Overlap-BPE: merge selection that trades raw frequency for cross-lingual sharing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .bpe import MergeTrainer, base_vocabulary
from .core import UNK, MarkerStyle, Paradigm, TokenizerModel, Vocabulary

NEG_INFINITY = float("-inf")
SCORE_DIGITS = 12


@dataclass(frozen=True)
class BilingualTables:
    """Word tables for the high-resource source and the low-resource target."""

    high: Mapping[str, int]
    low: Mapping[str, int]

    def __post_init__(self):
        if not self.high or not self.low:
            raise ValueError("both word tables must be non-empty")


@dataclass(frozen=True)
class ObpeConfig:
    alpha: float = 0.5
    p: float = NEG_INFINITY
    vocab_size: int = 5000

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if math.isnan(self.p) or self.p > 1:
            raise ValueError(f"p must be <= 1 or -inf, got {self.p}")


def parse_exponent(text: str) -> float:
    """Read ``-inf`` or a decimal <= 1."""
    value = float(text)
    if math.isnan(value) or value > 1 or value == float("inf"):
        raise ValueError(f"exponent must be <= 1 or -inf, got {text!r}")
    return value


def generalized_mean(f_i: float, f_h: float, p: float) -> float:
    """Power mean of two non-negative frequencies.

    ``p == 0`` gives the geometric mean and ``p == -inf`` the minimum. For
    ``p <= 0`` a zero frequency makes the mean zero.
    """
    if f_i < 0 or f_h < 0:
        raise ValueError("frequencies must be non-negative")
    if p == NEG_INFINITY:
        return float(min(f_i, f_h))
    if f_i == 0 and f_h == 0 or p <= 0 and (f_i == 0 or f_h == 0):
        return 0.0
    if f_i == f_h:
        return float(f_i)
    if p == 1:
        return (f_i + f_h) / 2.0
    if p == 0:
        return math.sqrt(f_i * f_h)
    if f_i == 0 or f_h == 0:
        # only reachable for p > 0: ((f**p) / 2) ** (1/p)
        return math.exp(math.log(f_i or f_h) - math.log(2.0) / p)
    # log M = mid + log(cosh(p * half)) / p, which avoids overflow at large
    # counts and cancellation as p approaches 0
    mid = (math.log(f_i) + math.log(f_h)) / 2.0
    x = abs(p * (math.log(f_i) - math.log(f_h)) / 2.0)
    if x < 20.0:
        log_cosh = math.log1p(2.0 * math.sinh(x / 2.0) ** 2)
    else:
        log_cosh = x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)
    return math.exp(mid + log_cosh / p)


def pair_score(f_i: float, f_h: float, config: ObpeConfig) -> float:
    """``alpha * (f_i + f_h) + (1 - alpha) * 2 * M_p(f_i, f_h)``, both terms in raw counts."""
    compression = f_i + f_h
    if config.alpha == 1.0:
        return float(compression)
    return config.alpha * compression + (1.0 - config.alpha) * 2.0 * generalized_mean(f_i, f_h, config.p)


def selection_score(f_i: float, f_h: float, config: ObpeConfig) -> float:
    """``pair_score`` rounded to ``SCORE_DIGITS`` significant digits.

    Finite ``p`` goes through exp/log, whose last bits vary by platform and
    can split mathematically equal scores; rounding turns those into ties.
    """
    return float(f"{pair_score(f_i, f_h, config):.{SCORE_DIGITS}g}")


def train_obpe(
    tables: BilingualTables,
    config: ObpeConfig,
    marker_style: MarkerStyle = MarkerStyle.END_OF_WORD_SUFFIX,
    unk_token: str = UNK,
) -> TokenizerModel:
    """BPE loop over the pooled pair statistics of both languages, scored by ``pair_score``.

    Ties go to the higher total frequency, then the smaller ``(left, right)``.
    """
    sources = [tables.low, tables.high]
    base = base_vocabulary(sources, marker_style, unk_token)
    if config.vocab_size < len(base):
        raise ValueError(
            f"vocab_size {config.vocab_size} is below the {len(base)} characters and reserved tokens"
        )

    def priority(counts):
        f_i, f_h = counts
        return (-selection_score(f_i, f_h, config), -(f_i + f_h))

    trainer = MergeTrainer(sources, marker_style, priority)
    vocab, merges = trainer.train(base, config.vocab_size)
    return TokenizerModel(
        paradigm=Paradigm.OBPE,
        vocabulary=Vocabulary(tuple(vocab)),
        marker_style=marker_style,
        merges=tuple(merges),
        unk_token=unk_token,
    )

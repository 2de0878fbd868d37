"""Tagging metrics, corpus statistics and rank-correlation analysis."""

from __future__ import annotations

import enum
import math
import statistics
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .align import PAD


class UndefinedCorrelation(ValueError):
    pass


@dataclass(frozen=True)
class TagScore:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricReport:
    accuracy: float
    macro_f1: float
    per_tag: dict[str, TagScore]
    labels: tuple[str, ...]
    confusion: dict[str, dict[str, int]]

    @property
    def total(self) -> int:
        return sum(sum(row.values()) for row in self.confusion.values())


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def compute_metrics(gold: Sequence[str], predicted: Sequence[str]) -> MetricReport:
    """Accuracy, macro-F1 over tags present in ``gold``, per-tag scores and confusion counts."""
    if len(gold) != len(predicted):
        raise ValueError(f"length mismatch: {len(gold)} gold vs {len(predicted)} predicted")
    if not gold:
        raise ValueError("no tokens to evaluate")
    if PAD in gold or PAD in predicted:
        raise ValueError("PAD must be removed before scoring")
    pairs = Counter(zip(gold, predicted))
    labels = tuple(sorted(set(gold) | set(predicted)))
    confusion = {g: {p: pairs.get((g, p), 0) for p in labels} for g in labels}
    gold_counts = Counter(gold)
    pred_counts = Counter(predicted)
    per_tag = {}
    for tag in labels:
        tp = pairs.get((tag, tag), 0)
        precision = _ratio(tp, pred_counts[tag])
        recall = _ratio(tp, gold_counts[tag])
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_tag[tag] = TagScore(precision, recall, f1, gold_counts[tag])
    correct = sum(pairs.get((t, t), 0) for t in labels)
    supported = [per_tag[t].f1 for t in labels if gold_counts[t] > 0]
    return MetricReport(
        accuracy=correct / len(gold),
        macro_f1=math.fsum(supported) / len(supported),
        per_tag=per_tag,
        labels=labels,
        confusion=confusion,
    )


def pos_entropy(label_counts: Mapping[str, int]) -> float:
    """Shannon entropy, in bits, of a tag distribution."""
    total = sum(label_counts.values())
    if not label_counts or total < 1:
        raise ValueError("need at least one counted tag")
    h = 0.0
    for count in label_counts.values():
        if count > 0:
            p = count / total
            h -= p * math.log2(p)
    return h


def fertility(model, sentences) -> float:
    """Mean number of subwords per gold token, encoding each FORM on its own."""
    n_tokens = 0
    n_subwords = 0
    for sent in sentences:
        for form in sent.forms:
            n_tokens += 1
            n_subwords += len(model.encode(form))
    return n_subwords / n_tokens if n_tokens else 0.0


def fractional_ranks(values: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the mean of the ranks they span."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of fractional ranks (valid with ties)."""
    if len(x) != len(y):
        raise ValueError("x and y differ in length")
    if len(x) < 2:
        raise UndefinedCorrelation("need at least two observations")
    rx, ry = fractional_ranks(x), fractional_ranks(y)
    if len(set(rx)) < 2 or len(set(ry)) < 2:
        raise UndefinedCorrelation("a variable has zero rank variance")
    return statistics.correlation(rx, ry)


class ResourceTier(enum.IntEnum):
    UNDER = 0
    LOW = 1
    MID = 2
    HIGH = 3


class Script(enum.IntEnum):
    CYRILLIC = 0
    LATIN = 1


@dataclass(frozen=True)
class LanguageProfile:
    code: str
    train_sentences: int
    resource_tier: ResourceTier
    uralic_related: bool
    script: Script


@dataclass(frozen=True)
class GainRecord:
    code: str
    delta_acc: float
    delta_f1: float


FACTORS = (
    ("train_sentences", "count", lambda p: float(p.train_sentences)),
    ("resource_tier", "HIGH=3,MID=2,LOW=1,UNDER=0", lambda p: float(p.resource_tier)),
    ("uralic_related", "related=1,unrelated=0", lambda p: float(p.uralic_related)),
    ("script", "LATIN=1,CYRILLIC=0", lambda p: float(p.script)),
)


@dataclass(frozen=True)
class FactorCorrelation:
    factor: str
    encoding: str
    rho_acc: float | None
    rho_f1: float | None


def _rho_or_none(x, y):
    try:
        return spearman_rho(x, y)
    except UndefinedCorrelation:
        return None


def correlate_gains(gains: Sequence[GainRecord], profiles: Sequence[LanguageProfile]) -> list[FactorCorrelation]:
    """Spearman rho of each language factor against the accuracy and macro-F1 gains.

    Factors (or gains) without rank variance give ``None`` rather than being dropped.
    """
    by_code = {p.code: p for p in profiles}
    missing = sorted({g.code for g in gains} - set(by_code))
    if missing:
        raise ValueError(f"no language profile for {missing}")
    if len(gains) < 2:
        raise ValueError("need gains for at least two languages")
    acc = [g.delta_acc for g in gains]
    f1 = [g.delta_f1 for g in gains]
    rows = []
    for name, encoding, getter in FACTORS:
        values = [getter(by_code[g.code]) for g in gains]
        rows.append(FactorCorrelation(name, encoding, _rho_or_none(values, acc), _rho_or_none(values, f1)))
    return rows


def compute_gains(results: Mapping[str, Mapping[str, tuple[float, float]]], baseline: str = "best") -> list[GainRecord]:
    """Turn ``{code: {paradigm: (accuracy, macro_f1)}}`` into OBPE gain records.

    ``baseline`` is ``"best"`` (stronger of BPE and UNIGRAM, per metric),
    ``"BPE"`` or ``"UNIGRAM"``.
    """
    out = []
    for code in sorted(results):
        runs = results[code]
        if "OBPE" not in runs:
            raise ValueError(f"{code}: no OBPE result")
        if baseline == "best":
            bases = [runs[k] for k in ("BPE", "UNIGRAM") if k in runs]
            if not bases:
                raise ValueError(f"{code}: no baseline result")
            base_acc = max(b[0] for b in bases)
            base_f1 = max(b[1] for b in bases)
        else:
            if baseline not in runs:
                raise ValueError(f"{code}: no {baseline} result")
            base_acc, base_f1 = runs[baseline]
        obpe_acc, obpe_f1 = runs["OBPE"]
        out.append(GainRecord(code, obpe_acc - base_acc, obpe_f1 - base_f1))
    return out

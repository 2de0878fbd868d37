"""TSV writers and readers for experiment outputs."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

from .evaluation import FactorCorrelation, GainRecord, LanguageProfile, MetricReport, ResourceTier, Script

MISSING = "--"
UNDEFINED = "undefined"


def fmt(value: float | None, digits: int = 6) -> str:
    if value is None:
        return UNDEFINED
    return f"{value:.{digits}f}"


def _writer(sink: TextIO):
    return csv.writer(sink, delimiter="\t", lineterminator="\n", quoting=csv.QUOTE_NONE, escapechar="\\")


def write_per_tag(report: MetricReport, sink: TextIO) -> None:
    w = _writer(sink)
    w.writerow(["tag", "precision", "recall", "f1", "support"])
    for tag in report.labels:
        s = report.per_tag[tag]
        w.writerow([tag, fmt(s.precision), fmt(s.recall), fmt(s.f1), s.support])
    w.writerow(["MACRO_AVG", "", "", fmt(report.macro_f1), sum(s.support for s in report.per_tag.values())])


def write_confusion(report: MetricReport, sink: TextIO) -> None:
    w = _writer(sink)
    w.writerow(["gold/pred", *report.labels])
    for g in report.labels:
        w.writerow([g, *(report.confusion[g][p] for p in report.labels)])


def write_key_values(rows: Iterable[tuple[str, object]], sink: TextIO, header=("key", "value")) -> None:
    w = _writer(sink)
    w.writerow(header)
    for key, value in rows:
        w.writerow([key, value])


def read_key_values(path: str | Path) -> dict[str, str]:
    with open(path, encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle, delimiter="\t", quoting=csv.QUOTE_NONE, escapechar="\\"))
    return {row[0]: row[1] if len(row) > 1 else "" for row in rows[1:] if row}


def read_per_tag(path: str | Path) -> dict[str, tuple[float, int]]:
    """``{tag: (f1, support)}`` including the ``MACRO_AVG`` row."""
    out = {}
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle, delimiter="\t", quoting=csv.QUOTE_NONE, escapechar="\\")
        next(reader)
        for row in reader:
            out[row[0]] = (float(row[3]), int(row[4]))
    return out


def per_tag_table(columns: Sequence[tuple[str, Mapping[str, tuple[float, int]]]], sink: TextIO) -> None:
    """Tags as rows, one column per run; ``--`` where the run's gold data lacks the tag."""
    tags = sorted({t for _, table in columns for t in table if t != "MACRO_AVG"})
    w = _writer(sink)
    w.writerow(["POS", *(name for name, _ in columns)])
    for tag in tags:
        cells = []
        for _, table in columns:
            entry = table.get(tag)
            cells.append(fmt(entry[0], 3) if entry and entry[1] > 0 else MISSING)
        w.writerow([tag, *cells])
    w.writerow(["Macro Avg", *(fmt(table["MACRO_AVG"][0], 3) if "MACRO_AVG" in table else MISSING
                               for _, table in columns)])


def write_correlations(rows: Sequence[FactorCorrelation], sink: TextIO) -> None:
    w = _writer(sink)
    w.writerow(["factor", "encoding", "rho_delta_acc", "rho_delta_f1"])
    for r in rows:
        w.writerow([r.factor, r.encoding, fmt(r.rho_acc), fmt(r.rho_f1)])


def write_gains(gains: Sequence[GainRecord], sink: TextIO) -> None:
    w = _writer(sink)
    w.writerow(["code", "delta_acc", "delta_f1"])
    for g in gains:
        w.writerow([g.code, fmt(g.delta_acc), fmt(g.delta_f1)])


_TRUE = {"1", "yes", "true", "y"}
_FALSE = {"0", "no", "false", "n"}


def read_profiles(path: str | Path) -> list[LanguageProfile]:
    """Profile TSV with header ``code train_sentences tier uralic_related script``."""
    profiles = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle, delimiter="\t")
        expected = {"code", "train_sentences", "tier", "uralic_related", "script"}
        if not reader.fieldnames or not expected <= set(reader.fieldnames):
            raise ValueError(f"{path}: profile header must contain {sorted(expected)}")
        for line_no, row in enumerate(reader, start=2):
            try:
                related = row["uralic_related"].strip().lower()
                if related not in _TRUE | _FALSE:
                    raise ValueError(f"bad uralic_related value {row['uralic_related']!r}")
                profiles.append(LanguageProfile(
                    code=row["code"].strip(),
                    train_sentences=int(row["train_sentences"]),
                    resource_tier=ResourceTier[row["tier"].strip().upper()],
                    uralic_related=related in _TRUE,
                    script=Script[row["script"].strip().upper()],
                ))
            except (KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{line_no}: {exc}") from exc
    return profiles

"""Map tokenizer output back onto gold tokens and project labels to first subwords."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import UNK, WORD_END, WORD_START, MarkerStyle, normalize

PAD = "<PAD>"


class AlignmentError(ValueError):
    """Subwords and gold tokens disagree on the characters they cover."""

    def __init__(self, message: str, token_index: int, gold_stream: str, subword_stream: str):
        self.token_index = token_index
        self.gold_stream = gold_stream
        self.subword_stream = subword_stream
        super().__init__(
            f"{message} at gold token {token_index}: gold={gold_stream!r} subwords={subword_stream!r}"
        )


class BoundaryViolation(AlignmentError):
    """A single subword straddles two gold tokens."""


@dataclass(frozen=True)
class StrippedSubword:
    text: str
    word_start: bool
    word_end: bool


@dataclass(frozen=True)
class Alignment:
    subwords: tuple[str, ...]
    runs: tuple[tuple[int, ...], ...]
    spans: tuple[tuple[int, int], ...]

    def first_indices(self) -> list[int]:
        return [run[0] for run in self.runs]


@dataclass(frozen=True)
class ProjectedSequence:
    subwords: tuple[str, ...]
    labels: tuple[str, ...]
    run_positions: tuple[int, ...]
    word_starts: tuple[bool, ...]

    def __post_init__(self):
        if not (len(self.subwords) == len(self.labels) == len(self.run_positions) == len(self.word_starts)):
            raise ValueError("projected sequence fields differ in length")


def strip_markers(subwords: Sequence[str], marker_style: MarkerStyle) -> list[StrippedSubword]:
    """Remove a leading ``▁`` or trailing ``</w>`` and remember which boundary it marked."""
    out = []
    for sw in subwords:
        start = end = False
        if marker_style is MarkerStyle.WORD_INITIAL_UNDERSCORE and sw.startswith(WORD_START):
            sw, start = sw[len(WORD_START):], True
        elif marker_style is MarkerStyle.END_OF_WORD_SUFFIX and sw.endswith(WORD_END):
            sw, end = sw[: -len(WORD_END)], True
        out.append(StrippedSubword(sw, start, end))
    return out


def _clean(text: str) -> str:
    return "".join(normalize(text).split())


def greedy_align(
    gold_forms: Sequence[str],
    subwords: Sequence[str],
    marker_style: MarkerStyle,
    unk_token: str = UNK,
) -> Alignment:
    """Walk gold tokens left to right, consuming subwords until each token's characters are covered.

    An unk subword stands for exactly one character. Bare markers (empty after
    stripping) join the run of the word they delimit.
    """
    gold = [_clean(getattr(f, "form", f)) for f in gold_forms]
    stripped = strip_markers(subwords, marker_style)
    pieces = [s.text if s.text == unk_token else _clean(s.text) for s in stripped]

    def streams(k):
        return "".join(gold[k:]), "".join("?" if p == unk_token else p for p in pieces[pos:])

    runs: list[tuple[int, ...]] = []
    spans: list[tuple[int, int]] = []
    pos = 0
    offset = 0
    n = len(pieces)
    for k, target in enumerate(gold):
        if not target:
            raise AlignmentError("gold token is empty after normalization", k, *streams(k))
        run = []
        covered = 0
        while covered < len(target):
            if pos >= n:
                raise AlignmentError("subwords exhausted", k, *streams(k))
            piece = pieces[pos]
            if piece == unk_token:
                width = 1
            else:
                width = len(piece)
                rest = target[covered:]
                if not rest.startswith(piece):
                    if piece.startswith(rest) and rest:
                        raise BoundaryViolation("subword crosses token boundary", k, *streams(k))
                    raise AlignmentError("character mismatch", k, *streams(k))
            if covered + width > len(target):
                raise BoundaryViolation("subword crosses token boundary", k, *streams(k))
            run.append(pos)
            covered += width
            pos += 1
        # trailing bare end-of-word markers belong to the token they close
        while pos < n and pieces[pos] == "" and not stripped[pos].word_start:
            run.append(pos)
            pos += 1
        runs.append(tuple(run))
        spans.append((offset, offset + len(target)))
        offset += len(target)
    if pos < n:
        if any(p for p in pieces[pos:]) or not runs:
            raise AlignmentError("subwords left over", len(gold), "", streams(len(gold))[1])
        runs[-1] = runs[-1] + tuple(range(pos, n))
    return Alignment(tuple(pieces), tuple(runs), tuple(spans))


def project_first_subword(alignment: Alignment, labels: Sequence[str]) -> ProjectedSequence:
    """Label the first subword of each run with its token's tag; pad the rest."""
    labels = [getattr(t, "upos", t) for t in labels]
    if len(labels) != len(alignment.runs):
        raise ValueError("one label per gold token required")
    out = [PAD] * len(alignment.subwords)
    positions = [0] * len(alignment.subwords)
    starts = [False] * len(alignment.subwords)
    for label, run in zip(labels, alignment.runs):
        out[run[0]] = label
        starts[run[0]] = True
        for offset, idx in enumerate(run):
            positions[idx] = offset
    return ProjectedSequence(alignment.subwords, tuple(out), tuple(positions), tuple(starts))


def recover_token_predictions(alignment: Alignment, subword_predictions: Sequence[str]) -> list[str]:
    if len(subword_predictions) != len(alignment.subwords):
        raise ValueError(
            f"{len(subword_predictions)} predictions for {len(alignment.subwords)} subwords"
        )
    return [subword_predictions[run[0]] for run in alignment.runs]

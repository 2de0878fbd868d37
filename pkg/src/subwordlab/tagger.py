"""Averaged-perceptron tagger over first-subword projected sequences.

The tagger only sees subword strings and run layout, never the tokenizer,
so swapping tokenizers changes its input and nothing else.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .align import PAD, Alignment, ProjectedSequence, project_first_subword


@dataclass
class TaggerModel:
    weights: dict[str, dict[str, float]]
    tagset: tuple[str, ...]
    epochs_trained: int = 0
    seed: int = 42

    def __post_init__(self):
        if PAD in self.tagset:
            raise ValueError("PAD cannot be a tag")

    def scores(self, features: Iterable[str]) -> dict[str, float]:
        totals = dict.fromkeys(self.tagset, 0.0)
        for feat in features:
            row = self.weights.get(feat)
            if row:
                for tag, w in row.items():
                    if tag in totals:
                        totals[tag] += w
        return totals

    def predict(self, features: Iterable[str]) -> str:
        totals = self.scores(features)
        best = self.tagset[0]
        for tag in self.tagset[1:]:
            # strict comparison keeps the earlier tag on ties
            if totals[tag] > totals[best]:
                best = tag
        return best


def _affixes(sw: str, name: str, take) -> list[str]:
    return [f"{name}{k}={take(sw, k)}" for k in range(1, min(3, len(sw)) + 1)]


def extract_features(
    subwords: Sequence[str],
    run_positions: Sequence[int],
    word_starts: Sequence[bool],
    i: int,
) -> list[str]:
    sw = subwords[i]
    prev_sw = subwords[i - 1] if i > 0 else "<s>"
    next_sw = subwords[i + 1] if i + 1 < len(subwords) else "</s>"
    feats = [
        "bias",
        f"sw={sw}",
        f"prev={prev_sw}",
        f"next={next_sw}",
        f"start={int(word_starts[i])}",
        f"runpos={min(run_positions[i], 3)}",
    ]
    feats += _affixes(sw, "pre", lambda s, k: s[:k])
    feats += _affixes(sw, "suf", lambda s, k: s[-k:])
    return feats


def sequence_features(seq: ProjectedSequence) -> list[list[str] | None]:
    """Feature lists for labelled positions; ``None`` where the label is PAD."""
    return [
        extract_features(seq.subwords, seq.run_positions, seq.word_starts, i)
        if seq.labels[i] != PAD else None
        for i in range(len(seq.subwords))
    ]


class _Averager:
    """Lazy weight averaging: each weight tracks its running total and last-touched step."""

    def __init__(self, weights):
        self.weights = weights
        self.totals = defaultdict(float)
        self.stamps = defaultdict(int)
        self.step = 0

    def update(self, feat, tag, delta):
        key = (feat, tag)
        row = self.weights.setdefault(feat, {})
        w = row.get(tag, 0.0)
        self.totals[key] += (self.step - self.stamps[key]) * w
        self.stamps[key] = self.step
        row[tag] = w + delta

    def averaged(self):
        out: dict[str, dict[str, float]] = {}
        for feat in sorted(self.weights):
            row = self.weights[feat]
            new_row = {}
            for tag in sorted(row):
                key = (feat, tag)
                total = self.totals[key] + (self.step - self.stamps[key]) * row[tag]
                avg = total / self.step if self.step else 0.0
                if avg != 0.0:
                    new_row[tag] = avg
            if new_row:
                out[feat] = new_row
        return out


def train_tagger(
    train: Sequence[ProjectedSequence],
    epochs: int = 10,
    seed: int = 42,
    init: TaggerModel | None = None,
) -> TaggerModel:
    """Standard averaged-perceptron training, updating only non-PAD positions.

    ``init`` continues from an existing model's weights (used for optional
    source-language pre-training).
    """
    if not train:
        raise ValueError("empty training set")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    tags = {lab for seq in train for lab in seq.labels if lab != PAD}
    if init is not None:
        tags |= set(init.tagset)
    if not tags:
        raise ValueError("training data carries no labels")
    tagset = tuple(sorted(tags))
    weights = {f: dict(row) for f, row in init.weights.items()} if init else {}
    model = TaggerModel(weights, tagset, seed=seed)
    avg = _Averager(model.weights)

    instances = []
    for seq in train:
        for feats, gold in zip(sequence_features(seq), seq.labels):
            if feats is not None:
                instances.append((feats, gold))
    rng = random.Random(seed)
    order = list(range(len(instances)))
    for _ in range(epochs):
        rng.shuffle(order)
        for idx in order:
            feats, gold = instances[idx]
            avg.step += 1
            guess = model.predict(feats)
            if guess != gold:
                for f in feats:
                    avg.update(f, gold, 1.0)
                    avg.update(f, guess, -1.0)
    return TaggerModel(avg.averaged(), tagset, epochs + (init.epochs_trained if init else 0), seed)


def tag(model: TaggerModel, alignment: Alignment) -> list[str]:
    """Tag the first subword of every run; other positions get PAD."""
    placeholder = [model.tagset[0]] * len(alignment.runs)
    seq = project_first_subword(alignment, placeholder)
    out = []
    for feats in sequence_features(seq):
        out.append(PAD if feats is None else model.predict(feats))
    return out

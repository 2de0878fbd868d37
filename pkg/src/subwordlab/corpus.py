"""CoNLL-U ingestion and train/dev/test splitting."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, TextIO

UPOS_TAGS = (
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
)

LOW_RESOURCE_THRESHOLD = 1000


class ConlluParseError(ValueError):
    def __init__(self, message: str, line_no: int, source_name: str | None = None):
        self.line_no = line_no
        self.source_name = source_name
        where = f"{source_name}:{line_no}" if source_name else f"line {line_no}"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class Token:
    form: str
    upos: str

    def __post_init__(self):
        if not self.form or "\n" in self.form:
            raise ValueError(f"invalid FORM {self.form!r}")


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    sent_id: str | None = None

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("a sentence needs at least one token")

    @property
    def forms(self) -> tuple[str, ...]:
        return tuple(t.form for t in self.tokens)

    @property
    def tags(self) -> tuple[str, ...]:
        return tuple(t.upos for t in self.tokens)

    def __len__(self):
        return len(self.tokens)


@dataclass(frozen=True)
class SplitSpec:
    """Train/dev/test proportions plus the shuffle seed.

    Ratios are kept as exact fractions so that ``0.8 + 0.1 + 0.1`` sums to one.
    """

    train_ratio: Fraction
    dev_ratio: Fraction
    test_ratio: Fraction
    seed: int = 13

    def __post_init__(self):
        for name in ("train_ratio", "dev_ratio", "test_ratio"):
            value = Fraction(str(getattr(self, name)))
            if value < 0:
                raise ValueError(f"{name} must be non-negative, got {value}")
            object.__setattr__(self, name, value)
        total = self.train_ratio + self.dev_ratio + self.test_ratio
        if total != 1:
            raise ValueError(f"split ratios must sum to 1, got {total}")

    @classmethod
    def from_parts(cls, train: int, dev: int, test: int, seed: int = 13) -> "SplitSpec":
        total = train + dev + test
        return cls(Fraction(train, total), Fraction(dev, total), Fraction(test, total), seed)

    def label(self) -> str:
        # parts of ten when they fit ("6:2:2"), else smallest integers
        parts = [self.train_ratio, self.dev_ratio, self.test_ratio]
        denom = math.lcm(*(p.denominator for p in parts))
        if 10 % denom == 0:
            return ":".join(str(int(p * 10)) for p in parts)
        ints = [int(p * denom) for p in parts]
        g = math.gcd(*ints)
        return ":".join(str(i // g) for i in ints)


def _is_token_id(field: str) -> bool:
    return field.isdigit()


def parse_conllu(source: TextIO | Iterable[str], source_name: str | None = None) -> list[Sentence]:
    """Read FORM and UPOS from CoNLL-U text.

    Multiword range lines (``3-4``) and empty nodes (``5.1``) are skipped;
    only ``# sent_id`` survives from the comment metadata.
    """
    sentences: list[Sentence] = []
    tokens: list[Token] = []
    sent_id = None
    line_no = 0

    def flush():
        nonlocal tokens, sent_id
        if tokens:
            sentences.append(Sentence(tuple(tokens), sent_id))
        tokens = []
        sent_id = None

    for line_no, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep and key.strip() == "sent_id":
                sent_id = value.strip()
            continue
        fields = line.split("\t")
        # trimmed files with only ID/FORM/LEMMA/UPOS are tolerated
        if not 4 <= len(fields) <= 10:
            raise ConlluParseError(
                f"expected 4 to 10 tab-separated columns, found {len(fields)}", line_no, source_name
            )
        token_id = fields[0]
        if "-" in token_id or "." in token_id:
            continue
        if not _is_token_id(token_id):
            raise ConlluParseError(f"bad token ID {token_id!r}", line_no, source_name)
        form, upos = fields[1], fields[3]
        if not form:
            raise ConlluParseError("empty FORM", line_no, source_name)
        tokens.append(Token(form, upos))
    flush()
    return sentences


def read_conllu(path: str | Path) -> list[Sentence]:
    path = Path(path)
    with path.open(encoding="utf-8") as handle:
        return parse_conllu(handle, source_name=str(path))


def write_conllu(sentences: Iterable[Sentence], sink: TextIO) -> None:
    """Minimal writer: FORM and UPOS filled, every other column ``_``."""
    for sent in sentences:
        if sent.sent_id is not None:
            sink.write(f"# sent_id = {sent.sent_id}\n")
        for i, tok in enumerate(sent.tokens, start=1):
            sink.write(f"{i}\t{tok.form}\t_\t{tok.upos}\t_\t_\t_\t_\t_\t_\n")
        sink.write("\n")


def split_corpus(sentences: list[Sentence], spec: SplitSpec):
    """Shuffle with ``spec.seed`` and cut into (train, dev, test).

    Train and dev sizes are floored; test takes the remainder.
    """
    if not sentences:
        raise ValueError("cannot split an empty corpus")
    n = len(sentences)
    order = list(range(n))
    random.Random(spec.seed).shuffle(order)
    n_train = (n * spec.train_ratio.numerator) // spec.train_ratio.denominator
    n_dev = (n * spec.dev_ratio.numerator) // spec.dev_ratio.denominator
    shuffled = [sentences[i] for i in order]
    return (
        shuffled[:n_train],
        shuffled[n_train:n_train + n_dev],
        shuffled[n_train + n_dev:],
    )


def select_split_spec(n_sentences: int, threshold: int = LOW_RESOURCE_THRESHOLD, seed: int = 13) -> SplitSpec:
    """6:2:2 below ``threshold`` sentences, 8:1:1 otherwise."""
    if n_sentences < 1:
        raise ValueError("need at least one sentence")
    if n_sentences < threshold:
        return SplitSpec.from_parts(6, 2, 2, seed)
    return SplitSpec.from_parts(8, 1, 1, seed)

"""Model representation shared by the three trainers, plus the model file format.

File layout (UTF-8 text, tab separated)::

    #subwordlab-model  version=1  paradigm=BPE  vocab_size=N  marker_style=...  unk=<unk>
    0  <unk>  -
    1  </w>   -
    ...
    #merges  K            (BPE / OBPE only)
    a  b
    ...
    #checksum  <sha256 of every preceding byte>
"""

from __future__ import annotations

import enum
import hashlib
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import BinaryIO, Mapping

FORMAT_MAGIC = "#subwordlab-model"
FORMAT_VERSION = 1

WORD_START = "▁"
WORD_END = "</w>"
UNK = "<unk>"

LOGPROB_SUM_TOLERANCE = 1e-6


class Paradigm(str, enum.Enum):
    BPE = "BPE"
    UNIGRAM = "UNIGRAM"
    OBPE = "OBPE"


class MarkerStyle(str, enum.Enum):
    WORD_INITIAL_UNDERSCORE = "WORD_INITIAL_UNDERSCORE"
    END_OF_WORD_SUFFIX = "END_OF_WORD_SUFFIX"

    @property
    def symbol(self) -> str:
        return WORD_START if self is MarkerStyle.WORD_INITIAL_UNDERSCORE else WORD_END


DEFAULT_MARKERS = {
    Paradigm.BPE: MarkerStyle.END_OF_WORD_SUFFIX,
    Paradigm.OBPE: MarkerStyle.END_OF_WORD_SUFFIX,
    Paradigm.UNIGRAM: MarkerStyle.WORD_INITIAL_UNDERSCORE,
}


class ModelFileError(ValueError):
    """Base class for unreadable model files."""


class ModelFormatError(ModelFileError):
    pass


class ModelVersionError(ModelFileError):
    pass


class ModelChecksumError(ModelFileError):
    pass


class ModelInvariantError(ModelFileError):
    pass


def normalize(text: str) -> str:
    return unicodedata.normalize("NFKC", text)


def build_word_table(sentences) -> Counter:
    """Count NFKC-normalized, whitespace-split FORMs over a corpus.

    Accepts ``Sentence`` objects or plain lists of form strings.
    """
    table: Counter = Counter()
    for sent in sentences:
        forms = sent.forms if hasattr(sent, "forms") else sent
        for form in forms:
            table.update(normalize(form).split())
    return table


def char_inventory(table: Mapping[str, int]) -> set[str]:
    return {ch for word in table for ch in word}


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    ids: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = {tok: i for i, tok in enumerate(self.tokens)}
        if len(ids) != len(self.tokens):
            dupes = sorted(t for t, n in Counter(self.tokens).items() if n > 1)
            raise ValueError(f"duplicate vocabulary entries: {dupes[:5]}")
        object.__setattr__(self, "ids", ids)

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.ids

    def __iter__(self):
        return iter(self.tokens)

    def id_of(self, token: str) -> int:
        return self.ids[token]

    def token_of(self, idx: int) -> str:
        return self.tokens[idx]


@dataclass(frozen=True)
class TokenizerModel:
    """A trained tokenizer. Treat as immutable; ``log_probs`` is not copied."""

    paradigm: Paradigm
    vocabulary: Vocabulary
    marker_style: MarkerStyle
    merges: tuple[tuple[str, str], ...] | None = None
    log_probs: dict[str, float] | None = None
    unk_token: str = UNK
    # per-model memo for encoders (merge ranks, segmented words)
    cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.paradigm is Paradigm.UNIGRAM:
            if self.log_probs is None or self.merges is not None:
                raise ValueError("UNIGRAM models carry log_probs and no merges")
        elif self.merges is None or self.log_probs is not None:
            raise ValueError(f"{self.paradigm.value} models carry merges and no log_probs")

    @property
    def size(self) -> int:
        return len(self.vocabulary)

    @property
    def reserved(self) -> tuple[str, ...]:
        if self.paradigm is Paradigm.UNIGRAM:
            return (self.unk_token,)
        return (self.unk_token, self.marker_style.symbol)

    def encode(self, text: str) -> list[str]:
        if self.paradigm is Paradigm.UNIGRAM:
            from .unigram import encode_viterbi
            return encode_viterbi(self, text)
        from .bpe import encode_bpe
        return encode_bpe(self, text)

    def check(self) -> None:
        """Raise ``ModelInvariantError`` if the payload is inconsistent."""
        vocab = self.vocabulary
        if self.unk_token not in vocab:
            raise ModelInvariantError("unk token missing from vocabulary")
        if self.paradigm is Paradigm.UNIGRAM:
            missing = [t for t in self.log_probs if t not in vocab]
            if missing:
                raise ModelInvariantError(f"log-probs for unknown tokens {missing[:5]}")
            unscored = [t for t in vocab if t != self.unk_token and t not in self.log_probs]
            if unscored:
                raise ModelInvariantError(f"tokens without log-probs {unscored[:5]}")
            if any(lp > 0 or math.isnan(lp) for lp in self.log_probs.values()):
                raise ModelInvariantError("log-probabilities must be <= 0")
            total = math.fsum(math.exp(lp) for lp in self.log_probs.values())
            if abs(total - 1.0) > LOGPROB_SUM_TOLERANCE:
                raise ModelInvariantError(f"probabilities sum to {total!r}, not 1")
            return
        reserved = set(self.reserved)
        merged = {left + right for left, right in self.merges} - reserved
        derived = {t for t in vocab if t not in reserved and len(t) > 1}
        if merged != derived:
            extra = sorted(derived - merged)[:5]
            lacking = sorted(merged - derived)[:5]
            raise ModelInvariantError(
                f"merges do not generate the vocabulary (unexplained {extra}, absent {lacking})"
            )
        known = set(vocab)
        for left, right in self.merges:
            if left not in known or right not in known:
                raise ModelInvariantError(f"merge ({left!r}, {right!r}) uses unknown symbols")


def _format_logprob(lp: float) -> str:
    return repr(float(lp))


def dumps_model(model: TokenizerModel) -> str:
    lines = [
        "\t".join([
            FORMAT_MAGIC,
            f"version={FORMAT_VERSION}",
            f"paradigm={model.paradigm.value}",
            f"vocab_size={model.size}",
            f"marker_style={model.marker_style.value}",
            f"unk={model.unk_token}",
        ])
    ]
    for idx, tok in enumerate(model.vocabulary):
        if model.log_probs is not None and tok in model.log_probs:
            lp = _format_logprob(model.log_probs[tok])
        else:
            lp = "-"
        lines.append(f"{idx}\t{tok}\t{lp}")
    if model.merges is not None:
        lines.append(f"#merges\t{len(model.merges)}")
        lines.extend(f"{left}\t{right}" for left, right in model.merges)
    body = "".join(line + "\n" for line in lines)
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    return body + f"#checksum\t{digest}\n"


def save_model(model: TokenizerModel, sink: BinaryIO) -> None:
    sink.write(dumps_model(model).encode("utf-8"))


def loads_model(data: bytes | str) -> TokenizerModel:
    if isinstance(data, str):
        data = data.encode("utf-8")
    marker = b"#checksum\t"
    cut = data.rfind(b"\n" + marker)
    if cut < 0:
        raise ModelChecksumError("missing checksum trailer (truncated file?)")
    body = data[: cut + 1]
    trailer = data[cut + 1 + len(marker):].strip()
    if hashlib.sha256(body).hexdigest().encode("ascii") != trailer:
        raise ModelChecksumError("checksum mismatch")
    try:
        text = body.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ModelFormatError(f"not UTF-8: {exc}") from exc
    lines = text.split("\n")[:-1]
    if not lines or not lines[0].startswith(FORMAT_MAGIC + "\t"):
        raise ModelFormatError("missing model header")
    header = {}
    for item in lines[0].split("\t")[1:]:
        key, sep, value = item.partition("=")
        if not sep:
            raise ModelFormatError(f"bad header field {item!r}")
        header[key] = value
    if header.get("version") != str(FORMAT_VERSION):
        raise ModelVersionError(
            f"unsupported model format version {header.get('version')!r} (expected {FORMAT_VERSION})"
        )
    try:
        paradigm = Paradigm(header["paradigm"])
        marker_style = MarkerStyle(header["marker_style"])
        vocab_size = int(header["vocab_size"])
        unk = header["unk"]
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"bad header: {exc}") from exc

    if len(lines) < 1 + vocab_size:
        raise ModelFormatError("vocabulary section shorter than declared")
    tokens = []
    log_probs: dict[str, float] = {}
    for expected_id, line in enumerate(lines[1:1 + vocab_size]):
        parts = line.split("\t")
        if len(parts) != 3:
            raise ModelFormatError(f"bad vocabulary line {line!r}")
        idx, tok, lp = parts
        if idx != str(expected_id):
            raise ModelInvariantError(f"vocabulary ids not contiguous at {idx!r}")
        tokens.append(tok)
        if lp != "-":
            try:
                log_probs[tok] = float(lp)
            except ValueError as exc:
                raise ModelFormatError(f"bad log-prob {lp!r}") from exc

    rest = lines[1 + vocab_size:]
    merges = None
    if paradigm is Paradigm.UNIGRAM:
        if rest:
            raise ModelFormatError("unexpected trailing sections in a UNIGRAM model")
    else:
        if not rest or not rest[0].startswith("#merges\t"):
            raise ModelFormatError("missing #merges section")
        n_merges = int(rest[0].split("\t")[1])
        if len(rest) - 1 != n_merges:
            raise ModelFormatError(f"expected {n_merges} merges, found {len(rest) - 1}")
        merges = []
        for line in rest[1:]:
            parts = line.split("\t")
            if len(parts) != 2:
                raise ModelFormatError(f"bad merge line {line!r}")
            merges.append((parts[0], parts[1]))
        merges = tuple(merges)
        if log_probs:
            raise ModelInvariantError("merge-based model carries log-probs")

    try:
        vocabulary = Vocabulary(tuple(tokens))
        model = TokenizerModel(
            paradigm=paradigm,
            vocabulary=vocabulary,
            marker_style=marker_style,
            merges=merges,
            log_probs=log_probs if paradigm is Paradigm.UNIGRAM else None,
            unk_token=unk,
        )
    except ValueError as exc:
        raise ModelInvariantError(str(exc)) from exc
    model.check()
    return model


def load_model(source: BinaryIO) -> TokenizerModel:
    return loads_model(source.read())


def write_model_file(model: TokenizerModel, path) -> None:
    with open(path, "wb") as handle:
        save_model(model, handle)


def read_model_file(path) -> TokenizerModel:
    with open(path, "rb") as handle:
        return load_model(handle)


def split_words(text: str) -> list[str]:
    return normalize(text).split()

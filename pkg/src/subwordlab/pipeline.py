"""End-to-end experiment: split, train a tokenizer, project labels, tag, score."""

from __future__ import annotations

import dataclasses
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import reports
from .align import AlignmentError, greedy_align, project_first_subword, recover_token_predictions
from .bpe import train_bpe
from .core import DEFAULT_MARKERS, MarkerStyle, Paradigm, TokenizerModel, build_word_table, write_model_file
from .corpus import LOW_RESOURCE_THRESHOLD, Sentence, read_conllu, select_split_spec, split_corpus
from .evaluation import compute_metrics, fertility, pos_entropy
from .obpe import BilingualTables, ObpeConfig, parse_exponent, train_obpe
from .tagger import tag, train_tagger
from .unigram import UnigramTrainerConfig, train_unigram

logger = logging.getLogger(__name__)

REPORT_FILES = ("metrics.tsv", "per_tag.tsv", "confusion.tsv", "manifest.txt", "tokenizer.model", "run.log")
MANIFEST_HEADER = ("parameter", "value")


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")


@dataclass
class ExperimentConfig:
    paradigm: Paradigm
    corpus: str
    src: str | None = None
    lang: str | None = None
    vocab_size: int = 5000
    alpha: float = 0.5
    p: float = float("-inf")
    marker_style: MarkerStyle | None = None
    seed_size_factor: int = 20
    max_seed_token_len: int = 16
    prune_fraction: float = 0.25
    em_subiters: int = 2
    split_seed: int = 13
    low_resource_threshold: int = LOW_RESOURCE_THRESHOLD
    dev: str | None = None
    test: str | None = None
    epochs: int = 10
    tagger_seed: int = 42
    encode_unit: str = "token"
    skip_misaligned: bool = False
    pretrain_source: bool = False

    def __post_init__(self):
        self.paradigm = Paradigm(self.paradigm)
        if self.marker_style is None:
            self.marker_style = DEFAULT_MARKERS[self.paradigm]
        self.marker_style = MarkerStyle(self.marker_style)
        if self.paradigm is Paradigm.OBPE and not self.src:
            raise ValueError("OBPE needs a source corpus (--src) and a target corpus")
        if self.pretrain_source and not self.src:
            raise ValueError("--pretrain-source needs --src")
        if self.encode_unit not in ("token", "sentence"):
            raise ValueError(f"encode_unit must be 'token' or 'sentence', got {self.encode_unit!r}")
        if self.lang is None:
            self.lang = Path(self.corpus).stem
        ObpeConfig(self.alpha, self.p, self.vocab_size)

    def manifest_rows(self) -> list[tuple[str, str]]:
        rows = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                text = ""
            elif isinstance(value, (Paradigm, MarkerStyle)):
                text = value.value
            elif isinstance(value, float) and math.isinf(value):
                text = "-inf"
            else:
                text = str(value)
            rows.append((f.name, text))
        return rows

    @classmethod
    def from_manifest(cls, path: str | Path) -> "ExperimentConfig":
        values = reports.read_key_values(path)
        kwargs = {}
        for f in dataclasses.fields(cls):
            if f.name not in values:
                continue
            raw = values[f.name]
            default = f.default
            if raw == "" and default is None:
                kwargs[f.name] = None
            elif f.name == "p":
                kwargs[f.name] = parse_exponent(raw)
            elif isinstance(default, bool):
                kwargs[f.name] = raw == "True"
            elif isinstance(default, int):
                kwargs[f.name] = int(raw)
            elif isinstance(default, float):
                kwargs[f.name] = float(raw)
            else:
                kwargs[f.name] = raw
        return cls(**kwargs)


def train_tokenizer(config: ExperimentConfig, target_train: list[Sentence], source: list[Sentence] | None,
                    history: list[float] | None = None) -> TokenizerModel:
    low = build_word_table(target_train)
    if config.paradigm is Paradigm.BPE:
        return train_bpe(low, config.vocab_size, config.marker_style)
    if config.paradigm is Paradigm.UNIGRAM:
        ucfg = UnigramTrainerConfig(
            vocab_size=config.vocab_size,
            seed_size_factor=config.seed_size_factor,
            max_seed_token_len=config.max_seed_token_len,
            prune_fraction=config.prune_fraction,
            em_subiters=config.em_subiters,
        )
        return train_unigram(low, ucfg, config.marker_style, history=history)
    high = build_word_table(source)
    return train_obpe(
        BilingualTables(high=high, low=low),
        ObpeConfig(config.alpha, config.p, config.vocab_size),
        config.marker_style,
    )


@dataclass
class Projection:
    sequences: list = field(default_factory=list)
    alignments: list = field(default_factory=list)
    sentences: list = field(default_factory=list)
    skipped: int = 0


def project_corpus(model: TokenizerModel, sentences: list[Sentence], encode_unit: str,
                   skip_misaligned: bool, log: Callable[[str], None]) -> Projection:
    out = Projection()
    for sent in sentences:
        if encode_unit == "token":
            subwords = [sw for form in sent.forms for sw in model.encode(form)]
        else:
            subwords = model.encode(" ".join(sent.forms))
        try:
            alignment = greedy_align(sent.forms, subwords, model.marker_style, model.unk_token)
        except AlignmentError as exc:
            if not skip_misaligned:
                raise
            out.skipped += 1
            log(f"skipped misaligned sentence {sent.sent_id or '?'}: {exc}")
            continue
        out.alignments.append(alignment)
        out.sequences.append(project_first_subword(alignment, sent.tags))
        out.sentences.append(sent)
    return out


class _Stages:
    def __init__(self, log):
        self.log = log
        self.name = None

    def __call__(self, name):
        self.name = name
        self.log(f"stage: {name}")
        return self

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError) and isinstance(exc, Exception):
            raise StageError(self.name, exc) from exc
        return False


def run_experiment(config: ExperimentConfig, out_dir: str | Path) -> dict:
    """Run one configuration and write the report directory. Returns the summary metrics."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines: list[str] = []

    def log(message: str):
        lines.append(message)
        logger.info(message)

    stage = _Stages(log)
    with stage("load"):
        target = read_conllu(config.corpus)
        source = read_conllu(config.src) if config.src else None
        if not target:
            raise ValueError(f"{config.corpus}: no sentences")
    with stage("split"):
        if config.test:
            train, dev = target, (read_conllu(config.dev) if config.dev else [])
            test = read_conllu(config.test)
            split_label = "given"
        else:
            spec = select_split_spec(len(target), config.low_resource_threshold, config.split_seed)
            train, dev, test = split_corpus(target, spec)
            split_label = spec.label()
        if not train or not test:
            raise ValueError(f"empty split: train={len(train)} test={len(test)}")
        log(f"split {split_label}: train={len(train)} dev={len(dev)} test={len(test)}")
    history: list[float] = []
    with stage("tokenizer"):
        model = train_tokenizer(config, train, source, history)
        write_model_file(model, out / "tokenizer.model")
        log(f"tokenizer {model.paradigm.value}: vocab={model.size}")
        if history:
            log(f"unigram final log-likelihood {history[-1]!r}")
    with stage("align"):
        train_proj = project_corpus(model, train, config.encode_unit, config.skip_misaligned, log)
        test_proj = project_corpus(model, test, config.encode_unit, config.skip_misaligned, log)
        if not train_proj.sequences or not test_proj.sequences:
            raise ValueError("no aligned sentences left")
    with stage("tagger"):
        init = None
        if config.pretrain_source:
            src_proj = project_corpus(model, source, config.encode_unit, config.skip_misaligned, log)
            init = train_tagger(src_proj.sequences, config.epochs, config.tagger_seed)
        tagger = train_tagger(train_proj.sequences, config.epochs, config.tagger_seed, init=init)
    with stage("evaluate"):
        gold, pred = [], []
        for sent, alignment in zip(test_proj.sentences, test_proj.alignments):
            gold.extend(sent.tags)
            pred.extend(recover_token_predictions(alignment, tag(tagger, alignment)))
        report = compute_metrics(gold, pred)
        fert = fertility(model, test)
        entropy = pos_entropy(Counter(t for s in train for t in s.tags))
    summary = {
        "accuracy": report.accuracy,
        "macro_f1": report.macro_f1,
        "fertility": fert,
        "pos_entropy_train": entropy,
    }
    with stage("write"):
        metrics_rows = [
            ("lang", config.lang),
            ("paradigm", config.paradigm.value),
            ("accuracy", reports.fmt(report.accuracy)),
            ("macro_f1", reports.fmt(report.macro_f1)),
            ("fertility", reports.fmt(fert)),
            ("pos_entropy_train", reports.fmt(entropy)),
            ("tokens_evaluated", len(gold)),
            ("misaligned_skipped", train_proj.skipped + test_proj.skipped),
        ]
        with open(out / "metrics.tsv", "w", encoding="utf-8", newline="") as fh:
            reports.write_key_values(metrics_rows, fh, header=("metric", "value"))
        with open(out / "per_tag.tsv", "w", encoding="utf-8", newline="") as fh:
            reports.write_per_tag(report, fh)
        with open(out / "confusion.tsv", "w", encoding="utf-8", newline="") as fh:
            reports.write_confusion(report, fh)
        with open(out / "manifest.txt", "w", encoding="utf-8", newline="") as fh:
            info = [
                ("split", split_label),
                ("train_sentences", str(len(train))),
                ("dev_sentences", str(len(dev))),
                ("test_sentences", str(len(test))),
                ("vocab_trained", str(model.size)),
            ]
            reports.write_key_values(config.manifest_rows() + [(f"info.{k}", v) for k, v in info], fh,
                                     header=MANIFEST_HEADER)
        log(f"accuracy={reports.fmt(report.accuracy)} macro_f1={reports.fmt(report.macro_f1)}")
        with open(out / "run.log", "w", encoding="utf-8") as fh:
            fh.write("".join(line + "\n" for line in lines))
    return summary

"""Command-line entry point: ``subwordlab {train,encode,run,analyze,table}``.

Exit codes: 0 success, 1 usage, 2 data error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter
from pathlib import Path

from . import reports
from .core import MarkerStyle, ModelInvariantError, Paradigm, build_word_table, read_model_file, write_model_file
from .corpus import read_conllu
from .evaluation import compute_gains, correlate_gains
from .obpe import parse_exponent
from .pipeline import ExperimentConfig, StageError, run_experiment, train_tokenizer
from .unigram import encode_sampled

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _exponent(text: str) -> float:
    try:
        return parse_exponent(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _paradigm(text: str) -> Paradigm:
    try:
        return Paradigm(text.upper())
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown paradigm {text!r}") from None


def _marker(text: str) -> MarkerStyle:
    try:
        return MarkerStyle(text.upper())
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown marker style {text!r}") from None


def _add_tokenizer_args(p: argparse.ArgumentParser, required: bool = True):
    p.add_argument("--paradigm", type=_paradigm, required=required, help="bpe, unigram or obpe")
    p.add_argument("--corpus", help="training corpus (BPE/Unigram)")
    p.add_argument("--tgt", help="target (low-resource) corpus; alias of --corpus")
    p.add_argument("--src", help="source (high-resource) corpus, required for OBPE")
    p.add_argument("--vocab-size", type=int, default=5000)
    p.add_argument("--alpha", type=float, default=0.5, help="OBPE weight on total frequency")
    p.add_argument("--p", type=_exponent, default=float("-inf"), help="OBPE generalized-mean exponent; '-inf' allowed")
    p.add_argument("--marker-style", type=_marker, default=None)
    p.add_argument("--seed-size-factor", type=int, default=20)
    p.add_argument("--max-seed-token-len", type=int, default=16)
    p.add_argument("--prune-fraction", type=float, default=0.25)
    p.add_argument("--em-subiters", type=int, default=2)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="subwordlab", description="Subword tokenizer comparison for POS tagging.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a tokenizer and write a model file")
    _add_tokenizer_args(p)
    p.add_argument("--out", "-o", default="tokenizer.model")

    p = sub.add_parser("encode", help="tokenize a text file line by line")
    p.add_argument("--model", "-m", required=True)
    p.add_argument("input", nargs="?", default="-", help="text file, '-' for stdin")
    p.add_argument("--out", "-o", default="-")
    p.add_argument("--sample", action="store_true", help="sample segmentations (Unigram only)")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("run", help="run a full tagging experiment")
    _add_tokenizer_args(p, required=False)
    p.add_argument("--out", "-o", required=True, help="report directory")
    p.add_argument("--from-manifest", help="reuse every parameter from an earlier manifest.txt")
    p.add_argument("--lang", help="language code (defaults to the target file stem)")
    p.add_argument("--dev", help="explicit dev split file")
    p.add_argument("--test", help="explicit test split file; the corpus is then used whole for training")
    p.add_argument("--split-seed", type=int, default=13)
    p.add_argument("--low-resource-threshold", type=int, default=1000)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--tagger-seed", type=int, default=42)
    p.add_argument("--encode-unit", choices=("token", "sentence"), default="token")
    p.add_argument("--skip-misaligned", action="store_true")
    p.add_argument("--pretrain-source", action="store_true", help="pre-train the tagger on --src first")

    p = sub.add_parser("analyze", help="correlate OBPE gains with language properties")
    p.add_argument("reports", nargs="+", help="report directories written by 'run'")
    p.add_argument("--profiles", required=True, help="language profile TSV")
    p.add_argument("--delta-baseline", choices=("best", "BPE", "UNIGRAM"), default="best",
                   help="baseline for the gains: the better of BPE and Unigram, or a fixed one")
    p.add_argument("--out", "-o", default="-")
    p.add_argument("--gains-out", help="also write per-language gains here")

    p = sub.add_parser("table", help="per-tag F1 table across report directories")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out", "-o", default="-")
    return parser


def _training_corpus(args) -> str:
    if args.corpus and args.tgt and args.corpus != args.tgt:
        raise UsageError("give the training corpus once, via --corpus or --tgt")
    corpus = args.corpus or args.tgt
    if args.paradigm is Paradigm.OBPE:
        if not (args.src and corpus):
            raise UsageError("obpe needs both --src and --tgt")
    elif not corpus:
        raise UsageError(f"{args.paradigm.value.lower()} needs --corpus")
    return corpus


def _config_from_args(args, **extra) -> ExperimentConfig:
    try:
        return ExperimentConfig(
            paradigm=args.paradigm,
            corpus=_training_corpus(args),
            src=args.src,
            vocab_size=args.vocab_size,
            alpha=args.alpha,
            p=args.p,
            marker_style=args.marker_style,
            seed_size_factor=args.seed_size_factor,
            max_seed_token_len=args.max_seed_token_len,
            prune_fraction=args.prune_fraction,
            em_subiters=args.em_subiters,
            **extra,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


class _Output:
    def __init__(self, target: str):
        self.target = target

    def __enter__(self):
        if self.target == "-":
            self.handle = sys.stdout
        else:
            self.handle = open(self.target, "w", encoding="utf-8", newline="")
        return self.handle

    def __exit__(self, *exc):
        if self.handle is not sys.stdout:
            self.handle.close()
        return False


def cmd_train(args) -> int:
    config = _config_from_args(args)
    if args.paradigm is not Paradigm.OBPE and args.src:
        raise UsageError(f"{args.paradigm.value.lower()} trains on one corpus; drop --src")
    target = read_conllu(config.corpus)
    source = read_conllu(config.src) if config.src else None
    history: list[float] = []
    model = train_tokenizer(config, target, source, history)
    model.check()
    write_model_file(model, args.out)
    table = build_word_table(target)
    print(f"paradigm\t{model.paradigm.value}")
    print(f"vocab_size\t{model.size}")
    print(f"word_types\t{len(table)}")
    print(f"word_tokens\t{sum(table.values())}")
    if source is not None:
        print(f"source_word_types\t{len(build_word_table(source))}")
    if model.merges is not None:
        print(f"merges\t{len(model.merges)}")
    if history:
        print(f"em_steps\t{len(history)}")
        print(f"final_log_likelihood\t{history[-1]!r}")
    print(f"model\t{args.out}")
    return EXIT_OK


def cmd_encode(args) -> int:
    model = read_model_file(args.model)
    if args.sample and model.paradigm is not Paradigm.UNIGRAM:
        raise UsageError("--sample needs a Unigram model")
    if args.input == "-":
        lines = sys.stdin.read().splitlines()
    else:
        with open(args.input, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    with _Output(args.out) as out:
        for i, line in enumerate(lines):
            if args.sample:
                pieces = encode_sampled(model, line, args.temperature, args.seed + i)
            else:
                pieces = model.encode(line)
            out.write(" ".join(pieces) + "\n")
    return EXIT_OK


def cmd_run(args) -> int:
    if args.from_manifest:
        try:
            config = ExperimentConfig.from_manifest(args.from_manifest)
        except (KeyError, TypeError) as exc:
            raise UsageError(f"{args.from_manifest}: not a usable manifest ({exc})") from exc
    else:
        if args.paradigm is None:
            raise UsageError("run needs --paradigm or --from-manifest")
        config = _config_from_args(
            args,
            lang=args.lang,
            dev=args.dev,
            test=args.test,
            split_seed=args.split_seed,
            low_resource_threshold=args.low_resource_threshold,
            epochs=args.epochs,
            tagger_seed=args.tagger_seed,
            encode_unit=args.encode_unit,
            skip_misaligned=args.skip_misaligned,
            pretrain_source=args.pretrain_source,
        )
    summary = run_experiment(config, args.out)
    for key, value in summary.items():
        print(f"{key}\t{reports.fmt(value)}")
    print(f"report\t{args.out}")
    return EXIT_OK


def _read_run(directory: str) -> dict[str, str]:
    path = Path(directory) / "metrics.tsv"
    values = reports.read_key_values(path)
    for key in ("lang", "paradigm", "accuracy", "macro_f1"):
        if key not in values:
            raise ValueError(f"{path}: missing '{key}'")
    return values


def cmd_analyze(args) -> int:
    results: dict[str, dict[str, tuple[float, float]]] = {}
    for directory in args.reports:
        run = _read_run(directory)
        results.setdefault(run["lang"], {})[run["paradigm"]] = (float(run["accuracy"]), float(run["macro_f1"]))
    if len(results) < 2:
        raise UsageError(f"need reports for at least two languages, got {len(results)}")
    gains = compute_gains(results, args.delta_baseline)
    profiles = reports.read_profiles(args.profiles)
    rows = correlate_gains(gains, profiles)
    with _Output(args.out) as out:
        reports.write_correlations(rows, out)
    if args.gains_out:
        with _Output(args.gains_out) as out:
            reports.write_gains(gains, out)
    return EXIT_OK


def cmd_table(args) -> int:
    columns = []
    names = Counter()
    for directory in args.reports:
        run = _read_run(directory)
        name = f"{run['lang']}/{run['paradigm']}"
        names[name] += 1
        if names[name] > 1:
            name = f"{name}#{names[name]}"
        columns.append((name, reports.read_per_tag(Path(directory) / "per_tag.tsv")))
    with _Output(args.out) as out:
        reports.per_tag_table(columns, out)
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "encode": cmd_encode,
    "run": cmd_run,
    "analyze": cmd_analyze,
    "table": cmd_table,
}


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, StageError):
        return _exit_code(exc.cause)
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    if isinstance(exc, ModelInvariantError):
        return EXIT_INTERNAL
    if isinstance(exc, (OSError, ValueError, UnicodeDecodeError)):
        return EXIT_DATA
    return EXIT_INTERNAL


def _join_negative_values(argv: list[str]) -> list[str]:
    # argparse would read "-inf" as an option flag
    out = []
    i = 0
    while i < len(argv):
        if argv[i] == "--p" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"--p={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        return COMMANDS[args.command](args)
    except Exception as exc:
        code = _exit_code(exc)
        if code == EXIT_USAGE:
            print(f"usage error: {exc}", file=sys.stderr)
        elif code == EXIT_DATA:
            print(f"error: {exc}", file=sys.stderr)
        else:
            print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())

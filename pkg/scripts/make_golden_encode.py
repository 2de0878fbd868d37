"""Freeze the encode golden file after checking the model against the brute-force oracle.

Run from the repository root: python3 scripts/make_golden_encode.py
"""

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from oracles import _merge, _symbols, brute_force_merges, most_frequent  # noqa: E402

from subwordlab.bpe import train_bpe  # noqa: E402
from subwordlab.core import build_word_table  # noqa: E402
from subwordlab.corpus import read_conllu  # noqa: E402

VOCAB = 300
CORPUS = ROOT / "src" / "subwordlab" / "data" / "mini_tgt.conllu"
GOLDEN = ROOT / "tests" / "golden"


def oracle_encode(merges, line):
    out = []
    for word in line.split():
        symbols = _symbols(word)
        for left, right in merges:
            symbols = _merge(symbols, left, right)
        out.extend(symbols)
    return out


def main():
    sents = read_conllu(CORPUS)
    table = build_word_table(sents)
    model = train_bpe(table, VOCAB)
    merges = brute_force_merges([table], VOCAB, most_frequent)
    if list(model.merges) != merges:
        raise SystemExit("trainer disagrees with the oracle; not freezing")
    lines = [" ".join(s.forms) for s in sents[:40]]
    encoded = []
    for line in lines:
        pieces = model.encode(line)
        if pieces != oracle_encode(merges, line):
            raise SystemExit(f"encode disagrees with the oracle on {line!r}")
        encoded.append(" ".join(pieces))
    GOLDEN.mkdir(exist_ok=True)
    (GOLDEN / "encode_input.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (GOLDEN / "encode_bpe300.txt").write_text("\n".join(encoded) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()

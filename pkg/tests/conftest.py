import random
import string
from pathlib import Path

import pytest

DATA = Path(__file__).resolve().parents[1] / "src" / "subwordlab" / "data"
TGT = DATA / "mini_tgt.conllu"
SRC = DATA / "mini_src.conllu"


def random_table(rng: random.Random, max_words=50, alphabet_size=12, max_len=8):
    alphabet = string.ascii_lowercase[:alphabet_size]
    n = rng.randint(1, max_words)
    table = {}
    for _ in range(n):
        word = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, max_len)))
        table[word] = table.get(word, 0) + rng.randint(1, 9)
    return table


@pytest.fixture
def tgt_path():
    return TGT


@pytest.fixture
def src_path():
    return SRC


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

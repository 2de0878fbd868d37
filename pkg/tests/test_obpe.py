import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from subwordlab.bpe import train_bpe
from subwordlab.core import MarkerStyle, Paradigm, build_word_table
from subwordlab.corpus import read_conllu
from subwordlab.obpe import (
    NEG_INFINITY,
    BilingualTables,
    ObpeConfig,
    generalized_mean,
    pair_score,
    parse_exponent,
    train_obpe,
)

from conftest import random_table
from oracles import brute_force_merges, power_mean, round_significant


def _merged(high, low):
    out = dict(high)
    for w, f in low.items():
        out[w] = out.get(w, 0) + f
    return out


@pytest.mark.parametrize(
    "p, expected",
    [(1.0, 6.5), (0.0, 6.0), (-1.0, 2 / (1 / 4 + 1 / 9)), (NEG_INFINITY, 4.0)],
)
def test_generalized_mean_values(p, expected):
    assert generalized_mean(4, 9, p) == pytest.approx(expected, abs=1e-12)


def test_harmonic_value_to_six_places():
    assert abs(generalized_mean(4, 9, -1.0) - 5.538461) < 1e-6


@pytest.mark.parametrize("p", [-1.0, 0.0, -5.0, NEG_INFINITY])
def test_zero_frequency_convention(p):
    assert generalized_mean(0, 9, p) == 0.0
    assert generalized_mean(9, 0, p) == 0.0


def test_positive_p_with_zero_uses_the_formula():
    assert generalized_mean(0, 9, 1.0) == 4.5
    assert generalized_mean(0, 8, 0.5) == pytest.approx(((8 ** 0.5) / 2) ** 2)
    assert generalized_mean(0, 0, 0.5) == 0.0


def test_large_counts_do_not_overflow():
    assert generalized_mean(10**6, 10**6, -300.0) == pytest.approx(10**6)
    assert math.isfinite(generalized_mean(10**9, 3, -50.0))


@settings(max_examples=500)
@given(st.floats(0.01, 1e4), st.floats(0.01, 1e4), st.floats(-30, 1))
def test_matches_direct_formula(a, b, p):
    assert generalized_mean(a, b, p) == pytest.approx(power_mean(a, b, p), rel=1e-12)


@pytest.mark.parametrize("p", [1e-7, -1e-7, 1.192092896e-07, 1e-12, -1e-15])
def test_exponent_near_zero_approaches_geometric_mean(p):
    assert generalized_mean(0.5, 0.25, p) == pytest.approx(power_mean(0.5, 0.25, p), rel=1e-14)
    assert generalized_mean(0.5, 0.25, p) == pytest.approx(math.sqrt(0.125), rel=1e-6)


def test_equal_frequencies_are_exact():
    for p in (-30.0, -1.0, 0.0, 0.5, 1.0, NEG_INFINITY):
        assert generalized_mean(7, 7, p) == 7.0


def test_monotone_in_p_and_arguments():
    rng = random.Random(1)
    for _ in range(1000):
        a, b = rng.uniform(0.01, 100), rng.uniform(0.01, 100)
        p1, p2 = sorted(rng.uniform(-20, 1) for _ in range(2))
        assert generalized_mean(a, b, p1) <= generalized_mean(a, b, p2) * (1 + 1e-12)
        assert generalized_mean(a, b, NEG_INFINITY) <= generalized_mean(a, b, p1) * (1 + 1e-12)
        assert generalized_mean(a, b, p1) <= generalized_mean(a + rng.uniform(0, 5), b, p1) * (1 + 1e-12)


def test_pair_score_cases():
    assert pair_score(3, 10, ObpeConfig(alpha=0.5)) == pytest.approx(9.5)
    assert pair_score(3, 10, ObpeConfig(alpha=1.0)) == 13
    assert pair_score(3, 10, ObpeConfig(alpha=0.0)) == 6
    assert pair_score(5, 0, ObpeConfig(alpha=0.5)) == 2.5
    assert pair_score(3, 3, ObpeConfig(alpha=0.5)) == 6.0


def test_config_validation():
    with pytest.raises(ValueError):
        ObpeConfig(alpha=1.5)
    with pytest.raises(ValueError):
        ObpeConfig(p=2.0)
    with pytest.raises(ValueError):
        ObpeConfig(p=float("nan"))
    with pytest.raises(ValueError):
        BilingualTables({}, {"a": 1})


def test_parse_exponent():
    assert parse_exponent("-inf") == NEG_INFINITY
    assert parse_exponent("0.5") == 0.5
    for bad in ("2", "inf", "nan", "x"):
        with pytest.raises(ValueError):
            parse_exponent(bad)


def test_overlap_beats_exclusive_frequency():
    # low has ("a","b") five times; ("c","d") appears three times in each language
    tables = BilingualTables(high={"cd": 3}, low={"ab": 5, "cd": 3})
    model = train_obpe(tables, ObpeConfig(alpha=0.5, p=NEG_INFINITY, vocab_size=7))
    assert model.merges[0] == ("c", "d")
    assert model.paradigm is Paradigm.OBPE


def test_shared_word_merges_before_exclusive_pairs():
    tables = BilingualTables(high={"xyz": 2, "pq": 4}, low={"xyz": 2, "rs": 4})
    model = train_obpe(tables, ObpeConfig(alpha=0.5, vocab_size=11))
    for left, right in model.merges[:2]:
        assert (left + right).replace("</w>", "") in {"xy", "yz", "xyz", "z", "y"}


def test_vocabulary_covers_both_alphabets():
    model = train_obpe(BilingualTables({"ab": 1}, {"cd": 1}), ObpeConfig(vocab_size=6))
    assert {"a", "b", "c", "d"} <= set(model.vocabulary)
    with pytest.raises(ValueError):
        train_obpe(BilingualTables({"ab": 1}, {"cd": 1}), ObpeConfig(vocab_size=5))


def _fixture_pairs(rng):
    return random_table(rng), random_table(rng)


def test_alpha_one_degenerates_to_bpe():
    rng = random.Random(2024)
    for _ in range(25):
        high, low = _fixture_pairs(rng)
        size = len({c for w in [*high, *low] for c in w}) + 2 + rng.randint(5, 80)
        obpe = train_obpe(BilingualTables(high, low), ObpeConfig(alpha=1.0, vocab_size=size))
        bpe = train_bpe(_merged(high, low), size)
        assert obpe.merges == bpe.merges


def _min_choice(counts):
    return min(counts, key=lambda pair: (-min(counts[pair]), -sum(counts[pair]), pair))


def test_alpha_zero_maximizes_minimum_oracle():
    rng = random.Random(77)
    for _ in range(25):
        high, low = _fixture_pairs(rng)
        size = len({c for w in [*high, *low] for c in w}) + 2 + rng.randint(5, 80)
        model = train_obpe(BilingualTables(high, low), ObpeConfig(alpha=0.0, p=NEG_INFINITY, vocab_size=size))
        assert list(model.merges) == brute_force_merges([low, high], size, _min_choice)


def test_general_score_matches_oracle():
    rng = random.Random(8)
    for alpha, p in [(0.5, NEG_INFINITY), (0.3, -1.0), (0.7, 0.0), (0.5, 0.5)]:

        def choose(counts):
            def key(pair):
                f_i, f_h = counts[pair]
                score = alpha * (f_i + f_h) + (1 - alpha) * 2 * power_mean(f_i, f_h, p)
                # scores equal to 12 significant digits count as ties
                return (-round_significant(score, 12), -(f_i + f_h), pair)

            return min(counts, key=key)

        for _ in range(5):
            high, low = _fixture_pairs(rng)
            size = len({c for w in [*high, *low] for c in w}) + 2 + 40
            model = train_obpe(BilingualTables(high, low), ObpeConfig(alpha, p, size))
            assert list(model.merges) == brute_force_merges([low, high], size, choose), (alpha, p)


def test_more_shared_tokens_than_bpe(tgt_path, src_path):
    tgt = build_word_table(read_conllu(tgt_path))
    src = build_word_table(read_conllu(src_path))
    obpe = train_obpe(BilingualTables(src, tgt), ObpeConfig(alpha=0.5, vocab_size=250))
    plain = train_obpe(BilingualTables(src, tgt), ObpeConfig(alpha=1.0, vocab_size=250))

    def shared(model):
        used = []
        for table in (src, tgt):
            toks = set()
            for w in table:
                toks.update(model.encode(w))
            used.append(toks)
        return len(used[0] & used[1])

    assert shared(obpe) >= shared(plain)


def test_model_is_valid_and_encodes_losslessly(tgt_path, src_path):
    tgt = build_word_table(read_conllu(tgt_path))
    src = build_word_table(read_conllu(src_path))
    for style in MarkerStyle:
        model = train_obpe(BilingualTables(src, tgt), ObpeConfig(vocab_size=300), style)
        model.check()
        for w in list(tgt)[:50]:
            assert "".join(model.encode(w)).replace(style.symbol, "") == w

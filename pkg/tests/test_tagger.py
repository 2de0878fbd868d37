import inspect
import random

import pytest

from subwordlab import tagger as tagger_module
from subwordlab.align import PAD, ProjectedSequence, greedy_align, project_first_subword, recover_token_predictions
from subwordlab.core import MarkerStyle
from subwordlab.tagger import TaggerModel, extract_features, sequence_features, tag, train_tagger

BOW = MarkerStyle.WORD_INITIAL_UNDERSCORE


def _project(forms, subwords, tags):
    a = greedy_align(forms, subwords, BOW)
    return a, project_first_subword(a, tags)


def _whole_words(forms, tags):
    return _project(forms, ["▁" + f for f in forms], tags)


def _accuracy(model, pairs):
    right = total = 0
    for a, seq in pairs:
        pred = recover_token_predictions(a, tag(model, a))
        gold = [lab for lab in seq.labels if lab != PAD]
        right += sum(p == g for p, g in zip(pred, gold))
        total += len(gold)
    return right / total


def test_single_sentence_is_memorized():
    pair = _project(
        ["talo", "on", "iso"],
        ["▁ta", "lo", "▁on", "▁i", "so"],
        ["NOUN", "AUX", "ADJ"],
    )
    model = train_tagger([pair[1]], epochs=5, seed=1)
    assert _accuracy(model, [pair]) == 1.0


def test_equal_seeds_give_identical_weights():
    pairs = [_whole_words(["a", "b", "c"], ["X", "Y", "X"]), _whole_words(["b", "a"], ["Y", "X"])]
    seqs = [s for _, s in pairs]
    one = train_tagger(seqs, epochs=4, seed=9)
    two = train_tagger(seqs, epochs=4, seed=9)
    assert one.weights == two.weights
    assert repr(one.weights) == repr(two.weights)
    assert one.tagset == ("X", "Y")
    assert one.epochs_trained == 4


def test_pad_rows_never_contribute():
    # position 2 is PAD and not adjacent to a labelled position, so only a PAD row differs
    def seq(middle):
        return ProjectedSequence(
            ("▁a", "b", middle, "d", "▁e"),
            ("NOUN", PAD, PAD, PAD, "VERB"),
            (0, 1, 2, 3, 0),
            (True, False, False, False, True),
        )

    one, two = seq("c"), seq("zzz")
    assert [f for f in sequence_features(one) if f] == [f for f in sequence_features(two) if f]
    assert train_tagger([one], epochs=3, seed=0).weights == train_tagger([two], epochs=3, seed=0).weights
    assert sum(f is not None for f in sequence_features(one)) == 2


def test_zero_weight_model_picks_first_tag():
    model = TaggerModel({}, ("ADJ", "NOUN", "VERB"))
    a, _ = _whole_words(["x", "y"], ["NOUN", "VERB"])
    assert tag(model, a) == ["ADJ", "ADJ"]


def test_output_length_equals_subword_count():
    a, seq = _project(["abc", "d"], ["▁a", "b", "c", "▁d"], ["NOUN", "VERB"])
    model = train_tagger([seq], epochs=2)
    out = tag(model, a)
    assert len(out) == 4
    assert out[1] == out[2] == PAD
    assert recover_token_predictions(a, out) == ["NOUN", "VERB"]


def test_pad_is_not_a_tag():
    with pytest.raises(ValueError):
        TaggerModel({}, ("NOUN", PAD))


def test_empty_training_set_is_rejected():
    with pytest.raises(ValueError):
        train_tagger([])
    _, seq = _whole_words(["a"], ["X"])
    with pytest.raises(ValueError):
        train_tagger([seq], epochs=0)


def test_feature_extraction_is_pure_and_bounded():
    subwords = ("▁kala", "ssa", "▁on")
    args = (subwords, (0, 1, 0), (True, False, True))
    first = extract_features(*args, 1)
    assert first == extract_features(*args, 1)
    assert "sw=ssa" in first and "prev=▁kala" in first and "next=▁on" in first
    assert "pre3=ssa" in first and "suf1=a" in first and "runpos=1" in first
    assert not any(f.startswith("pre4") for f in first)


def test_twenty_sentence_fixture_converges():
    lexicon = {
        "koira": "NOUN", "kissa": "NOUN", "talo": "NOUN", "puu": "NOUN",
        "juoksee": "VERB", "nukkuu": "VERB", "näkee": "VERB",
        "iso": "ADJ", "pieni": "ADJ", "punainen": "ADJ",
        "ja": "CCONJ", "tai": "CCONJ", "hän": "PRON", "se": "PRON",
    }
    words = sorted(lexicon)
    rng = random.Random(4)
    pairs = []
    for _ in range(20):
        forms = [rng.choice(words) for _ in range(rng.randint(3, 9))]
        subwords = []
        for f in forms:
            cut = rng.randint(1, len(f))
            subwords += ["▁" + f[:cut]] + ([f[cut:]] if cut < len(f) else [])
        pairs.append(_project(forms, subwords, [lexicon[f] for f in forms]))
    model = train_tagger([s for _, s in pairs], epochs=10, seed=42)
    assert _accuracy(model, pairs) >= 0.99


def test_tagger_inputs_carry_no_tokenizer_identity():
    # the tagger only ever sees ProjectedSequence/Alignment objects
    assert list(inspect.signature(train_tagger).parameters) == ["train", "epochs", "seed", "init"]
    source = inspect.getsource(tagger_module)
    for name in ("TokenizerModel", "Paradigm", "train_bpe", "train_unigram", "train_obpe"):
        assert name not in source


def test_init_continues_from_pretrained_weights():
    _, src = _whole_words(["a", "b"], ["X", "Y"])
    _, tgt = _whole_words(["c"], ["Z"])
    pre = train_tagger([src], epochs=2)
    model = train_tagger([tgt], epochs=2, init=pre)
    assert model.tagset == ("X", "Y", "Z")
    assert model.epochs_trained == 4

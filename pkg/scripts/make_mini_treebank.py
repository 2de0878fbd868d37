"""Generate the bundled synthetic mini-treebanks (a related language pair).

Both languages draw from partly shared stem lists but attach their own
suffixes, so they overlap lexically without being identical. Output is a
pure function of the seed.

    python3 scripts/make_mini_treebank.py --out src/subwordlab/data
"""

import argparse
import random
from pathlib import Path

SHARED = {
    "NOUN": ["talo", "kala", "vesi", "puu", "kivi", "joki", "metsä", "poro", "lumi", "tuli",
             "käsi", "silmä", "kirja", "kylä", "tie", "järvi", "sauna", "vuori", "niitty", "ranta"],
    "VERB": ["luke", "kirjoitta", "näke", "ui", "laula", "syö", "juokse", "kuule", "teke", "anta"],
    "ADJ": ["suuri", "pieni", "vanha", "uusi", "kylmä", "lämmin", "kaunis", "pitkä"],
}
PRIVATE = {
    "src": {
        "NOUN": ["kaupunki", "auto", "koulu", "pöytä", "ikkuna", "ovi"],
        "VERB": ["aja", "osta", "myy"],
        "ADJ": ["nopea", "hidas"],
    },
    "tgt": {
        "NOUN": ["guolli", "várri", "beana", "goahti", "čáhci", "sápmi"],
        "VERB": ["borra", "oahppa", "vuolge"],
        "ADJ": ["stuora", "unna"],
    },
}
SUFFIXES = {
    "src": {"NOUN": ["", "ssa", "lla", "t", "n"], "VERB": ["n", "t", "e", "mme", "vat"], "ADJ": ["", "t", "lla"]},
    "tgt": {"NOUN": ["", "s", "in", "t", "ii"], "VERB": ["an", "at", "á", "it", "e"], "ADJ": ["", "t", "s"]},
}
CLOSED = {
    "src": {
        "PRON": ["minä", "sinä", "hän", "me"], "DET": ["se", "tämä"], "ADP": ["kanssa", "luona"],
        "ADV": ["nyt", "aina", "tänään"], "CCONJ": ["ja", "mutta"], "AUX": ["ei", "on"],
        "PROPN": ["Aino", "Oulu"], "NUM": ["kaksi", "3"], "PUNCT": [".", "!", ","],
    },
    "tgt": {
        "PRON": ["mun", "don", "son", "mii"], "DET": ["dat", "dát"], "ADP": ["mielde", "luhtte"],
        "ADV": ["dál", "álo", "odne"], "CCONJ": ["ja", "muhto"], "AUX": ["ii", "lea"],
        "PROPN": ["Áile", "Anár"], "NUM": ["guokte", "3"], "PUNCT": [".", "!", ","],
    },
}


def _open(lang, tag, rng):
    stems = SHARED[tag] + PRIVATE[lang][tag]
    return rng.choice(stems) + rng.choice(SUFFIXES[lang][tag])


def _word(lang, tag, rng):
    if tag in SHARED:
        return _open(lang, tag, rng)
    return rng.choice(CLOSED[lang][tag])


def _clause(rng):
    tags = []
    if rng.random() < 0.35:
        tags.append("PRON")
    else:
        if rng.random() < 0.3:
            tags.append("DET")
        if rng.random() < 0.15:
            tags.append("NUM")
        if rng.random() < 0.4:
            tags.append("ADJ")
        tags.append("PROPN" if rng.random() < 0.1 else "NOUN")
    if rng.random() < 0.15:
        tags.append("AUX")
    tags.append("VERB")
    if rng.random() < 0.5:
        if rng.random() < 0.4:
            tags.append("ADJ")
        tags.append("NOUN")
    if rng.random() < 0.3:
        tags += ["NOUN", "ADP"]
    if rng.random() < 0.3:
        tags.append("ADV")
    return tags


def _sentence_tags(rng):
    tags = _clause(rng)
    if rng.random() < 0.25:
        tags += ["CCONJ"] + _clause(rng)
    tags.append("PUNCT")
    return tags


def generate(lang: str, n: int, seed: int) -> str:
    rng = random.Random(f"{lang}:{seed}")
    out = [f"# generated synthetic treebank, lang={lang}, seed={seed}"]
    for s in range(1, n + 1):
        tags = _sentence_tags(rng)
        forms = [_word(lang, t, rng) for t in tags]
        if forms[0][0].isalpha():
            forms[0] = forms[0][0].upper() + forms[0][1:]
        out.append(f"# sent_id = {lang}-{s:04d}")
        out.append(f"# text = {' '.join(forms)}")
        token_id = 1
        for i, (form, tag) in enumerate(zip(forms, tags)):
            if i == 1 and s % 17 == 0:
                # a multiword range line, as in real treebanks; readers must skip it
                out.append(f"{token_id}-{token_id + 1}\t{form}{forms[i + 1]}\t_\t_\t_\t_\t_\t_\t_\t_")
            head = 0 if i == 0 else 1
            deprel = "root" if i == 0 else "dep"
            out.append(f"{token_id}\t{form}\t{form.lower()}\t{tag}\t_\t_\t{head}\t{deprel}\t_\t_")
            token_id += 1
        out.append("")
    return "\n".join(out) + "\n"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="src/subwordlab/data")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--tgt-size", type=int, default=200)
    parser.add_argument("--src-size", type=int, default=300)
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for lang, n in (("tgt", args.tgt_size), ("src", args.src_size)):
        path = out / f"mini_{lang}.conllu"
        path.write_text(generate(lang, n, args.seed), encoding="utf-8")
        print(f"wrote {path} ({n} sentences)")


if __name__ == "__main__":
    main()

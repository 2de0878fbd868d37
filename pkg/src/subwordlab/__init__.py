"""Subword tokenizers (BPE, Unigram LM, Overlap BPE) and a POS-tagging harness to compare them."""

from .core import MarkerStyle, Paradigm, TokenizerModel, load_model, read_model_file, save_model, write_model_file
from .corpus import Sentence, Token, read_conllu

__version__ = "0.1.0"

__all__ = [
    "MarkerStyle",
    "Paradigm",
    "Sentence",
    "Token",
    "TokenizerModel",
    "load_model",
    "read_conllu",
    "read_model_file",
    "save_model",
    "write_model_file",
]


def data_path(name: str):
    """Path to a bundled data file, e.g. ``data_path("mini_tgt.conllu")``."""
    from importlib.resources import files

    return files("subwordlab") / "data" / name

"""Gap-filling evaluation toolkit for machine-translation gisting.

Builds cloze problems from reference translations (entropy-driven or
random gap placement), assigns them to informants under balanced
experiment designs, serves them over HTTP, and scores/analyzes the
collected responses alongside reading-comprehension questionnaire marks.
"""

__version__ = "0.1.0"

from .corpus import (
    DocumentBundle,
    Question,
    QType,
    SentenceRef,
    Token,
    TokenKind,
    load_bundle,
    dump_bundle,
    normalize_answer,
    tokenize,
)
from .ngram_lm import NGramModel, Vocabulary, GapPosterior, train

__all__ = [
    "DocumentBundle",
    "GapPosterior",
    "NGramModel",
    "QType",
    "Question",
    "SentenceRef",
    "Token",
    "TokenKind",
    "Vocabulary",
    "dump_bundle",
    "load_bundle",
    "normalize_answer",
    "tokenize",
    "train",
]

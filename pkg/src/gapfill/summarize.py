"""Extractive selection of the single problem sentence per document.

Graph ranking over sentences: edge weight between two sentences is the
number of shared non-stopword lower-cased word types divided by
log|Si| + log|Sj| (token counts), zero when that denominator is zero.
Scores come from damped power iteration; the top sentence (earliest
index on ties) becomes the gap-filling problem sentence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import SentenceRef, TokenKind
from .errors import EmptyDocument

DAMPING = 0.85
TOLERANCE = 1e-6
MAX_ITERATIONS = 100


@dataclass(frozen=True)
class SentenceScore:
    index: int
    score: float


def _content_types(sentence: SentenceRef) -> frozenset[str]:
    return frozenset(
        t.surface.lower()
        for t in sentence.tokens
        if t.kind == TokenKind.WORD and not t.is_stopword
    )


def similarity_matrix(sentences: list[SentenceRef]) -> np.ndarray:
    n = len(sentences)
    types = [_content_types(s) for s in sentences]
    lengths = np.array([len(s.tokens) for s in sentences], dtype=np.float64)
    logs = np.log(lengths)
    w = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            denom = logs[i] + logs[j]
            if denom <= 0.0:
                continue
            shared = len(types[i] & types[j])
            if shared:
                w[i, j] = w[j, i] = shared / denom
    return w


def rank_sentences(sentences) -> list[SentenceScore]:
    """Damped power-iteration scores for every sentence."""
    sentences = list(sentences)
    if not sentences:
        raise EmptyDocument("no sentences to rank")
    w = similarity_matrix(sentences)
    n = len(sentences)
    out_strength = w.sum(axis=1)
    # transition matrix column-normalized by out-strength; isolated
    # sentences contribute nothing
    with np.errstate(invalid="ignore", divide="ignore"):
        trans = np.where(out_strength[:, None] > 0.0, w / out_strength[:, None], 0.0)
    scores = np.ones(n, dtype=np.float64)
    for _ in range(MAX_ITERATIONS):
        updated = (1.0 - DAMPING) + DAMPING * (trans.T @ scores)
        if np.max(np.abs(updated - scores)) <= TOLERANCE:
            scores = updated
            break
        scores = updated
    return [SentenceScore(i, float(s)) for i, s in enumerate(scores)]


def key_sentence(sentences) -> int:
    """Index of the top-ranked sentence; earliest index wins ties."""
    ranked = rank_sentences(sentences)
    best = 0
    for cand in ranked[1:]:
        if cand.score > ranked[best].score:
            best = cand.index
    return best

"""Scripted informant that fills gaps with language-model argmax choices.

Used to smoke-test a deployment end to end and to produce the synthetic
study in the acceptance suite: with an MT hint the candidate set narrows
to the hint sentence's words, without one the argmax runs over the whole
vocabulary, which reproduces the expected hinted-vs-unhinted gap in
success rates directionally.
"""

from __future__ import annotations

import numpy as np

from .corpus import TokenKind, tokenize
from .experiment import GapProblem
from .ngram_lm import BOS_ID, EOS_ID, UNK_ID, NGramModel


def hint_sentence_text(problem: GapProblem) -> str | None:
    if problem.hint.kind == "sentence":
        return problem.hint.text
    if problem.hint.kind == "document":
        return problem.hint.sentences[problem.hint.highlight_index]
    return None


def argmax_fills(model: NGramModel, problem: GapProblem) -> dict[int, str]:
    """One fill per gap: the most probable candidate under the model.

    With a hint, candidates are restricted to the hint sentence's word
    tokens that the model knows; if none are known the full vocabulary
    is used.  Ties resolve to the lowest token id.
    """
    surfaces = [t.surface for t in problem.tokens]
    hint_text = hint_sentence_text(problem)
    allowed: set[int] | None = None
    if hint_text is not None:
        hint_ids = {
            model.vocab.lookup(t.surface)
            for t in tokenize(hint_text)
            if t.kind == TokenKind.WORD
        }
        hint_ids -= {UNK_ID, BOS_ID, EOS_ID}
        if hint_ids:
            allowed = hint_ids

    fills: dict[int, str] = {}
    for pos in problem.gaps.positions:
        post = model.gap_posterior(surfaces, pos)
        if allowed is None:
            best = post.argmax_id()
        else:
            mask = np.isin(post.token_ids, sorted(allowed))
            ids = post.token_ids[mask]
            probs = post.probs[mask]
            best = int(ids[int(np.argmax(probs))]) if len(ids) else post.argmax_id()
        fills[pos] = model.vocab.surface_of(best)
    return fills


def run_session(model: NGramModel, store, informant_id: str) -> int:
    """Complete one informant's whole session against a SessionStore."""
    submitted = 0
    while True:
        payload = store.next_problem(informant_id)
        if payload["status"] == "done":
            return submitted
        problem = store.problems[payload["problem_id"]]
        store.submit(informant_id, problem.problem_id, argmax_fills(model, problem))
        submitted += 1

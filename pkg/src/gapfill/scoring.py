"""Scoring of gap-filling responses and RCQ marks.

Gap fills count as correct on a normalized exact match or, when a
synonym table is supplied, on a directed (expected -> alternative) table
hit.  RCQ marks carry one of five categories with fixed credits; the
document score is the weighted mean of per-type mean credits, normalized
by the summed weights of the question types actually present so the
score stays in [0, 1] under every weighting scheme.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum

from .corpus import QType, normalize_answer
from .errors import NoApplicableQuestions, ProblemMismatch, ValidationError
from .experiment import GapProblem


@dataclass(frozen=True)
class ResponseRecord:
    problem_id: str
    informant_id: str
    fills: dict[int, str]
    submitted_at: str = ""  # ISO-8601; blank for synthetic/imported data
    elapsed_ms: int | None = None


@dataclass(frozen=True)
class SynonymTable:
    """Directed (expected, alternative) pairs, both normalized."""

    entries: frozenset[tuple[str, str]]

    @classmethod
    def from_pairs(cls, pairs) -> "SynonymTable":
        entries = set()
        for expected, alternative in pairs:
            expected = normalize_answer(expected)
            alternative = normalize_answer(alternative)
            if expected == alternative:
                raise ValidationError(f"synonym pair maps {expected!r} to itself")
            entries.add((expected, alternative))
        return cls(entries=frozenset(entries))

    @classmethod
    def from_tsv(cls, text: str) -> "SynonymTable":
        pairs = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise ValidationError(f"synonym line {lineno}: expected two tab-separated fields")
            pairs.append((parts[0], parts[1]))
        return cls.from_pairs(pairs)

    def to_tsv(self) -> str:
        return "".join(f"{e}\t{a}\n" for e, a in sorted(self.entries))

    def allows(self, expected: str, fill: str) -> bool:
        return (expected, fill) in self.entries


def gap_correct(
    expected: str, fill: str | None, synonyms: SynonymTable | None = None
) -> bool:
    if fill is None:
        return False
    expected_n = normalize_answer(expected)
    fill_n = normalize_answer(fill)
    if expected_n == fill_n and fill_n != "":
        return True
    return synonyms is not None and synonyms.allows(expected_n, fill_n)


def score_gf(
    problem: GapProblem,
    response: ResponseRecord,
    synonyms: SynonymTable | None = None,
) -> float:
    """Ratio of correctly filled gaps; missing fills count as wrong."""
    if response.problem_id != problem.problem_id:
        raise ProblemMismatch(
            f"response for {response.problem_id!r} scored against {problem.problem_id!r}"
        )
    total = len(problem.gaps.positions)
    correct = sum(
        1
        for pos in problem.gaps.positions
        if gap_correct(problem.answer_key[pos], response.fills.get(pos), synonyms)
    )
    return correct / total


def extract_synonym_candidates(
    problems, responses, min_freq: int = 2
) -> list[tuple[str, str, int]]:
    """(expected, fill, count) pairs for manual adjudication.

    Counts every normalized non-matching, non-blank fill across all
    informants; pairs below min_freq are dropped.  Output is sorted by
    count descending, then alphabetically, ready for review into a
    synonym table.
    """
    by_id = {p.problem_id: p for p in problems}
    counts: Counter = Counter()
    for response in responses:
        problem = by_id.get(response.problem_id)
        if problem is None:
            continue
        for pos in problem.gaps.positions:
            fill = response.fills.get(pos)
            if fill is None:
                continue
            expected_n = normalize_answer(problem.answer_key[pos])
            fill_n = normalize_answer(fill)
            if fill_n and fill_n != expected_n:
                counts[(expected_n, fill_n)] += 1
    return sorted(
        ((e, a, c) for (e, a), c in counts.items() if c >= min_freq),
        key=lambda item: (-item[2], item[0], item[1]),
    )


class MarkCategory(str, Enum):
    CORRECT = "correct"
    EXTRA_CONCEPT = "extra_concept"
    MISSING_CONCEPT = "missing_concept"
    BLEND = "blend"
    INCORRECT = "incorrect"


CREDIT = {
    MarkCategory.CORRECT: 1.0,
    MarkCategory.EXTRA_CONCEPT: 0.75,
    MarkCategory.MISSING_CONCEPT: 0.5,
    MarkCategory.BLEND: 0.25,
    MarkCategory.INCORRECT: 0.0,
}


@dataclass(frozen=True)
class RcqMarks:
    """Per-question (type, category) marks for one document/condition."""

    marks: tuple[tuple[QType, MarkCategory], ...]

    def credits_by_type(self) -> dict[QType, list[float]]:
        out: dict[QType, list[float]] = defaultdict(list)
        for qtype, category in self.marks:
            out[qtype].append(CREDIT[category])
        return dict(out)


@dataclass(frozen=True)
class WeightScheme:
    name: str
    alpha: float  # literal
    beta: float  # reorganization
    gamma: float  # inference

    def weight_of(self, qtype: QType) -> float:
        return {
            QType.LITERAL: self.alpha,
            QType.REORGANIZATION: self.beta,
            QType.INFERENCE: self.gamma,
        }[qtype]


SIMPLE = WeightScheme("simple", 1.0, 1.0, 1.0)
WEIGHTED = WeightScheme("weighted", 1.0, 2.0, 3.0)
LITERAL = WeightScheme("literal", 1.0, 0.0, 0.0)

SCHEMES = {s.name: s for s in (SIMPLE, WEIGHTED, LITERAL)}


def rcq_score(marks: RcqMarks, scheme: WeightScheme) -> float:
    """Weighted mean of per-type mean credits over the types present.

    Normalizing by the summed weights of present nonzero-weight types
    keeps the score in [0, 1]; absent types contribute nothing.
    """
    by_type = marks.credits_by_type()
    numerator = 0.0
    denominator = 0.0
    for qtype, credits in by_type.items():
        w = scheme.weight_of(qtype)
        if w == 0.0:
            continue
        numerator += w * (sum(credits) / len(credits))
        denominator += w
    if denominator == 0.0:
        raise NoApplicableQuestions(
            f"no questions with nonzero weight under scheme {scheme.name!r}"
        )
    return numerator / denominator

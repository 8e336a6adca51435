"""Gap punching under the eligibility and separation constraints.

Gaps land only on non-stopword word tokens, and two gaps must always be
separated by at least one other non-stopword word token.  Candidates are
taken in order of decreasing gap entropy (ties to the lower index) or in
seeded-shuffle order, and accepted greedily while the separation
invariant holds.  With a fixed candidate order this greedy construction
makes lower-density gap sets prefixes of higher-density ones, which is
what produces the nesting of 10% problems inside 20% problems.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum

from .corpus import Token, TokenKind
from .errors import MissingModel, NoEligiblePositions, ValidationError
from .ngram_lm import NGramModel

GAP_MARKER = "________"  # fixed 8-underscore marker in rendered problems


class StrategyKind(str, Enum):
    ENTROPY = "entropy"
    RANDOM = "random"


@dataclass(frozen=True)
class GapStrategy:
    kind: StrategyKind
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind == StrategyKind.RANDOM and self.seed is None:
            raise ValidationError("random gap strategy requires a seed")


@dataclass(frozen=True)
class GapSpec:
    positions: tuple[int, ...]
    density: float
    strategy: GapStrategy
    exhausted: bool = False  # fewer gaps than the density asked for

    def __post_init__(self) -> None:
        if not self.positions:
            raise ValidationError("a gap spec needs at least one gap")
        if list(self.positions) != sorted(set(self.positions)):
            raise ValidationError("gap positions must be sorted and unique")
        if not 0.0 < self.density < 1.0:
            raise ValidationError("density must lie in (0, 1)")


def _eligible(token: Token) -> bool:
    return token.kind == TokenKind.WORD and not token.is_stopword


def eligible_positions(tokens) -> list[int]:
    """Indices where a gap may be punched: non-stopword word tokens."""
    return [i for i, t in enumerate(tokens) if _eligible(t)]


def separation_holds(tokens, positions) -> bool:
    """True iff every pair of consecutive gaps has an eligible token between."""
    ordered = sorted(positions)
    for a, b in zip(ordered, ordered[1:]):
        if not any(_eligible(tokens[i]) for i in range(a + 1, b)):
            return False
    return True


def target_gap_count(tokens, density: float) -> int:
    """Half-up rounding of density x word-token count, floor of one gap."""
    n_words = sum(1 for t in tokens if t.kind == TokenKind.WORD)
    return max(1, math.floor(density * n_words + 0.5))


def _candidate_order(tokens, eligible, strategy, model):
    if strategy.kind == StrategyKind.ENTROPY:
        if model is None:
            raise MissingModel("entropy strategy requires a language model")
        surfaces = [t.surface for t in tokens]
        entropies = {k: model.gap_entropy(surfaces, k) for k in eligible}
        return sorted(eligible, key=lambda k: (-entropies[k], k))
    rng = random.Random(strategy.seed)
    order = list(eligible)
    rng.shuffle(order)
    return order


def punch_gaps(
    tokens,
    density: float,
    strategy: GapStrategy,
    model: NGramModel | None = None,
) -> GapSpec:
    """Select gap positions for one problem sentence.

    Greedy over the strategy's candidate order; a candidate is accepted
    only if an eligible separator token remains between it and each of
    its accepted neighbours.  Stops at the density target, or earlier
    with exhausted=True when no further candidate fits.
    """
    tokens = list(tokens)
    if not 0.0 < density < 1.0:
        raise ValidationError("density must lie in (0, 1)")
    eligible = eligible_positions(tokens)
    if not eligible:
        raise NoEligiblePositions("sentence has only stop-words and punctuation")

    target = target_gap_count(tokens, density)
    accepted: list[int] = []
    for cand in _candidate_order(tokens, eligible, strategy, model):
        if len(accepted) >= target:
            break
        below = max((g for g in accepted if g < cand), default=None)
        above = min((g for g in accepted if g > cand), default=None)
        ok = True
        if below is not None:
            ok = any(_eligible(tokens[i]) for i in range(below + 1, cand))
        if ok and above is not None:
            ok = any(_eligible(tokens[i]) for i in range(cand + 1, above))
        if ok:
            accepted.append(cand)

    return GapSpec(
        positions=tuple(sorted(accepted)),
        density=density,
        strategy=strategy,
        exhausted=len(accepted) < target,
    )


def render_problem(tokens, spec: GapSpec) -> str:
    """Problem text: gap positions become the marker, tokens space-joined."""
    tokens = list(tokens)
    for pos in spec.positions:
        if not 0 <= pos < len(tokens):
            raise ValidationError(f"gap position {pos} outside sentence")
        if not _eligible(tokens[pos]):
            raise ValidationError(f"gap position {pos} is not an eligible token")
    gapped = set(spec.positions)
    return " ".join(
        GAP_MARKER if i in gapped else t.surface for i, t in enumerate(tokens)
    )

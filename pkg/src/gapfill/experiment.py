"""Configuration matrix, balanced assignment, and problem generation.

With S systems the matrix holds S x {sentence-only, full-document} x
{10%, 20%} hinted configurations plus 4 hint-free ones ({entropy,
random} x {10%, 20%}): 20 cells for the standard four-system setup.

Assignment is a cyclic construction over informant index i and document
index j: config(i, j) = (pi(i) + pj(j)) mod C with optional seeded
permutations pi/pj.  When C divides I this gives every (document,
configuration) cell exactly I/C informants, and every informant covers
every configuration as soon as D >= C.

Problem content is a function of (document, configuration) only: the
three informants sharing a cell see the identical problem, and for a
fixed document every configuration shares the key sentence while equal
densities under the entropy strategy share gap positions.  Hints differ,
problems do not, which is what makes cross-system comparisons paired.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from enum import Enum

from .corpus import DocumentBundle, SentenceRef, Token, classify
from .errors import (
    IndivisibleDesign,
    InsufficientDocuments,
    MissingModel,
    MissingSystemOutput,
    ValidationError,
)
from .gaps import GapSpec, GapStrategy, StrategyKind, punch_gaps, render_problem
from .ngram_lm import NGramModel
from .summarize import key_sentence

DENSITIES = (0.10, 0.20)

_PLAN_FORMAT = "gapfill-plan"
_PLAN_VERSION = 1


class Modality(str, Enum):
    SENTENCE_ONLY = "sentence_only"
    FULL_DOCUMENT = "full_document"


@dataclass(frozen=True)
class Configuration:
    """One experimental cell: an MT hint source or a no-hint strategy."""

    density: float
    system: str | None = None
    modality: Modality | None = None
    strategy: StrategyKind = StrategyKind.ENTROPY

    def __post_init__(self) -> None:
        if self.system is not None:
            if self.modality is None:
                raise ValidationError("MT configuration needs a modality")
            if self.strategy != StrategyKind.ENTROPY:
                raise ValidationError("MT configurations use entropy gap placement")
        elif self.modality is not None:
            raise ValidationError("modality only applies to MT configurations")

    @property
    def has_hint(self) -> bool:
        return self.system is not None

    @property
    def label(self) -> str:
        density = f"{self.density:.2f}"
        if self.system is None:
            return f"no_hint:{self.strategy.value}:{density}"
        return f"{self.system}:{self.modality.value}:{density}"

    def to_dict(self) -> dict:
        return {
            "density": self.density,
            "system": self.system,
            "modality": self.modality.value if self.modality else None,
            "strategy": self.strategy.value,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Configuration":
        return cls(
            density=obj["density"],
            system=obj["system"],
            modality=Modality(obj["modality"]) if obj["modality"] else None,
            strategy=StrategyKind(obj["strategy"]),
        )


def build_config_matrix(system_ids, densities=DENSITIES) -> list[Configuration]:
    """Fixed order: per system (as given) sentence-only then full-document,
    each at every density; then no-hint entropy, then no-hint random."""
    systems = list(system_ids)
    if not systems:
        raise ValidationError("at least one MT system required")
    if len(set(systems)) != len(systems):
        raise ValidationError("duplicate system ids")
    configs = [
        Configuration(density=d, system=sys, modality=mod)
        for sys in systems
        for mod in (Modality.SENTENCE_ONLY, Modality.FULL_DOCUMENT)
        for d in densities
    ]
    configs += [
        Configuration(density=d, strategy=kind)
        for kind in (StrategyKind.ENTROPY, StrategyKind.RANDOM)
        for d in densities
    ]
    return configs


def _derived_seed(*parts) -> int:
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class ExperimentPlan:
    informants: list[str]
    documents: list[str]
    configs: list[Configuration]
    assignment: dict[tuple[str, str], int]
    seed: int

    def config_for(self, informant: str, document: str) -> Configuration:
        return self.configs[self.assignment[(informant, document)]]

    def verify(self) -> None:
        """Recheck the balance invariants by direct counting."""
        I, D, C = len(self.informants), len(self.documents), len(self.configs)
        expected_keys = {(i, d) for i in self.informants for d in self.documents}
        if set(self.assignment) != expected_keys:
            raise ValidationError("assignment must cover informants x documents exactly")
        per_cell: dict[tuple[str, int], int] = {}
        for (informant, doc), cfg in self.assignment.items():
            per_cell[(doc, cfg)] = per_cell.get((doc, cfg), 0) + 1
        share = I // C
        for doc in self.documents:
            for cfg in range(C):
                if per_cell.get((doc, cfg), 0) != share:
                    raise ValidationError(
                        f"document {doc} config {cfg}: expected {share} informants"
                    )
        if D >= C:
            for informant in self.informants:
                covered = {self.assignment[(informant, d)] for d in self.documents}
                if len(covered) != C:
                    raise ValidationError(f"informant {informant} misses configurations")


def assign(
    informants,
    documents,
    configs,
    seed: int | None = None,
    require_full_coverage: bool = True,
) -> ExperimentPlan:
    """Balanced cyclic assignment of configurations to (informant, document).

    config(i, j) = (i + j) mod C, composed with seeded permutations of
    the informant and document indices when a seed is given.  Requires
    the configuration count to divide the informant count.  Full
    per-informant configuration coverage additionally needs at least as
    many documents as configurations; pass require_full_coverage=False to
    run reduced designs where informants cover only D of the C cells.
    """
    informants = list(informants)
    documents = list(documents)
    configs = list(configs)
    I, D, C = len(informants), len(documents), len(configs)
    if C == 0 or I == 0 or D == 0:
        raise ValidationError("informants, documents, and configs must be non-empty")
    if I % C != 0:
        raise IndivisibleDesign(f"{C} configurations do not divide {I} informants")
    if require_full_coverage and D < C:
        raise InsufficientDocuments(
            f"{D} documents cannot cover {C} configurations per informant"
        )

    pi = list(range(I))
    pj = list(range(D))
    if seed is not None:
        random.Random(_derived_seed(seed, "informants")).shuffle(pi)
        random.Random(_derived_seed(seed, "documents")).shuffle(pj)
    seed = 0 if seed is None else seed
    assignment = {
        (informant, doc): (pi[i] + pj[j]) % C
        for i, informant in enumerate(informants)
        for j, doc in enumerate(documents)
    }
    plan = ExperimentPlan(
        informants=informants,
        documents=documents,
        configs=configs,
        assignment=assignment,
        seed=seed,
    )
    plan.verify()
    return plan


@dataclass(frozen=True)
class HintPayload:
    kind: str  # "none" | "sentence" | "document"
    text: str | None = None
    sentences: tuple[str, ...] | None = None
    highlight_index: int | None = None

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "sentence":
            out["text"] = self.text
        elif self.kind == "document":
            out["sentences"] = list(self.sentences or ())
            out["highlight_index"] = self.highlight_index
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "HintPayload":
        kind = obj["kind"]
        if kind == "sentence":
            return cls(kind=kind, text=obj["text"])
        if kind == "document":
            return cls(
                kind=kind,
                sentences=tuple(obj["sentences"]),
                highlight_index=obj["highlight_index"],
            )
        return cls(kind="none")


@dataclass(frozen=True)
class GapProblem:
    problem_id: str
    doc_id: str
    informant_id: str
    config: Configuration
    key_sentence_index: int
    tokens: tuple[Token, ...]
    gaps: GapSpec
    answer_key: dict[int, str]
    hint: HintPayload

    def __post_init__(self) -> None:
        if set(self.answer_key) != set(self.gaps.positions):
            raise ValidationError("answer key must cover exactly the gap positions")
        if self.hint.kind == "document" and self.hint.highlight_index != self.key_sentence_index:
            raise ValidationError("document hint must highlight the key sentence")

    def rendered(self) -> str:
        return render_problem(self.tokens, self.gaps)


def problem_id_for(informant_id: str, doc_id: str) -> str:
    # one problem per (informant, document) makes this pair a unique key
    return f"{informant_id}__{doc_id}"


def _hint_for(
    bundle: DocumentBundle, config: Configuration, key_idx: int
) -> HintPayload:
    if not config.has_hint:
        return HintPayload(kind="none")
    if config.system not in bundle.mt_outputs:
        raise MissingSystemOutput(f"{bundle.doc_id}: no MT output for {config.system!r}")
    mt = bundle.mt_outputs[config.system]
    if key_idx >= len(mt):
        raise MissingSystemOutput(
            f"{bundle.doc_id}: {config.system!r} output has no sentence {key_idx}"
        )
    if config.modality == Modality.SENTENCE_ONLY:
        return HintPayload(kind="sentence", text=mt[key_idx].raw)
    return HintPayload(
        kind="document",
        sentences=tuple(s.raw for s in mt),
        highlight_index=key_idx,
    )


def generate_problems(
    bundles: dict[str, DocumentBundle],
    plan: ExperimentPlan,
    model: NGramModel | None,
) -> list[GapProblem]:
    """Concrete problems for every (informant, document) cell of the plan.

    Key sentences are computed once per document and gap specs once per
    (document, density, strategy), so informants sharing a cell get the
    identical problem.
    """
    missing = [d for d in plan.documents if d not in bundles]
    if missing:
        raise ValidationError(f"plan references unknown documents: {missing}")
    if model is None and any(
        c.strategy == StrategyKind.ENTROPY for c in plan.configs
    ):
        raise MissingModel("entropy configurations require a language model")

    key_idx: dict[str, int] = {}
    key_ref: dict[str, SentenceRef] = {}
    for doc in plan.documents:
        bundle = bundles[doc]
        key_idx[doc] = key_sentence(bundle.reference)
        key_ref[doc] = bundle.reference[key_idx[doc]]

    gap_cache: dict[tuple[str, float, StrategyKind], GapSpec] = {}

    def gaps_for(doc: str, config: Configuration) -> GapSpec:
        cache_key = (doc, config.density, config.strategy)
        if cache_key not in gap_cache:
            if config.strategy == StrategyKind.RANDOM:
                strategy = GapStrategy(
                    StrategyKind.RANDOM,
                    seed=_derived_seed(plan.seed, "gaps", doc, config.density),
                )
            else:
                strategy = GapStrategy(StrategyKind.ENTROPY)
            gap_cache[cache_key] = punch_gaps(
                key_ref[doc].tokens, config.density, strategy, model=model
            )
        return gap_cache[cache_key]

    problems = []
    for informant in plan.informants:
        for doc in plan.documents:
            config = plan.config_for(informant, doc)
            bundle = bundles[doc]
            tokens = key_ref[doc].tokens
            spec = gaps_for(doc, config)
            problems.append(
                GapProblem(
                    problem_id=problem_id_for(informant, doc),
                    doc_id=doc,
                    informant_id=informant,
                    config=config,
                    key_sentence_index=key_idx[doc],
                    tokens=tokens,
                    gaps=spec,
                    answer_key={p: tokens[p].surface for p in spec.positions},
                    hint=_hint_for(bundle, config, key_idx[doc]),
                )
            )
    return problems


# -- plan file (problems included) -------------------------------------


def _problem_to_dict(p: GapProblem) -> dict:
    return {
        "problem_id": p.problem_id,
        "doc_id": p.doc_id,
        "informant_id": p.informant_id,
        "config": p.config.to_dict(),
        "key_sentence_index": p.key_sentence_index,
        "tokens": [t.surface for t in p.tokens],
        "gaps": {
            "positions": list(p.gaps.positions),
            "density": p.gaps.density,
            "strategy": {
                "kind": p.gaps.strategy.kind.value,
                "seed": p.gaps.strategy.seed,
            },
            "exhausted": p.gaps.exhausted,
        },
        "answer_key": {str(k): v for k, v in p.answer_key.items()},
        "hint": p.hint.to_dict(),
    }


def _problem_from_dict(obj: dict) -> GapProblem:
    gaps_obj = obj["gaps"]
    spec = GapSpec(
        positions=tuple(gaps_obj["positions"]),
        density=gaps_obj["density"],
        strategy=GapStrategy(
            StrategyKind(gaps_obj["strategy"]["kind"]),
            seed=gaps_obj["strategy"]["seed"],
        ),
        exhausted=gaps_obj["exhausted"],
    )
    return GapProblem(
        problem_id=obj["problem_id"],
        doc_id=obj["doc_id"],
        informant_id=obj["informant_id"],
        config=Configuration.from_dict(obj["config"]),
        key_sentence_index=obj["key_sentence_index"],
        tokens=tuple(classify(s) for s in obj["tokens"]),
        gaps=spec,
        answer_key={int(k): v for k, v in obj["answer_key"].items()},
        hint=HintPayload.from_dict(obj["hint"]),
    )


def save_plan(plan: ExperimentPlan, problems: list[GapProblem], path, manifest=None) -> None:
    obj = {
        "format": _PLAN_FORMAT,
        "version": _PLAN_VERSION,
        "manifest": dict(manifest or {}, seed=plan.seed),
        "informants": plan.informants,
        "documents": plan.documents,
        "configs": [c.to_dict() for c in plan.configs],
        "assignment": [
            {"informant": i, "document": d, "config": cfg}
            for (i, d), cfg in sorted(plan.assignment.items())
        ],
        "problems": [_problem_to_dict(p) for p in problems],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, ensure_ascii=False, sort_keys=True, indent=1)
        f.write("\n")


def load_plan(path) -> tuple[ExperimentPlan, list[GapProblem], dict]:
    with open(path, "r", encoding="utf-8") as f:
        obj = json.load(f)
    if obj.get("format") != _PLAN_FORMAT:
        raise ValidationError(f"not a {_PLAN_FORMAT} file: {path}")
    if obj.get("version") != _PLAN_VERSION:
        raise ValidationError(f"unsupported plan version {obj.get('version')}")
    plan = ExperimentPlan(
        informants=list(obj["informants"]),
        documents=list(obj["documents"]),
        configs=[Configuration.from_dict(c) for c in obj["configs"]],
        assignment={
            (row["informant"], row["document"]): row["config"]
            for row in obj["assignment"]
        },
        seed=obj["manifest"]["seed"],
    )
    problems = [_problem_from_dict(p) for p in obj["problems"]]
    return plan, problems, obj["manifest"]

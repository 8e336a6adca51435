"""Statistical toolkit: two-sample Kolmogorov-Smirnov, Pearson correlation,
through-origin slope fits, five-number summaries, and report aggregation.

Score distributions here are far from normal, so between-sample
significance uses the distribution-agnostic two-sample KS test.  The
default p-value is the asymptotic Kolmogorov series with the standard
small-sample effective-size correction; an exact permutation method is
available as an oracle (full enumeration of splits while feasible,
seeded Monte-Carlo beyond that).
"""

from __future__ import annotations

import itertools
import math
import random
from collections import defaultdict
from dataclasses import dataclass

from .errors import (
    DegenerateX,
    EmptySample,
    LengthMismatch,
    ValidationError,
    ZeroVariance,
)
from .experiment import GapProblem
from .scoring import ResponseRecord, SynonymTable, score_gf

_SERIES_TOL = 1e-12
_EXACT_SPLIT_LIMIT = 200_000
_MC_SAMPLES = 100_000


@dataclass(frozen=True)
class KsResult:
    D: float
    p_value: float
    n_a: int
    n_b: int
    method: str  # "asymptotic" | "permutation"

    def to_dict(self) -> dict:
        return {
            "D": self.D,
            "p_value": self.p_value,
            "n_a": self.n_a,
            "n_b": self.n_b,
            "method": self.method,
        }


def _ks_distance(values: list[float], from_a: list[bool], n_a: int, n_b: int) -> float:
    """Sup-norm ECDF distance over a pooled sample sorted ascending.

    Walks runs of tied values so the distance is only read at distinct
    points of the pooled support.
    """
    best = 0.0
    acc_a = 0.0
    acc_b = 0.0
    i = 0
    n = len(values)
    step_a = 1.0 / n_a
    step_b = 1.0 / n_b
    while i < n:
        j = i
        while j < n and values[j] == values[i]:
            if from_a[j]:
                acc_a += step_a
            else:
                acc_b += step_b
            j += 1
        diff = abs(acc_a - acc_b)
        if diff > best:
            best = diff
        i = j
    return best


def kolmogorov_sf(lam: float) -> float:
    """Survival function Q(lam) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lam^2).

    The alternating series converges slowly for small lam, where the
    mathematically identical theta-transformed series is used instead;
    both truncate once terms drop below 1e-12.
    """
    if lam <= 0.0:
        return 1.0
    if lam < 1.18:
        # Q(lam) = 1 - sqrt(2 pi)/lam * sum exp(-(2j-1)^2 pi^2 / (8 lam^2))
        factor = math.sqrt(2.0 * math.pi) / lam
        exponent = -(math.pi * math.pi) / (8.0 * lam * lam)
        total = 0.0
        for j in itertools.count(1):
            term = math.exp(exponent * (2 * j - 1) ** 2)
            total += term
            if term < _SERIES_TOL:
                break
        return min(max(1.0 - factor * total, 0.0), 1.0)
    total = 0.0
    sign = 1.0
    for j in itertools.count(1):
        term = 2.0 * math.exp(-2.0 * j * j * lam * lam)
        total += sign * term
        if term < _SERIES_TOL:
            break
        sign = -sign
    return min(max(total, 0.0), 1.0)


def _asymptotic_p(d: float, n_a: int, n_b: int) -> float:
    ne = n_a * n_b / (n_a + n_b)
    lam = (math.sqrt(ne) + 0.12 + 0.11 / math.sqrt(ne)) * d
    return kolmogorov_sf(lam)


def ks_test(a, b, method: str = "asymptotic", seed: int = 0) -> KsResult:
    """Two-sample Kolmogorov-Smirnov test.

    D is always computed exactly from the merged samples.  The
    permutation method enumerates every split of the pooled sample when
    there are at most 200000, otherwise draws 100000 seeded resamples.
    """
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    if not a or not b:
        raise EmptySample("ks_test requires non-empty samples")
    if method not in ("asymptotic", "permutation"):
        raise ValidationError(f"unknown ks method {method!r}")
    n_a, n_b = len(a), len(b)

    pooled = [(x, True) for x in a] + [(x, False) for x in b]
    pooled.sort(key=lambda t: t[0])
    values = [x for x, _ in pooled]
    from_a = [m for _, m in pooled]
    d_obs = _ks_distance(values, from_a, n_a, n_b)

    if method == "asymptotic":
        return KsResult(d_obs, _asymptotic_p(d_obs, n_a, n_b), n_a, n_b, method)

    threshold = d_obs - 1e-12
    n = n_a + n_b
    if math.comb(n, n_a) <= _EXACT_SPLIT_LIMIT:
        hits = 0
        total = 0
        membership = [False] * n
        for combo in itertools.combinations(range(n), n_a):
            for i in combo:
                membership[i] = True
            if _ks_distance(values, membership, n_a, n_b) >= threshold:
                hits += 1
            total += 1
            for i in combo:
                membership[i] = False
        p = hits / total
    else:
        rng = random.Random(seed)
        indices = list(range(n))
        hits = 0
        for _ in range(_MC_SAMPLES):
            chosen = rng.sample(indices, n_a)
            membership = [False] * n
            for i in chosen:
                membership[i] = True
            if _ks_distance(values, membership, n_a, n_b) >= threshold:
                hits += 1
        p = (hits + 1) / (_MC_SAMPLES + 1)
    return KsResult(d_obs, p, n_a, n_b, "permutation")


def pearson(x, y) -> float:
    """Product-moment correlation."""
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    if len(x) != len(y):
        raise LengthMismatch(f"{len(x)} vs {len(y)} points")
    if len(x) < 2:
        raise EmptySample("pearson requires at least two points")
    mx = sum(x) / len(x)
    my = sum(y) / len(y)
    sxx = sum((v - mx) ** 2 for v in x)
    syy = sum((v - my) ** 2 for v in y)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("pearson undefined for constant samples")
    sxy = sum((u - mx) * (v - my) for u, v in zip(x, y))
    return sxy / math.sqrt(sxx * syy)


@dataclass(frozen=True)
class SlopeFit:
    a: float
    stderr: float
    ci95: tuple[float, float]
    n: int

    def to_dict(self) -> dict:
        return {"a": self.a, "stderr": self.stderr, "ci95": list(self.ci95), "n": self.n}


def origin_slope_fit(x, y) -> SlopeFit:
    """Least-squares slope of y = a*x through the origin with a normal 95% CI."""
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    if len(x) != len(y):
        raise LengthMismatch(f"{len(x)} vs {len(y)} points")
    if len(x) < 2:
        raise EmptySample("origin_slope_fit requires at least two points")
    sxx = sum(v * v for v in x)
    if sxx == 0.0:
        raise DegenerateX("all x are zero")
    a = sum(u * v for u, v in zip(x, y)) / sxx
    rss = sum((v - a * u) ** 2 for u, v in zip(x, y))
    stderr = math.sqrt(rss / ((len(x) - 1) * sxx))
    return SlopeFit(a=a, stderr=stderr, ci95=(a - 1.96 * stderr, a + 1.96 * stderr), n=len(x))


def five_number_summary(sample) -> tuple[float, float, float, float, float]:
    """(min, q1, median, q3, max) with type-7 linear interpolation."""
    values = sorted(float(v) for v in sample)
    if not values:
        raise EmptySample("five_number_summary requires data")

    def quantile(p: float) -> float:
        h = (len(values) - 1) * p
        lo = math.floor(h)
        hi = math.ceil(h)
        return values[lo] + (h - lo) * (values[hi] - values[lo])

    return (values[0], quantile(0.25), quantile(0.5), quantile(0.75), values[-1])


# -- aggregation --------------------------------------------------------


def _mean(values) -> float | None:
    values = list(values)
    if not values:
        return None
    return sum(values) / len(values)


def _density_key(d: float) -> str:
    return f"{d:.2f}"


@dataclass(frozen=True)
class ReportRow:
    label: str
    kind: str  # "system" | "mt_average" | "no_hint" | "no_hint_average"
    n: int
    overall: float | None
    by_density: dict[str, float | None]
    overall_syn: float | None = None
    by_density_syn: dict[str, float | None] | None = None

    def to_dict(self) -> dict:
        out = {
            "label": self.label,
            "kind": self.kind,
            "n": self.n,
            "overall": self.overall,
            "by_density": dict(sorted(self.by_density.items())),
        }
        if self.by_density_syn is not None:
            out["overall_syn"] = self.overall_syn
            out["by_density_syn"] = dict(sorted(self.by_density_syn.items()))
        return out


@dataclass
class ScoreReport:
    rows: list[ReportRow]
    ks_pairs: list[tuple[str, str, KsResult]]
    ks_pairs_syn: list[tuple[str, str, KsResult]] | None
    iaa_pairs: list[tuple[str, str, float]]
    iaa_mean: float | None
    iaa_groups: int
    slopes: dict[str, SlopeFit]
    informant_box: dict[str, tuple[float, float, float, float, float]]
    n_problems: int
    n_responses: int

    def to_dict(self) -> dict:
        out = {
            "rows": [r.to_dict() for r in self.rows],
            "ks": [[a, b, r.to_dict()] for a, b, r in self.ks_pairs],
            "iaa": {
                "pairs": [[i, j, r] for i, j, r in self.iaa_pairs],
                "mean_r": self.iaa_mean,
                "n_groups": self.iaa_groups,
            },
            "slopes": {s: f.to_dict() for s, f in sorted(self.slopes.items())},
            "informant_box": {s: list(v) for s, v in sorted(self.informant_box.items())},
            "n_problems": self.n_problems,
            "n_responses": self.n_responses,
        }
        if self.ks_pairs_syn is not None:
            out["ks_with_synonyms"] = [[a, b, r.to_dict()] for a, b, r in self.ks_pairs_syn]
        return out

    def table_csv(self) -> str:
        """The Overall/10%/20% success-rate table as CSV."""
        densities = sorted({k for row in self.rows for k in row.by_density})
        with_syn = any(row.by_density_syn is not None for row in self.rows)
        header = ["label", "kind", "n", "overall"] + [f"density_{d}" for d in densities]
        if with_syn:
            header += ["overall_syn"] + [f"density_{d}_syn" for d in densities]
        lines = [",".join(header)]

        def cell(v: float | None) -> str:
            return "" if v is None else f"{v:.6f}"

        for row in self.rows:
            fields = [row.label, row.kind, str(row.n), cell(row.overall)]
            fields += [cell(row.by_density.get(d)) for d in densities]
            if with_syn:
                syn = row.by_density_syn or {}
                fields += [cell(row.overall_syn)]
                fields += [cell(syn.get(d)) for d in densities]
            lines.append(",".join(fields))
        return "\n".join(lines) + "\n"


def _row(label, kind, scored, with_syn: bool) -> ReportRow:
    densities = sorted({_density_key(s["density"]) for s in scored})
    by_density = {
        d: _mean(s["score"] for s in scored if _density_key(s["density"]) == d)
        for d in densities
    }
    row = {
        "label": label,
        "kind": kind,
        "n": len(scored),
        "overall": _mean(s["score"] for s in scored),
        "by_density": by_density,
    }
    if with_syn:
        row["overall_syn"] = _mean(s["score_syn"] for s in scored)
        row["by_density_syn"] = {
            d: _mean(s["score_syn"] for s in scored if _density_key(s["density"]) == d)
            for d in densities
        }
    return ReportRow(**row)


def means_from_gf_rows(rows: list[dict]) -> dict[str, dict]:
    """Success-rate means straight from per-gap rows (no local problems).

    Gaps group into problems by (informant, document, system, modality,
    density, strategy); each problem scores as its fraction of correct
    gaps, and problems average into per-system and no-hint means, overall
    and split by density, with and without synonym credit.
    """
    per_problem: dict[tuple, dict] = {}
    for row in rows:
        key = (
            row["informant"],
            row["document"],
            row["system"],
            row["modality"],
            row["density"],
            row["strategy"],
        )
        slot = per_problem.setdefault(key, {"n": 0, "correct": 0, "correct_syn": 0})
        slot["n"] += 1
        slot["correct"] += bool(row["correct"])
        slot["correct_syn"] += bool(row["correct_syn"])

    scored = []
    for (informant, document, system, modality, density, strategy), slot in per_problem.items():
        scored.append(
            {
                "label": system if system else f"no_hint_{strategy}",
                "density": density,
                "score": slot["correct"] / slot["n"],
                "score_syn": slot["correct_syn"] / slot["n"],
            }
        )

    out: dict[str, dict] = {}

    def summarize(label: str, items: list[dict]) -> None:
        if not items:
            return
        out[label] = {
            "n": len(items),
            "overall": _mean(s["score"] for s in items),
            "overall_syn": _mean(s["score_syn"] for s in items),
            "by_density": {
                d: _mean(
                    s["score"] for s in items if _density_key(s["density"]) == d
                )
                for d in sorted({_density_key(s["density"]) for s in items})
            },
            "by_density_syn": {
                d: _mean(
                    s["score_syn"] for s in items if _density_key(s["density"]) == d
                )
                for d in sorted({_density_key(s["density"]) for s in items})
            },
        }

    labels = sorted({s["label"] for s in scored})
    for label in labels:
        summarize(label, [s for s in scored if s["label"] == label])
    summarize("mt_average", [s for s in scored if not s["label"].startswith("no_hint_")])
    summarize("no_hint_average", [s for s in scored if s["label"].startswith("no_hint_")])
    return out


def aggregate_report(
    problems: list[GapProblem],
    responses: list[ResponseRecord],
    synonyms: SynonymTable | None = None,
    ks_method: str = "asymptotic",
) -> ScoreReport:
    """Assemble the success-rate table, KS matrix, IAA, and slope fits.

    Per-system rows pool every response to that system's problems; the
    no-hint rows split by gap strategy.  IAA pairs informants who solved
    the identical problem set (same document-to-configuration map) and
    correlates their per-document scores.
    """
    by_id = {p.problem_id: p for p in problems}
    scored: list[dict] = []
    for response in responses:
        problem = by_id.get(response.problem_id)
        if problem is None:
            continue
        entry = {
            "informant": response.informant_id,
            "doc": problem.doc_id,
            "system": problem.config.system,
            "strategy": problem.config.strategy.value,
            "density": problem.config.density,
            "problem_id": problem.problem_id,
            "score": score_gf(problem, response),
        }
        if synonyms is not None:
            entry["score_syn"] = score_gf(problem, response, synonyms=synonyms)
        scored.append(entry)
    scored.sort(key=lambda s: (s["informant"], s["doc"]))
    with_syn = synonyms is not None

    rows: list[ReportRow] = []
    systems = sorted({s["system"] for s in scored if s["system"] is not None})
    mt_scored = [s for s in scored if s["system"] is not None]
    for system in systems:
        rows.append(_row(system, "system", [s for s in mt_scored if s["system"] == system], with_syn))
    if mt_scored:
        rows.append(_row("mt_average", "mt_average", mt_scored, with_syn))
    nohint = [s for s in scored if s["system"] is None]
    for strategy in sorted({s["strategy"] for s in nohint}):
        rows.append(
            _row(
                f"no_hint_{strategy}",
                "no_hint",
                [s for s in nohint if s["strategy"] == strategy],
                with_syn,
            )
        )
    if nohint:
        rows.append(_row("no_hint_average", "no_hint_average", nohint, with_syn))

    def ks_matrix(score_key: str) -> list[tuple[str, str, KsResult]]:
        out = []
        for sys_a, sys_b in itertools.combinations(systems, 2):
            sample_a = [s[score_key] for s in mt_scored if s["system"] == sys_a]
            sample_b = [s[score_key] for s in mt_scored if s["system"] == sys_b]
            if sample_a and sample_b:
                out.append((sys_a, sys_b, ks_test(sample_a, sample_b, method=ks_method)))
        return out

    ks_pairs = ks_matrix("score")
    ks_pairs_syn = ks_matrix("score_syn") if with_syn else None

    # inter-annotator agreement: informants sharing an identical problem set
    problems_of: dict[str, dict[str, float]] = defaultdict(dict)
    signature_of: dict[str, tuple] = {}
    for s in scored:
        problems_of[s["informant"]][s["doc"]] = s["score"]
    sig_source: dict[str, list] = defaultdict(list)
    for p in problems:
        sig_source[p.informant_id].append((p.doc_id, p.config.label))
    for informant, items in sig_source.items():
        signature_of[informant] = tuple(sorted(items))
    groups: dict[tuple, list[str]] = defaultdict(list)
    for informant in sorted(problems_of):
        if informant in signature_of:
            groups[signature_of[informant]].append(informant)

    iaa_pairs: list[tuple[str, str, float]] = []
    for signature in sorted(groups):
        members = groups[signature]
        for i, j in itertools.combinations(members, 2):
            docs = sorted(set(problems_of[i]) & set(problems_of[j]))
            if len(docs) < 2:
                continue
            try:
                r = pearson(
                    [problems_of[i][d] for d in docs],
                    [problems_of[j][d] for d in docs],
                )
            except ZeroVariance:
                continue
            iaa_pairs.append((i, j, r))
    iaa_mean = _mean(r for _, _, r in iaa_pairs)

    # per-informant means for slope fits and box summaries
    by_informant_system: dict[str, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    for s in mt_scored:
        by_informant_system[s["informant"]][s["system"]].append(s["score"])
    slopes: dict[str, SlopeFit] = {}
    informant_box: dict[str, tuple] = {}
    for system in systems:
        xs, ys = [], []
        means = []
        for informant in sorted(by_informant_system):
            per_system = by_informant_system[informant]
            all_scores = [v for vals in per_system.values() for v in vals]
            if system in per_system:
                mean_sys = _mean(per_system[system])
                means.append(mean_sys)
                xs.append(_mean(all_scores))
                ys.append(mean_sys)
        if means:
            informant_box[system] = five_number_summary(means)
        try:
            slopes[system] = origin_slope_fit(xs, ys)
        except (EmptySample, DegenerateX):
            pass

    return ScoreReport(
        rows=rows,
        ks_pairs=ks_pairs,
        ks_pairs_syn=ks_pairs_syn,
        iaa_pairs=iaa_pairs,
        iaa_mean=iaa_mean,
        iaa_groups=sum(1 for g in groups.values() if len(g) > 1),
        slopes=slopes,
        informant_box=informant_box,
        n_problems=len(problems),
        n_responses=len(scored),
    )

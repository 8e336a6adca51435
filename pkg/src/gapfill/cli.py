"""Command-line entry points for the batch pipeline.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3
internal error.  Every randomized output embeds its run manifest (seed
and parameters); identical manifests reproduce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import ngram_lm
from .errors import GapfillError, ValidationError
from .experiment import (
    assign,
    build_config_matrix,
    generate_problems,
    load_plan,
    save_plan,
)
from .scoring import SCHEMES, RcqMarks, SynonymTable, extract_synonym_candidates, rcq_score
from .stats import aggregate_report
from .store import SessionStore, load_rcq_marks


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gapfill", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-lm", help="train and serialize the trigram model")
    p.add_argument("corpus", help="text file, one sentence per line")
    p.add_argument("--min-count", type=int, default=2)
    p.add_argument("--out", required=True)

    p = sub.add_parser("plan", help="build configurations, assignment, and problems")
    p.add_argument("--informants", type=int, required=True)
    p.add_argument("--systems", required=True, help="comma-separated system ids")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--bundles", required=True, help="directory of bundle .json files")
    p.add_argument("--model", required=True, help="trained language model (.npz)")
    p.add_argument("--out", required=True)
    p.add_argument(
        "--densities", default="0.10,0.20", help="comma-separated gap densities"
    )
    p.add_argument(
        "--allow-reduced",
        action="store_true",
        help="permit fewer documents than configurations",
    )

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--plan", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--instructions", help="file with instruction copy for the UI")

    p = sub.add_parser("score", help="aggregate gap-filling scores into a report")
    p.add_argument("--plan", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--synonyms", help="TSV synonym table")
    p.add_argument("--out", required=True)
    p.add_argument("--csv", help="also write the success-rate table as CSV")
    p.add_argument("--ks-method", choices=["asymptotic", "permutation"], default="asymptotic")

    p = sub.add_parser("rcq-score", help="compute RCQ document scores from marks")
    p.add_argument("--marks", required=True, help="RCQ marks CSV")
    p.add_argument("--scheme", choices=sorted(SCHEMES), required=True)
    p.add_argument("--out", help="output CSV (stdout when omitted)")

    p = sub.add_parser("analyze", help="print the analyses stored in a report")
    p.add_argument("--report", required=True)

    p = sub.add_parser("synonyms", help="synonym table tooling")
    syn_sub = p.add_subparsers(dest="syn_command", required=True)
    px = syn_sub.add_parser("extract", help="candidate pairs for adjudication")
    px.add_argument("--plan", required=True)
    px.add_argument("--store", required=True)
    px.add_argument("--min-freq", type=int, default=2)
    px.add_argument("--out", help="output TSV (stdout when omitted)")

    return parser


def _read_sentences(path: str) -> list[list[str]]:
    sentences = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                sentences.append([t.surface for t in corpus_mod.tokenize(line)])
    return sentences


def _load_bundles(directory: str) -> dict:
    paths = sorted(Path(directory).glob("*.json"))
    if not paths:
        raise ValidationError(f"no bundle files in {directory}")
    return corpus_mod.load_corpus(paths)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_build_lm(args) -> int:
    sentences = _read_sentences(args.corpus)
    model = ngram_lm.train(sentences, min_count=args.min_count)
    manifest = {
        "command": "build-lm",
        "corpus": args.corpus,
        "min_count": args.min_count,
        "sentences": len(sentences),
    }
    ngram_lm.save(model, args.out, manifest=manifest)
    print(
        f"trained {model.order}-gram model: |V|={len(model.vocab)}, "
        f"{len(model.tri_keys)} trigrams -> {args.out}"
    )
    return 0


def _cmd_plan(args) -> int:
    bundles = _load_bundles(args.bundles)
    model = ngram_lm.load(args.model)
    systems = [s for s in args.systems.split(",") if s]
    densities = tuple(float(d) for d in args.densities.split(","))
    informants = [f"inf{n:03d}" for n in range(args.informants)]
    documents = sorted(bundles)
    configs = build_config_matrix(systems, densities=densities)
    plan = assign(
        informants,
        documents,
        configs,
        seed=args.seed,
        require_full_coverage=not args.allow_reduced,
    )
    problems = generate_problems(bundles, plan, model)
    manifest = {
        "command": "plan",
        "seed": args.seed,
        "informants": args.informants,
        "systems": systems,
        "densities": list(densities),
        "bundles": args.bundles,
        "model": args.model,
    }
    save_plan(plan, problems, args.out, manifest=manifest)
    print(
        f"plan: {len(informants)} informants x {len(documents)} documents, "
        f"{len(configs)} configurations, {len(problems)} problems -> {args.out}"
    )
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import DEFAULT_INSTRUCTIONS, create_app

    plan, problems, _ = load_plan(args.plan)
    store = SessionStore(plan, problems, args.store)
    instructions = DEFAULT_INSTRUCTIONS
    if args.instructions:
        instructions = Path(args.instructions).read_text("utf-8").strip()
    app = create_app(store, instructions=instructions)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_score(args) -> int:
    plan, problems, plan_manifest = load_plan(args.plan)
    store = SessionStore(plan, problems, args.store)
    synonyms = None
    if args.synonyms:
        synonyms = SynonymTable.from_tsv(Path(args.synonyms).read_text("utf-8"))
    report = aggregate_report(
        problems, store.responses(), synonyms=synonyms, ks_method=args.ks_method
    )
    payload = {
        "manifest": {
            "command": "score",
            "seed": plan_manifest.get("seed"),
            "plan": args.plan,
            "synonyms": args.synonyms,
            "ks_method": args.ks_method,
        },
        "report": report.to_dict(),
    }
    Path(args.out).write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
        encoding="utf-8",
    )
    if args.csv:
        Path(args.csv).write_text(report.table_csv(), encoding="utf-8")
    print(f"report: {report.n_responses} responses over {report.n_problems} problems -> {args.out}")
    return 0


def _cmd_rcq_score(args) -> int:
    marks = load_rcq_marks(Path(args.marks).read_bytes())
    scheme = SCHEMES[args.scheme]
    lines = ["document_id,condition,score"]
    for (document, condition), pairs in marks.items():
        value = rcq_score(RcqMarks(marks=tuple(pairs)), scheme)
        lines.append(f"{document},{condition},{value:.6f}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_analyze(args) -> int:
    payload = json.loads(Path(args.report).read_text("utf-8"))
    report = payload["report"]
    out = []
    out.append("== success rates ==")
    for row in report["rows"]:
        densities = "  ".join(
            f"{k}: {v:.3f}" if v is not None else f"{k}: -"
            for k, v in row["by_density"].items()
        )
        overall = f"{row['overall']:.3f}" if row["overall"] is not None else "-"
        line = f"{row['label']:<24} n={row['n']:<5} overall={overall}  {densities}"
        if "overall_syn" in row and row["overall_syn"] is not None:
            line += f"  with-synonyms={row['overall_syn']:.3f}"
        out.append(line)
    out.append("")
    out.append("== pairwise KS between systems ==")
    for a, b, r in report["ks"]:
        out.append(f"{a} vs {b}: D={r['D']:.3f} p={r['p_value']:.4f} ({r['method']})")
    out.append("")
    iaa = report["iaa"]
    mean_r = f"{iaa['mean_r']:.3f}" if iaa["mean_r"] is not None else "-"
    out.append(
        f"== inter-annotator agreement == mean pairwise r={mean_r} "
        f"over {len(iaa['pairs'])} pairs in {iaa['n_groups']} groups"
    )
    out.append("")
    out.append("== through-origin slopes (informant means) ==")
    for system, fit in report["slopes"].items():
        lo, hi = fit["ci95"]
        out.append(f"{system}: a={fit['a']:.3f}  ci95=[{lo:.3f}, {hi:.3f}]  n={fit['n']}")
    out.append("")
    out.append("== per-informant score distribution (min q1 median q3 max) ==")
    for system, box in report["informant_box"].items():
        out.append(f"{system}: " + "  ".join(f"{v:.3f}" for v in box))
    print("\n".join(out))
    return 0


def _cmd_synonyms_extract(args) -> int:
    plan, problems, _ = load_plan(args.plan)
    store = SessionStore(plan, problems, args.store)
    candidates = extract_synonym_candidates(
        problems, store.responses(), min_freq=args.min_freq
    )
    text = "".join(f"{e}\t{a}\t{c}\n" for e, a, c in candidates)
    _emit(text, args.out)
    return 0


_COMMANDS = {
    "build-lm": _cmd_build_lm,
    "plan": _cmd_plan,
    "serve": _cmd_serve,
    "score": _cmd_score,
    "rcq-score": _cmd_rcq_score,
    "analyze": _cmd_analyze,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.command == "synonyms":
            return _cmd_synonyms_extract(args)
        return _COMMANDS[args.command](args)
    except GapfillError as e:
        print(f"gapfill {args.command}: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"gapfill {args.command}: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # internal error
        print(f"gapfill {args.command}: internal error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

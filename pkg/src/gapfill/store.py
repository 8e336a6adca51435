"""Experiment state: append-only event log, informant sessions, CSV export.

The only mutable state is an append-only JSONL event log; session
cursors and completion sets are projections rebuilt by replay, so a
process restart over the same directory reconstructs identical state.
Submissions are idempotent by (informant, problem): the first event
wins, later duplicates return the original receipt marked as such.
"""

from __future__ import annotations

import csv
import io
import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import hashlib
import random

from .corpus import QType, normalize_answer
from .errors import NotAssigned, SchemaError, UnknownInformant, ValidationError
from .experiment import ExperimentPlan, GapProblem, problem_id_for
from .scoring import MarkCategory, ResponseRecord, SynonymTable, gap_correct

EVENTS_FILE = "events.jsonl"
RCQ_FILE = "rcq_marks.csv"

GF_COLUMNS = [
    "informant_id",
    "document_id",
    "system",
    "modality",
    "density",
    "strategy",
    "gap_index",
    "token_position",
    "expected",
    "given",
    "exact_match",
    "synonym_match",
    "timestamp",
]

RCQ_COLUMNS = ["document_id", "condition", "question_index", "qtype", "category", "credit"]


def _order_seed(plan_seed: int, informant_id: str) -> int:
    digest = hashlib.sha256(f"{plan_seed}:order:{informant_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class Receipt:
    status: str  # "accepted" | "duplicate"
    receipt_id: int
    informant_id: str
    problem_id: str

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "receipt_id": self.receipt_id,
            "informant_id": self.informant_id,
            "problem_id": self.problem_id,
        }


class EventLog:
    """Append-only JSONL log; events are immutable once written."""

    def __init__(self, path: Path):
        self.path = Path(path)

    def replay(self) -> list[dict]:
        if not self.path.exists():
            return []
        events = []
        with open(self.path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    events.append(json.loads(line))
                except ValueError as e:
                    raise ValidationError(f"{self.path}:{lineno}: corrupt event: {e}") from e
        return events

    def append(self, event: dict) -> None:
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(json.dumps(event, ensure_ascii=False, sort_keys=True) + "\n")
            f.flush()


class SessionStore:
    """Serves problems in a per-informant seeded order and collects responses."""

    def __init__(self, plan: ExperimentPlan, problems: list[GapProblem], store_dir):
        self.plan = plan
        self.problems = {p.problem_id: p for p in problems}
        self.store_dir = Path(store_dir)
        self.store_dir.mkdir(parents=True, exist_ok=True)
        self.log = EventLog(self.store_dir / EVENTS_FILE)
        self._lock = threading.Lock()

        self.order: dict[str, list[str]] = {}
        for informant in plan.informants:
            ids = sorted(
                pid for pid, p in self.problems.items() if p.informant_id == informant
            )
            rng = random.Random(_order_seed(plan.seed, informant))
            rng.shuffle(ids)
            self.order[informant] = ids

        # projections rebuilt by replay; first event per key wins
        self.accepted: dict[tuple[str, str], dict] = {}
        for event in self.log.replay():
            key = (event["informant_id"], event["problem_id"])
            self.accepted.setdefault(key, event)
        self._rcq_rows: list[dict] = []
        rcq_path = self.store_dir / RCQ_FILE
        if rcq_path.exists():
            self._rcq_rows = _parse_rcq_csv(rcq_path.read_text("utf-8"))

    # -- sessions ------------------------------------------------------

    def _require_informant(self, informant_id: str) -> None:
        if informant_id not in self.order:
            raise UnknownInformant(f"unknown informant {informant_id!r}")

    def completed(self, informant_id: str) -> set[str]:
        self._require_informant(informant_id)
        return {
            pid for (inf, pid) in self.accepted if inf == informant_id
        }

    def next_problem(self, informant_id: str, instructions: str = "") -> dict:
        """Payload for the informant's next unanswered problem.

        Never exposes the answer key, the hinting system's identity, or
        the configuration; the cursor only advances on submission.
        """
        self._require_informant(informant_id)
        done = self.completed(informant_id)
        order = self.order[informant_id]
        pending = [pid for pid in order if pid not in done]
        if not pending:
            return {"status": "done", "completed": len(done), "total": len(order)}
        problem = self.problems[pending[0]]
        return {
            "status": "problem",
            "problem_id": problem.problem_id,
            "instructions": instructions,
            "progress": {"completed": len(done), "total": len(order)},
            "hint": problem.hint.to_dict(),
            "sentence": {
                "rendered": problem.rendered(),
                "segments": _segments(problem),
            },
            "gap_count": len(problem.gaps.positions),
        }

    def submit(
        self,
        informant_id: str,
        problem_id: str,
        fills: dict[int, str],
        elapsed_ms: int | None = None,
    ) -> Receipt:
        self._require_informant(informant_id)
        problem = self.problems.get(problem_id)
        if problem is None or problem.informant_id != informant_id:
            raise NotAssigned(f"problem {problem_id!r} is not assigned to {informant_id!r}")
        positions = set(problem.gaps.positions)
        bad = [p for p in fills if p not in positions]
        if bad:
            raise ValidationError(f"fills reference non-gap positions {sorted(bad)}")

        key = (informant_id, problem_id)
        with self._lock:
            if key in self.accepted:
                return Receipt("duplicate", self.accepted[key]["seq"], informant_id, problem_id)
            event = {
                "seq": len(self.accepted),
                "informant_id": informant_id,
                "problem_id": problem_id,
                "fills": {str(k): v for k, v in fills.items()},
                "elapsed_ms": elapsed_ms,
                "submitted_at": _now_iso(),
            }
            self.log.append(event)
            self.accepted[key] = event
            return Receipt("accepted", event["seq"], informant_id, problem_id)

    def progress(self) -> dict:
        return {
            informant: {
                "completed": len(self.completed(informant)),
                "total": len(self.order[informant]),
                "done": len(self.completed(informant)) == len(self.order[informant]),
            }
            for informant in sorted(self.order)
        }

    def responses(self) -> list[ResponseRecord]:
        out = []
        for (informant, problem_id), event in sorted(self.accepted.items()):
            out.append(
                ResponseRecord(
                    problem_id=problem_id,
                    informant_id=informant,
                    fills={int(k): v for k, v in event["fills"].items()},
                    submitted_at=event.get("submitted_at", ""),
                    elapsed_ms=event.get("elapsed_ms"),
                )
            )
        return out

    # -- exports -------------------------------------------------------

    def export_gf_csv(self, synonyms: SynonymTable | None = None) -> str:
        """One row per gap of every submitted problem; deterministic order."""
        rows = []
        for (informant, problem_id), event in self.accepted.items():
            problem = self.problems[problem_id]
            fills = {int(k): v for k, v in event["fills"].items()}
            config = problem.config
            for gap_index, pos in enumerate(problem.gaps.positions):
                expected = problem.answer_key[pos]
                given = fills.get(pos, "")
                exact = normalize_answer(given) == normalize_answer(expected) and given.strip() != ""
                synonym = (
                    not exact
                    and synonyms is not None
                    and gap_correct(expected, given, synonyms)
                )
                rows.append(
                    [
                        informant,
                        problem.doc_id,
                        config.system or "",
                        config.modality.value if config.modality else "",
                        f"{config.density:g}",
                        config.strategy.value,
                        str(gap_index),
                        str(pos),
                        expected,
                        given,
                        "1" if exact else "0",
                        "1" if synonym else "0",
                        event.get("submitted_at", ""),
                    ]
                )
        rows.sort(key=lambda r: (r[0], r[1], int(r[7])))
        return _write_csv(GF_COLUMNS, rows)

    def export_rcq_csv(self) -> str:
        rows = [
            [
                r["document_id"],
                r["condition"],
                str(r["question_index"]),
                r["qtype"],
                r["category"],
                f"{r['credit']:g}",
            ]
            for r in self._rcq_rows
        ]
        rows.sort(key=lambda r: (r[0], r[1], int(r[2])))
        return _write_csv(RCQ_COLUMNS, rows)


def _segments(problem: GapProblem) -> list[dict]:
    """Sentence as alternating literal-text and gap-slot segments."""
    gapped = set(problem.gaps.positions)
    segments: list[dict] = []
    buffer: list[str] = []
    for i, token in enumerate(problem.tokens):
        if i in gapped:
            if buffer:
                segments.append({"kind": "text", "text": " ".join(buffer)})
                buffer = []
            segments.append({"kind": "gap", "position": i})
        else:
            buffer.append(token.surface)
    if buffer:
        segments.append({"kind": "text", "text": " ".join(buffer)})
    return segments


def _write_csv(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_ALL, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# -- raw result import ---------------------------------------------------

REQUIRED_IMPORT_COLUMNS = ["informant_id", "document_id", "token_position", "given"]

IDENTITY_MAPPING = {c: c for c in GF_COLUMNS}


def import_raw_results(
    data: bytes | str,
    mapping: dict[str, str] | None = None,
) -> tuple[list[ResponseRecord], list[str]]:
    """Rebuild responses from a raw per-gap CSV.

    ``mapping`` maps our canonical column names to the file's column
    names (identity when omitted).  Unmapped extra columns are ignored;
    malformed rows are skipped and reported with their line numbers.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    mapping = dict(IDENTITY_MAPPING, **(mapping or {}))
    reader = csv.DictReader(io.StringIO(data))
    if reader.fieldnames is None:
        raise SchemaError("empty CSV: header row is mandatory")
    for canonical in REQUIRED_IMPORT_COLUMNS:
        if mapping[canonical] not in reader.fieldnames:
            raise SchemaError(
                f"missing required column {mapping[canonical]!r} (for {canonical})"
            )

    warnings: list[str] = []
    fills: dict[tuple[str, str], dict[int, str]] = {}
    timestamps: dict[tuple[str, str], str] = {}
    for lineno, row in enumerate(reader, start=2):
        informant = row.get(mapping["informant_id"], "")
        document = row.get(mapping["document_id"], "")
        raw_pos = row.get(mapping["token_position"], "")
        if not informant or not document:
            warnings.append(f"line {lineno}: missing informant or document id")
            continue
        try:
            pos = int(raw_pos)
        except (TypeError, ValueError):
            warnings.append(f"line {lineno}: bad token_position {raw_pos!r}")
            continue
        key = (informant, document)
        fills.setdefault(key, {})[pos] = row.get(mapping["given"]) or ""
        ts_col = mapping.get("timestamp", "timestamp")
        if ts_col in row and row[ts_col]:
            timestamps[key] = row[ts_col]

    responses = [
        ResponseRecord(
            problem_id=problem_id_for(informant, document),
            informant_id=informant,
            fills=gap_fills,
            submitted_at=timestamps.get((informant, document), ""),
        )
        for (informant, document), gap_fills in sorted(fills.items())
    ]
    return responses, warnings


GF_ROW_COLUMNS = [
    "informant_id",
    "document_id",
    "system",
    "modality",
    "density",
    "strategy",
    "token_position",
    "expected",
    "given",
]


def parse_gf_rows(
    data: bytes | str,
    mapping: dict[str, str] | None = None,
    synonyms: SynonymTable | None = None,
) -> tuple[list[dict], list[str]]:
    """Per-gap rows from a raw GF CSV, scored in place.

    Unlike import_raw_results this does not require local problem
    objects: correctness is recomputed from the expected/given columns
    (plus the synonym table or a mapped synonym_match column), so a raw
    results file from another run of the method can be re-analyzed.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    mapping = dict(IDENTITY_MAPPING, **(mapping or {}))
    reader = csv.DictReader(io.StringIO(data))
    if reader.fieldnames is None:
        raise SchemaError("empty CSV: header row is mandatory")
    for canonical in GF_ROW_COLUMNS:
        if mapping[canonical] not in reader.fieldnames:
            raise SchemaError(
                f"missing required column {mapping[canonical]!r} (for {canonical})"
            )
    syn_col = mapping.get("synonym_match", "synonym_match")
    has_syn_col = syn_col in reader.fieldnames

    rows: list[dict] = []
    warnings: list[str] = []
    for lineno, row in enumerate(reader, start=2):
        try:
            density = float(row[mapping["density"]])
        except (TypeError, ValueError):
            warnings.append(f"line {lineno}: bad density {row.get(mapping['density'])!r}")
            continue
        expected = row[mapping["expected"]] or ""
        given = row[mapping["given"]] or ""
        exact = bool(given.strip()) and normalize_answer(given) == normalize_answer(expected)
        if synonyms is not None:
            synonym = not exact and gap_correct(expected, given, synonyms)
        elif has_syn_col:
            synonym = row[syn_col] in ("1", "true", "True")
        else:
            synonym = False
        rows.append(
            {
                "informant": row[mapping["informant_id"]],
                "document": row[mapping["document_id"]],
                "system": row[mapping["system"]] or None,
                "modality": row[mapping["modality"]] or None,
                "density": density,
                "strategy": row[mapping["strategy"]],
                "correct": exact,
                "correct_syn": exact or synonym,
            }
        )
    return rows, warnings


# -- RCQ marks ------------------------------------------------------------


def _parse_rcq_csv(data: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(data))
    if reader.fieldnames is None:
        raise SchemaError("empty RCQ CSV")
    for col in ("document_id", "condition", "qtype", "category"):
        if col not in reader.fieldnames:
            raise SchemaError(f"RCQ CSV missing column {col!r}")
    from .scoring import CREDIT

    rows = []
    for lineno, row in enumerate(reader, start=2):
        try:
            qtype = QType(row["qtype"])
            category = MarkCategory(row["category"])
        except ValueError as e:
            raise ValidationError(f"RCQ line {lineno}: {e}") from e
        rows.append(
            {
                "document_id": row["document_id"],
                "condition": row["condition"],
                "question_index": int(row.get("question_index") or len(rows)),
                "qtype": qtype.value,
                "category": category.value,
                "credit": CREDIT[category],
            }
        )
    return rows


def load_rcq_marks(data: bytes | str) -> dict[tuple[str, str], list[tuple[QType, MarkCategory]]]:
    """Group (document, condition) -> ordered (qtype, category) marks."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    grouped: dict[tuple[str, str], list] = {}
    for row in _parse_rcq_csv(data):
        key = (row["document_id"], row["condition"])
        grouped.setdefault(key, []).append(
            (row["question_index"], QType(row["qtype"]), MarkCategory(row["category"]))
        )
    return {
        key: [(q, c) for _, q, c in sorted(rows, key=lambda r: r[0])]
        for key, rows in sorted(grouped.items())
    }

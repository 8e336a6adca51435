import threading

import pytest

from conftest import SYSTEMS
from gapfill.errors import NotAssigned, SchemaError, UnknownInformant, ValidationError
from gapfill.experiment import assign, build_config_matrix, generate_problems
from gapfill.scoring import SynonymTable
from gapfill.stats import aggregate_report
from gapfill.store import (
    GF_COLUMNS,
    RCQ_COLUMNS,
    SessionStore,
    import_raw_results,
    load_rcq_marks,
)


@pytest.fixture()
def store(toy_model, toy_bundles, tmp_path):
    informants = [f"i{n:02d}" for n in range(8)]
    documents = sorted(toy_bundles)[:8]
    configs = build_config_matrix(sorted(SYSTEMS))[:8]
    plan = assign(informants, documents, configs, seed=42)
    problems = generate_problems(toy_bundles, plan, toy_model)
    return SessionStore(plan, problems, tmp_path / "store")


def answer_everything(store, perfect_for=None):
    """Drive every informant through their session, answering correctly."""
    for informant in store.plan.informants:
        while True:
            payload = store.next_problem(informant)
            if payload["status"] == "done":
                break
            problem = store.problems[payload["problem_id"]]
            store.submit(informant, problem.problem_id, dict(problem.answer_key))


class TestSessions:
    def test_fresh_informant_gets_first_of_their_order(self, store):
        informant = store.plan.informants[0]
        payload = store.next_problem(informant)
        assert payload["status"] == "problem"
        assert payload["problem_id"] == store.order[informant][0]
        assert payload["progress"] == {"completed": 0, "total": len(store.order[informant])}

    def test_payload_never_leaks_answers_or_config(self, store):
        informant = store.plan.informants[0]
        seen_kinds = set()
        while True:
            payload = store.next_problem(informant)
            if payload["status"] == "done":
                break
            blob = str(payload)
            assert "answer" not in blob
            assert "config" not in blob
            for system in SYSTEMS:
                assert system not in blob.split("problem_id")[0]  # no system names
            assert "density" not in blob
            seen_kinds.add(payload["hint"]["kind"])
            problem = store.problems[payload["problem_id"]]
            assert payload["gap_count"] == len(problem.gaps.positions)
            slots = [s for s in payload["sentence"]["segments"] if s["kind"] == "gap"]
            assert len(slots) == payload["gap_count"]
            store.submit(informant, problem.problem_id, dict(problem.answer_key))
        assert payload["completed"] == payload["total"]

    def test_document_hint_carries_highlight(self, store):
        found = False
        for problem in store.problems.values():
            if problem.hint.kind == "document":
                payload_hint = problem.hint.to_dict()
                assert payload_hint["highlight_index"] == problem.key_sentence_index
                found = True
        assert found

    def test_unknown_informant(self, store):
        with pytest.raises(UnknownInformant):
            store.next_problem("nobody")
        with pytest.raises(UnknownInformant):
            store.submit("nobody", "x", {})

    def test_submit_for_another_informant_rejected(self, store):
        i0, i1 = store.plan.informants[:2]
        other_problem = store.next_problem(i1)["problem_id"]
        with pytest.raises(NotAssigned):
            store.submit(i0, other_problem, {})

    def test_fills_outside_gaps_rejected(self, store):
        informant = store.plan.informants[0]
        problem = store.problems[store.next_problem(informant)["problem_id"]]
        bad_pos = max(problem.gaps.positions) + 1000
        with pytest.raises(ValidationError):
            store.submit(informant, problem.problem_id, {bad_pos: "x"})

    def test_idempotent_submission(self, store):
        informant = store.plan.informants[0]
        problem_id = store.next_problem(informant)["problem_id"]
        problem = store.problems[problem_id]
        first = store.submit(informant, problem_id, dict(problem.answer_key))
        assert first.status == "accepted"
        again = store.submit(informant, problem_id, {})
        assert again.status == "duplicate"
        assert again.receipt_id == first.receipt_id
        # the stored response is the original one
        responses = [r for r in store.responses() if r.problem_id == problem_id]
        assert len(responses) == 1
        assert responses[0].fills == problem.answer_key

    def test_cursor_advances_only_on_submit(self, store):
        informant = store.plan.informants[0]
        first = store.next_problem(informant)["problem_id"]
        assert store.next_problem(informant)["problem_id"] == first
        store.submit(informant, first, {})
        assert store.next_problem(informant)["problem_id"] != first

    def test_done_marker_after_all_submitted(self, store):
        informant = store.plan.informants[0]
        total = len(store.order[informant])
        for _ in range(total):
            pid = store.next_problem(informant)["problem_id"]
            store.submit(informant, pid, {})
        payload = store.next_problem(informant)
        assert payload == {"status": "done", "completed": total, "total": total}

    def test_progress_counts(self, store):
        informant = store.plan.informants[0]
        pid = store.next_problem(informant)["problem_id"]
        store.submit(informant, pid, {})
        progress = store.progress()
        assert progress[informant]["completed"] == 1
        assert not progress[informant]["done"]

    def test_crash_recovery_replays_identical_state(self, store, toy_model):
        answer_everything(store)
        clone = SessionStore(store.plan, list(store.problems.values()), store.store_dir)
        assert clone.accepted == store.accepted
        assert clone.progress() == store.progress()
        assert [r for r in clone.responses()] == [r for r in store.responses()]

    def test_concurrent_duplicate_submissions_accept_once(self, store):
        informant = store.plan.informants[0]
        problem_id = store.next_problem(informant)["problem_id"]
        problem = store.problems[problem_id]
        receipts = []

        def worker():
            receipts.append(store.submit(informant, problem_id, dict(problem.answer_key)))

        threads = [threading.Thread(target=worker) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sum(1 for r in receipts if r.status == "accepted") == 1
        assert sum(1 for r in receipts if r.status == "duplicate") == 7
        assert len([r for r in store.responses() if r.problem_id == problem_id]) == 1


class TestGfExport:
    def test_empty_log_header_only(self, store):
        assert store.export_gf_csv().splitlines() == [
            ",".join(f'"{c}"' for c in GF_COLUMNS)
        ]

    def test_row_count_is_total_gaps(self, store):
        answer_everything(store)
        lines = store.export_gf_csv().splitlines()
        expected_rows = sum(
            len(p.gaps.positions) for p in store.problems.values()
        )
        assert len(lines) - 1 == expected_rows

    def test_exact_match_flags(self, store):
        informant = store.plan.informants[0]
        problem = store.problems[store.next_problem(informant)["problem_id"]]
        fills = dict(problem.answer_key)
        wrong_pos = problem.gaps.positions[0]
        fills[wrong_pos] = "definitely-wrong"
        store.submit(informant, problem.problem_id, fills)
        import csv as csv_mod
        import io

        rows = list(csv_mod.DictReader(io.StringIO(store.export_gf_csv())))
        by_pos = {int(r["token_position"]): r for r in rows}
        assert by_pos[wrong_pos]["exact_match"] == "0"
        for pos in problem.gaps.positions[1:]:
            assert by_pos[pos]["exact_match"] == "1"

    def test_synonym_match_column(self, store):
        informant = store.plan.informants[0]
        problem = store.problems[store.next_problem(informant)["problem_id"]]
        fills = dict(problem.answer_key)
        pos = problem.gaps.positions[0]
        expected = problem.answer_key[pos]
        fills[pos] = "stand-in"
        store.submit(informant, problem.problem_id, fills)
        table = SynonymTable.from_pairs([(expected, "stand-in")])
        import csv as csv_mod
        import io

        rows = list(csv_mod.DictReader(io.StringIO(store.export_gf_csv(synonyms=table))))
        row = next(r for r in rows if int(r["token_position"]) == pos)
        assert row["exact_match"] == "0"
        assert row["synonym_match"] == "1"

    def test_round_trip_reproduces_report(self, store):
        answer_everything(store)
        problems = list(store.problems.values())
        direct = aggregate_report(problems, store.responses())
        exported = store.export_gf_csv()
        imported, warnings = import_raw_results(exported)
        assert warnings == []
        rebuilt = aggregate_report(problems, imported)
        assert rebuilt.to_dict() == direct.to_dict()


class TestImport:
    def test_missing_required_column(self):
        with pytest.raises(SchemaError):
            import_raw_results("informant_id,document_id\n")

    def test_custom_mapping(self):
        csv_text = (
            '"who","doc","slot","answer"\n'
            '"i1","d1","3","wombat"\n'
            '"i1","d1","7","granite"\n'
        )
        responses, warnings = import_raw_results(
            csv_text,
            mapping={
                "informant_id": "who",
                "document_id": "doc",
                "token_position": "slot",
                "given": "answer",
            },
        )
        assert warnings == []
        assert len(responses) == 1
        assert responses[0].problem_id == "i1__d1"
        assert responses[0].fills == {3: "wombat", 7: "granite"}

    def test_malformed_rows_reported_with_line_numbers(self):
        csv_text = (
            "informant_id,document_id,token_position,given\n"
            "i1,d1,3,ok\n"
            "i1,d1,notanumber,bad\n"
            ",d1,4,missing\n"
        )
        responses, warnings = import_raw_results(csv_text)
        assert len(responses) == 1
        assert any("line 3" in w for w in warnings)
        assert any("line 4" in w for w in warnings)


RCQ_CSV = (
    "document_id,condition,question_index,qtype,category,credit\n"
    "d1,google,0,literal,correct,1\n"
    "d1,google,1,literal,missing_concept,0.5\n"
    "d1,google,2,inference,blend,0.25\n"
    "d1,human,0,literal,correct,1\n"
)


class TestRcq:
    def test_load_rcq_marks(self):
        marks = load_rcq_marks(RCQ_CSV)
        assert set(marks) == {("d1", "google"), ("d1", "human")}
        assert len(marks[("d1", "google")]) == 3

    def test_rcq_export_round_trip(self, store):
        (store.store_dir / "rcq_marks.csv").write_text(RCQ_CSV, encoding="utf-8")
        reloaded = SessionStore(store.plan, list(store.problems.values()), store.store_dir)
        exported = reloaded.export_rcq_csv()
        lines = exported.splitlines()
        assert lines[0] == ",".join(f'"{c}"' for c in RCQ_COLUMNS)
        assert len(lines) == 5
        assert load_rcq_marks(exported) == load_rcq_marks(RCQ_CSV)

    def test_empty_rcq_export(self, store):
        assert store.export_rcq_csv().splitlines() == [
            ",".join(f'"{c}"' for c in RCQ_COLUMNS)
        ]

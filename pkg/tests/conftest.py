import random

import numpy as np
import pytest

from gapfill import ngram_lm

_acceptance_results: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    if report.when == "call":
        _acceptance_results.append((report.nodeid.split("::")[-1], report.outcome.upper()))
    elif report.when == "setup" and report.outcome == "skipped":
        _acceptance_results.append((report.nodeid.split("::")[-1], "SKIPPED"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in _acceptance_results:
        terminalreporter.write_line(f"ACCEPTANCE {name}: {outcome}")

# Small word stock for generated corpora: content words plus a few
# stop-words so tokenized sentences exercise eligibility rules.
CONTENT_WORDS = [
    "wombat", "granite", "harbor", "violin", "meadow", "copper", "lantern",
    "orchid", "thunder", "biscuit", "glacier", "pepper", "saddle", "willow",
    "magnet", "parrot", "tunnel", "velvet", "anchor", "barrel", "candle",
    "dagger", "ember", "falcon", "goblet", "hammer", "island", "jacket",
    "kettle", "ladder", "marble", "needle", "oyster", "puzzle", "quiver",
    "ribbon", "sparrow", "trumpet", "umbrella", "vulture",
]
STOP_FILLERS = ["the", "a", "of", "and", "in", "to", "was", "is"]


def make_sentence(rng: random.Random, n_words: int) -> list[str]:
    """Alternating-ish stopword/content sentence over the fixed stock."""
    out = []
    for _ in range(n_words):
        if rng.random() < 0.4:
            out.append(rng.choice(STOP_FILLERS))
        else:
            # zipf-ish skew so the LM has something to learn
            idx = min(int(rng.expovariate(0.12)), len(CONTENT_WORDS) - 1)
            out.append(CONTENT_WORDS[idx])
    return out


def make_corpus(rng: random.Random, n_sentences: int) -> list[list[str]]:
    return [make_sentence(rng, rng.randint(4, 14)) for _ in range(n_sentences)]


@pytest.fixture(scope="session")
def toy_corpus() -> list[list[str]]:
    return make_corpus(random.Random(1234), 600)


@pytest.fixture(scope="session")
def toy_model(toy_corpus) -> ngram_lm.NGramModel:
    return ngram_lm.train(toy_corpus, min_count=2)


def softmax2(scores: np.ndarray) -> np.ndarray:
    shifted = np.exp2(scores - scores.max())
    return shifted / shifted.sum()


SYSTEMS = {"alpha": 0.05, "bravo": 0.12, "charlie": 0.25, "delta": 0.40}


def perturb(rng: random.Random, words: list[str], rate: float) -> list[str]:
    """Synthetic MT: replace word tokens at the system's error rate."""
    out = []
    for w in words:
        if rng.random() < rate:
            out.append(rng.choice(CONTENT_WORDS))
        else:
            out.append(w)
    return out


def make_bundles(seed: int, n_docs: int, systems=SYSTEMS) -> dict:
    """Synthetic document bundles with per-system perturbed MT outputs."""
    from gapfill.corpus import DocumentBundle, Question, QType, SentenceRef

    rng = random.Random(seed)
    bundles = {}
    for d in range(n_docs):
        doc_id = f"doc{d:03d}"
        n_sents = rng.randint(4, 8)
        ref_words = [make_sentence(rng, rng.randint(7, 14)) for _ in range(n_sents)]
        reference = tuple(
            SentenceRef.from_raw(" ".join(ws) + " .") for ws in ref_words
        )
        mt_outputs = {}
        for system, rate in systems.items():
            mt_outputs[system] = tuple(
                SentenceRef.from_raw(" ".join(perturb(rng, ws, rate)) + " .")
                for ws in ref_words
            )
        questions = (
            Question("What happened first?", QType.LITERAL),
            Question("How do the parts relate?", QType.REORGANIZATION),
            Question("What would follow?", QType.INFERENCE),
        )
        bundles[doc_id] = DocumentBundle(
            doc_id=doc_id,
            reference=reference,
            mt_outputs=mt_outputs,
            questions=questions,
        )
    return bundles


@pytest.fixture(scope="session")
def toy_bundles() -> dict:
    return make_bundles(seed=555, n_docs=12)

"""Document bundles, tokenization, and answer normalization.

A bundle holds one source document's reference translation, the per-system
MT outputs (pre-aligned sentence by sentence), and its comprehension
questions.  Everything downstream consumes the token sequences produced
here, so tokenization must stay deterministic and versioned with the
bundled stop-word list.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

from .errors import ParseError, ValidationError


class TokenKind(str, Enum):
    WORD = "word"
    PUNCTUATION = "punctuation"


class QType(str, Enum):
    LITERAL = "literal"
    REORGANIZATION = "reorganization"
    INFERENCE = "inference"


@dataclass(frozen=True)
class Token:
    surface: str
    kind: TokenKind
    is_stopword: bool

    def __post_init__(self) -> None:
        if not self.surface:
            raise ValidationError("empty token surface")


@dataclass(frozen=True)
class SentenceRef:
    raw: str
    tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValidationError(f"sentence has no tokens: {self.raw!r}")

    @classmethod
    def from_raw(cls, raw: str) -> "SentenceRef":
        return cls(raw=raw, tokens=tuple(tokenize(raw)))

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]


@dataclass(frozen=True)
class Question:
    text: str
    qtype: QType


@dataclass(frozen=True)
class DocumentBundle:
    doc_id: str
    reference: tuple[SentenceRef, ...]
    mt_outputs: dict[str, tuple[SentenceRef, ...]] = field(default_factory=dict)
    questions: tuple[Question, ...] = ()
    source_text: str | None = None


def _load_stopwords() -> frozenset[str]:
    text = resources.files("gapfill.data").joinpath("stopwords_en.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


STOPWORDS: frozenset[str] = _load_stopwords()


def _is_punct_char(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def classify(surface: str) -> Token:
    """Classify a split-out surface into a word or punctuation token.

    Punctuation tokens always carry is_stopword=False; word tokens are
    stop-words iff their lower-cased surface is on the bundled list.
    """
    if all(_is_punct_char(c) for c in surface):
        return Token(surface, TokenKind.PUNCTUATION, False)
    return Token(surface, TokenKind.WORD, surface.lower() in STOPWORDS)


def tokenize(raw: str) -> list[Token]:
    """Deterministic whitespace tokenizer.

    Splits on whitespace, then detaches leading/trailing punctuation
    characters into their own single-character tokens.  Internal hyphens
    and apostrophes stay inside the word ("don't", "state-of-the-art").
    """
    tokens: list[Token] = []
    for chunk in raw.split():
        lead: list[str] = []
        trail: list[str] = []
        start, end = 0, len(chunk)
        while start < end and _is_punct_char(chunk[start]):
            lead.append(chunk[start])
            start += 1
        while end > start and _is_punct_char(chunk[end - 1]):
            trail.append(chunk[end - 1])
            end -= 1
        tokens.extend(classify(c) for c in lead)
        if end > start:
            tokens.append(classify(chunk[start:end]))
        tokens.extend(classify(c) for c in reversed(trail))
    return tokens


def normalize_answer(s: str) -> str:
    """Canonical form used for comparing gap fills: NFC, lower-case,
    whitespace trimmed and collapsed.  Idempotent."""
    s = unicodedata.normalize("NFC", s).lower()
    s = unicodedata.normalize("NFC", s)
    return " ".join(s.split())


def _require(obj: dict, key: str, typ: type, where: str):
    if key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, typ):
        raise ParseError(f"{where}: field {key!r} must be {typ.__name__}")
    return value


def _reject_duplicate_keys(pairs: list[tuple[str, object]]) -> dict:
    out: dict = {}
    for key, value in pairs:
        if key in out:
            raise ValidationError(f"duplicate key {key!r}")
        out[key] = value
    return out


def _sentences(raw_list: list, where: str) -> tuple[SentenceRef, ...]:
    refs = []
    for i, raw in enumerate(raw_list):
        if not isinstance(raw, str):
            raise ParseError(f"{where}[{i}]: sentence must be a string")
        toks = tokenize(raw)
        if not toks:
            raise ValidationError(f"{where}[{i}]: sentence has no tokens")
        refs.append(SentenceRef(raw=raw, tokens=tuple(toks)))
    return tuple(refs)


def load_bundle(data: bytes | str) -> DocumentBundle:
    """Parse and validate one bundle file (UTF-8 JSON)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data, object_pairs_hook=_reject_duplicate_keys)
    except ValidationError:
        raise
    except ValueError as e:
        raise ParseError(f"malformed bundle file: {e}") from e
    if not isinstance(obj, dict):
        raise ParseError("bundle file must contain a JSON object")

    doc_id = _require(obj, "doc_id", str, "bundle")
    if not doc_id:
        raise ValidationError("doc_id must be non-empty")
    reference = _sentences(_require(obj, "reference", list, "bundle"), "reference")
    if not reference:
        raise ValidationError(f"{doc_id}: empty reference translation")

    mt_outputs: dict[str, tuple[SentenceRef, ...]] = {}
    for system, sents in obj.get("mt", {}).items():
        if not isinstance(sents, list):
            raise ParseError(f"mt[{system!r}] must be an array of sentences")
        mt_outputs[system] = _sentences(sents, f"mt[{system!r}]")

    questions = []
    for i, q in enumerate(obj.get("questions", [])):
        if not isinstance(q, dict):
            raise ParseError(f"questions[{i}] must be an object")
        text = _require(q, "text", str, f"questions[{i}]")
        qtype_raw = _require(q, "qtype", str, f"questions[{i}]")
        try:
            qtype = QType(qtype_raw)
        except ValueError:
            raise ValidationError(f"questions[{i}]: unknown qtype {qtype_raw!r}") from None
        questions.append(Question(text=text, qtype=qtype))

    source_text = obj.get("source_text")
    if source_text is not None and not isinstance(source_text, str):
        raise ParseError("source_text must be a string")

    return DocumentBundle(
        doc_id=doc_id,
        reference=reference,
        mt_outputs=mt_outputs,
        questions=tuple(questions),
        source_text=source_text,
    )


def dump_bundle(bundle: DocumentBundle) -> bytes:
    obj = {
        "doc_id": bundle.doc_id,
        "reference": [s.raw for s in bundle.reference],
        "mt": {sys: [s.raw for s in sents] for sys, sents in bundle.mt_outputs.items()},
        "questions": [{"text": q.text, "qtype": q.qtype.value} for q in bundle.questions],
    }
    if bundle.source_text is not None:
        obj["source_text"] = bundle.source_text
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2).encode("utf-8")


def read_bundle(path) -> DocumentBundle:
    with open(path, "rb") as f:
        return load_bundle(f.read())


def load_corpus(paths) -> dict[str, DocumentBundle]:
    """Load a set of bundle files, enforcing doc_id uniqueness."""
    bundles: dict[str, DocumentBundle] = {}
    for path in paths:
        bundle = read_bundle(path)
        if bundle.doc_id in bundles:
            raise ValidationError(f"duplicate doc_id {bundle.doc_id!r} ({path})")
        bundles[bundle.doc_id] = bundle
    return bundles

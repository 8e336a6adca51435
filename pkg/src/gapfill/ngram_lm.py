"""Trigram language model with gap-posterior and gap-entropy queries.

Smoothing is interpolated Kneser-Ney with a fixed discount of 0.75,
stored in backoff form: each table row holds the full interpolated
probability for a seen n-gram, each context row holds the backoff weight
for unseen continuations.  The lowest (unigram) level interpolates with
the uniform distribution over the prediction vocabulary so that every
word, including UNK, keeps strictly positive mass.

Counts follow the usual continuation-count construction: the trigram
level uses raw counts; the bigram level uses the number of distinct
left-extensions of each bigram; the unigram level uses the number of
distinct words preceding each word in the raw text.  With that layout
every conditional distribution sums to exactly 1 over the prediction
vocabulary (all words plus UNK and EOS; BOS is context-only).
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import kernel
from .errors import EmptyCorpus, PositionOutOfRange, ValidationError

UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"

UNK_ID = 0
BOS_ID = 1
EOS_ID = 2

DISCOUNT = 0.75
ORDER = 3

# packed trigram keys (u*V + v)*V + w must fit in a signed 64-bit int
_MAX_VOCAB = (1 << 21) - 1

_FORMAT = "gapfill-ngram"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Vocabulary:
    """Dense token-id space with UNK/BOS/EOS specials at fixed ids."""

    surfaces: tuple[str, ...]
    id_of: dict[str, int] = field(repr=False)

    @classmethod
    def build(cls, words) -> "Vocabulary":
        surfaces = (UNK, BOS, EOS) + tuple(sorted(set(words) - {UNK, BOS, EOS}))
        return cls(surfaces=surfaces, id_of={s: i for i, s in enumerate(surfaces)})

    def __len__(self) -> int:
        return len(self.surfaces)

    def lookup(self, surface: str) -> int:
        return self.id_of.get(surface, UNK_ID)

    def surface_of(self, token_id: int) -> str:
        return self.surfaces[token_id]


@dataclass(frozen=True)
class GapPosterior:
    """Posterior over candidate fillers for one sentence position."""

    position: int
    token_ids: np.ndarray
    probs: np.ndarray

    def prob_map(self) -> dict[int, float]:
        return {int(t): float(p) for t, p in zip(self.token_ids, self.probs)}

    def argmax_id(self) -> int:
        # ties broken by lowest candidate id (token_ids is ascending)
        return int(self.token_ids[int(np.argmax(self.probs))])


@dataclass
class NGramModel:
    vocab: Vocabulary
    uni_logp: np.ndarray
    bi_keys: np.ndarray
    bi_logp: np.ndarray
    bi_ctx_keys: np.ndarray
    bi_ctx_bow: np.ndarray
    tri_keys: np.ndarray
    tri_logp: np.ndarray
    tri_ctx_keys: np.ndarray
    tri_ctx_bow: np.ndarray
    discount: float = DISCOUNT
    order: int = ORDER

    def __post_init__(self) -> None:
        self._candidates = np.array(
            [UNK_ID] + list(range(3, len(self.vocab))), dtype=np.int64
        )
        self._pred_ids = np.array(
            [UNK_ID, EOS_ID] + list(range(3, len(self.vocab))), dtype=np.int64
        )

    # -- id plumbing ---------------------------------------------------

    @property
    def candidate_ids(self) -> np.ndarray:
        """Gap candidates: every vocabulary word incl. UNK, never BOS/EOS."""
        return self._candidates

    @property
    def prediction_ids(self) -> np.ndarray:
        """Event space of every conditional distribution (BOS excluded)."""
        return self._pred_ids

    def ids(self, tokens) -> list[int]:
        return [self.vocab.lookup(t) for t in tokens]

    def _stream(self, token_ids) -> np.ndarray:
        return np.array([BOS_ID, BOS_ID, *token_ids, EOS_ID], dtype=np.int64)

    def _tables(self) -> tuple:
        return (
            self.tri_keys,
            self.tri_logp,
            self.tri_ctx_keys,
            self.tri_ctx_bow,
            self.bi_keys,
            self.bi_logp,
            self.bi_ctx_keys,
            self.bi_ctx_bow,
            self.uni_logp,
            len(self.vocab),
        )

    # -- queries -------------------------------------------------------

    def conditional_logprob(self, context, token_id: int) -> float:
        """log2 p(token | context) for a context of 0, 1, or 2 token ids."""
        ctx = list(context)
        if len(ctx) == 2:
            out = kernel.logp_vec(ctx[0], ctx[1], token_id, *self._tables())
        elif len(ctx) == 1:
            out = kernel.logp2_vec(
                ctx[0],
                token_id,
                self.bi_keys,
                self.bi_logp,
                self.bi_ctx_keys,
                self.bi_ctx_bow,
                self.uni_logp,
                len(self.vocab),
            )
        elif len(ctx) == 0:
            return float(self.uni_logp[token_id])
        else:
            raise ValidationError("context longer than order-1")
        return float(out)

    def conditional_distribution(self, context) -> tuple[np.ndarray, np.ndarray]:
        """(prediction ids, probabilities) for a 2-token-id context."""
        u, v = context
        logp = kernel.logp_vec(u, v, self._pred_ids, *self._tables())
        return self._pred_ids, np.exp2(logp)

    def sentence_logprob(self, tokens) -> float:
        """log2 probability of the token sequence with BOS/EOS padding."""
        s = self._stream(self.ids(tokens))
        logp = kernel.logp_vec(s[:-2], s[1:-1], s[2:], *self._tables())
        return float(logp.sum())

    def gap_scores(self, token_ids, k: int) -> tuple[np.ndarray, np.ndarray]:
        """(candidate ids, unnormalized log2 scores) at token position k."""
        s = self._stream(token_ids)
        scores = kernel.gap_scores(s, k + 2, self._candidates, *self._tables())
        return self._candidates, scores

    def gap_posterior(self, tokens, k: int) -> GapPosterior:
        """Posterior over candidate fillers at position k of the sentence.

        Equal to renormalizing the full-sentence probability with
        position k replaced by each candidate; only the three conditional
        terms spanning k are recomputed, the rest cancel.
        """
        tokens = list(tokens)
        if not 0 <= k < len(tokens):
            raise PositionOutOfRange(f"position {k} outside sentence of {len(tokens)} tokens")
        cands, scores = self.gap_scores(self.ids(tokens), k)
        shifted = np.exp2(scores - scores.max())
        return GapPosterior(position=k, token_ids=cands, probs=shifted / shifted.sum())

    def gap_entropy(self, tokens, k: int) -> float:
        """Shannon entropy (bits) of the gap posterior at position k."""
        post = self.gap_posterior(tokens, k)
        p = post.probs
        # 0 * log 0 == 0 (degenerate posteriors are legal)
        h = -float(np.sum(np.where(p > 0.0, p * np.log2(np.where(p > 0.0, p, 1.0)), 0.0)))
        return max(h, 0.0)


def train(sentences, min_count: int = 2) -> NGramModel:
    """Train the trigram model on an iterable of token-surface sequences.

    Tokens seen fewer than ``min_count`` times fold into UNK before any
    counting.  The special surfaces <unk>/<s>/</s> are reserved and fold
    into UNK if they occur as corpus tokens.
    """
    if min_count < 1:
        raise ValidationError("min_count must be >= 1")
    sents = [list(s) for s in sentences]
    if not sents:
        raise EmptyCorpus("no sentences to train on")

    freq = Counter(tok for sent in sents for tok in sent)
    words = [w for w, c in freq.items() if c >= min_count and w not in (UNK, BOS, EOS)]
    vocab = Vocabulary.build(words)
    V = len(vocab)
    if V > _MAX_VOCAB:
        raise ValidationError(f"vocabulary of {V} exceeds packed-key capacity {_MAX_VOCAB}")

    tri: Counter = Counter()
    tri_pred: defaultdict = defaultdict(set)  # (v, w) -> distinct u
    uni_pred: defaultdict = defaultdict(set)  # w -> distinct v (raw bigrams)
    for sent in sents:
        s = [BOS_ID, BOS_ID, *(vocab.lookup(t) for t in sent), EOS_ID]
        for i in range(2, len(s)):
            u, v, w = s[i - 2], s[i - 1], s[i]
            tri[(u, v, w)] += 1
            tri_pred[(v, w)].add(u)
            uni_pred[w].add(v)

    D = DISCOUNT
    n_pred = V - 1  # BOS is never predicted

    # unigram level: continuation counts over raw bigrams, interpolated
    # with the uniform distribution so UNK always has mass
    c1 = np.zeros(V, dtype=np.float64)
    for w, preds in uni_pred.items():
        c1[w] = len(preds)
    c1[BOS_ID] = 0.0
    total1 = c1.sum()
    types1 = float(np.count_nonzero(c1))
    p1 = np.maximum(c1 - D, 0.0) / total1 + (D * types1 / total1) / n_pred
    p1[BOS_ID] = 0.0
    with np.errstate(divide="ignore"):
        uni_logp = np.log2(p1)

    # bigram level over continuation counts
    ctx2_total: Counter = Counter()
    ctx2_types: Counter = Counter()
    for (v, w), us in tri_pred.items():
        ctx2_total[v] += len(us)
        ctx2_types[v] += 1
    bi_p: dict[tuple[int, int], float] = {}
    for (v, w), us in tri_pred.items():
        bow = D * ctx2_types[v] / ctx2_total[v]
        bi_p[(v, w)] = (len(us) - D) / ctx2_total[v] + bow * p1[w]
    bi_bow = {v: D * ctx2_types[v] / ctx2_total[v] for v in ctx2_total}

    # trigram level over raw counts
    ctx3_total: Counter = Counter()
    ctx3_types: Counter = Counter()
    for (u, v, w), c in tri.items():
        ctx3_total[(u, v)] += c
        ctx3_types[(u, v)] += 1
    tri_p: dict[tuple[int, int, int], float] = {}
    for (u, v, w), c in tri.items():
        bow = D * ctx3_types[(u, v)] / ctx3_total[(u, v)]
        tri_p[(u, v, w)] = (c - D) / ctx3_total[(u, v)] + bow * bi_p[(v, w)]
    tri_bow = {ctx: D * ctx3_types[ctx] / ctx3_total[ctx] for ctx in ctx3_total}

    def _packed(table: dict, pack) -> tuple[np.ndarray, np.ndarray]:
        items = sorted((pack(k), np.log2(p)) for k, p in table.items())
        keys = np.array([k for k, _ in items], dtype=np.int64)
        vals = np.array([v for _, v in items], dtype=np.float64)
        return keys, vals

    bi_keys, bi_logp = _packed(bi_p, lambda k: k[0] * V + k[1])
    bi_ctx_keys, bi_ctx_bow = _packed(bi_bow, lambda v: v)
    tri_keys, tri_logp = _packed(tri_p, lambda k: (k[0] * V + k[1]) * V + k[2])
    tri_ctx_keys, tri_ctx_bow = _packed(tri_bow, lambda k: k[0] * V + k[1])

    return NGramModel(
        vocab=vocab,
        uni_logp=uni_logp,
        bi_keys=bi_keys,
        bi_logp=bi_logp,
        bi_ctx_keys=bi_ctx_keys,
        bi_ctx_bow=bi_ctx_bow,
        tri_keys=tri_keys,
        tri_logp=tri_logp,
        tri_ctx_keys=tri_ctx_keys,
        tri_ctx_bow=tri_ctx_bow,
    )


def save(model: NGramModel, path, manifest: dict | None = None) -> None:
    """Serialize to a versioned .npz; float tables round-trip bit-for-bit."""
    meta = {
        "format": _FORMAT,
        "version": _FORMAT_VERSION,
        "order": model.order,
        "discount": model.discount,
        "surfaces": list(model.vocab.surfaces),
        "manifest": manifest or {},
    }
    meta_bytes = np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    with open(path, "wb") as f:
        np.savez(
            f,
            meta=meta_bytes,
            uni_logp=model.uni_logp,
            bi_keys=model.bi_keys,
            bi_logp=model.bi_logp,
            bi_ctx_keys=model.bi_ctx_keys,
            bi_ctx_bow=model.bi_ctx_bow,
            tri_keys=model.tri_keys,
            tri_logp=model.tri_logp,
            tri_ctx_keys=model.tri_ctx_keys,
            tri_ctx_bow=model.tri_ctx_bow,
        )


def load(path) -> NGramModel:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        if meta.get("format") != _FORMAT:
            raise ValidationError(f"not a {_FORMAT} file: {path}")
        if meta.get("version") != _FORMAT_VERSION:
            raise ValidationError(f"unsupported model version {meta.get('version')}")
        surfaces = tuple(meta["surfaces"])
        vocab = Vocabulary(surfaces=surfaces, id_of={s: i for i, s in enumerate(surfaces)})
        return NGramModel(
            vocab=vocab,
            uni_logp=data["uni_logp"],
            bi_keys=data["bi_keys"],
            bi_logp=data["bi_logp"],
            bi_ctx_keys=data["bi_ctx_keys"],
            bi_ctx_bow=data["bi_ctx_bow"],
            tri_keys=data["tri_keys"],
            tri_logp=data["tri_logp"],
            tri_ctx_keys=data["tri_ctx_keys"],
            tri_ctx_bow=data["tri_ctx_bow"],
            discount=meta["discount"],
            order=meta["order"],
        )


def load_manifest(path) -> dict:
    """Read back the manifest embedded at save time."""
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
    return meta.get("manifest", {})

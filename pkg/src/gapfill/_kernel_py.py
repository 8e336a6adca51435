"""NumPy fallback for the compiled query kernel.

Both backends answer backoff trigram queries against the flat model tables:
sorted packed int64 key arrays plus aligned log2 value arrays.  A trigram
key packs as (u*V + v)*V + w, a bigram key as v*V + w, so a query is a
binary search per table level.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _probe(keys: np.ndarray, vals: np.ndarray, q: np.ndarray):
    """Vectorized sorted-array lookup: (hit mask, value-where-hit)."""
    if keys.size == 0:
        zeros = np.zeros(q.shape, dtype=np.float64)
        return np.zeros(q.shape, dtype=bool), zeros
    idx = np.searchsorted(keys, q)
    idx_c = np.minimum(idx, keys.size - 1)
    hit = keys[idx_c] == q
    return hit, np.where(hit, vals[idx_c], 0.0)


def logp2_vec(
    v,
    w,
    bi_keys,
    bi_logp,
    bi_ctx_keys,
    bi_ctx_bow,
    uni_logp,
    V: int,
):
    """log2 p(w | v) with backoff to the unigram table."""
    v = np.asarray(v, dtype=np.int64)
    w = np.asarray(w, dtype=np.int64)
    v, w = np.broadcast_arrays(v, w)
    hit2, p2 = _probe(bi_keys, bi_logp, v * V + w)
    hitc2, bow2 = _probe(bi_ctx_keys, bi_ctx_bow, v)
    # unseen context: back off with weight 1 (log 0 contribution)
    return np.where(hit2, p2, np.where(hitc2, bow2, 0.0) + uni_logp[w])


def logp_vec(
    u,
    v,
    w,
    tri_keys,
    tri_logp,
    tri_ctx_keys,
    tri_ctx_bow,
    bi_keys,
    bi_logp,
    bi_ctx_keys,
    bi_ctx_bow,
    uni_logp,
    V: int,
):
    """log2 p(w | u, v) with the full backoff chain."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    w = np.asarray(w, dtype=np.int64)
    u, v, w = np.broadcast_arrays(u, v, w)
    hit3, p3 = _probe(tri_keys, tri_logp, (u * V + v) * V + w)
    hitc3, bow3 = _probe(tri_ctx_keys, tri_ctx_bow, u * V + v)
    low = logp2_vec(v, w, bi_keys, bi_logp, bi_ctx_keys, bi_ctx_bow, uni_logp, V)
    return np.where(hit3, p3, np.where(hitc3, bow3, 0.0) + low)


def gap_scores(
    stream,
    kpos: int,
    cands,
    tri_keys,
    tri_logp,
    tri_ctx_keys,
    tri_ctx_bow,
    bi_keys,
    bi_logp,
    bi_ctx_keys,
    bi_ctx_bow,
    uni_logp,
    V: int,
):
    """Unnormalized log2 posterior scores for every candidate filling
    position ``kpos`` of the padded id stream.

    Only the conditional terms whose trigram window spans ``kpos``
    (positions kpos, kpos+1, kpos+2) depend on the candidate; all other
    sentence terms are candidate-independent and cancel on normalization.
    """
    stream = np.asarray(stream, dtype=np.int64)
    cands = np.asarray(cands, dtype=np.int64)
    tables = (
        tri_keys,
        tri_logp,
        tri_ctx_keys,
        tri_ctx_bow,
        bi_keys,
        bi_logp,
        bi_ctx_keys,
        bi_ctx_bow,
        uni_logp,
        V,
    )
    n = stream.shape[0]
    scores = logp_vec(stream[kpos - 2], stream[kpos - 1], cands, *tables)
    if kpos + 1 < n:
        scores = scores + logp_vec(stream[kpos - 1], cands, stream[kpos + 1], *tables)
    if kpos + 2 < n:
        scores = scores + logp_vec(cands, stream[kpos + 1], stream[kpos + 2], *tables)
    return scores

"""Link probability heads, negative-sampling losses, and the joint objective.

A directed social link from i to j is scored by the dot product of i's
initiator embedding with j's recipient embedding through a sigmoid; an anchor
link is scored symmetrically on the concatenation of both roles.  Each
log-likelihood term sums log p over positives and log(1 - p) over sampled
negatives.  The trained quantity is the negated sum of the two social
objectives and alpha times the anchor objective, plus beta times an L2
penalty over all weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import sigmoid_np
from .errors import ShapeError
from .model import EmbeddingTable, ModelParams, iter_params

__all__ = [
    "PROB_EPS",
    "LossBreakdown",
    "social_prob",
    "anchor_prob",
    "social_loss",
    "anchor_loss",
    "regularizer",
    "apply_feature_roles",
    "total_loss",
    "write_loss_trace",
]

PROB_EPS = 1e-12  # probability clamp before logarithms


@dataclass(frozen=True)
class LossBreakdown:
    """Components of one objective evaluation.

    ``soc1``, ``soc2`` and ``anchor`` are the (maximized) log-likelihood
    objectives; ``reg`` is the L2 penalty; ``total`` is the minimized value
    -(soc1 + soc2 + alpha * anchor) + beta * reg.
    """

    soc1: float
    soc2: float
    anchor: float
    reg: float
    total: float

    def finite(self) -> bool:
        return all(np.isfinite(v) for v in (self.soc1, self.soc2, self.anchor, self.reg, self.total))


def social_prob(u_in: np.ndarray, w_re: np.ndarray) -> float:
    """Formation probability of a directed social link: sigmoid(u_in . w_re)."""
    u_in = np.asarray(u_in, dtype=np.float64)
    w_re = np.asarray(w_re, dtype=np.float64)
    if u_in.shape != w_re.shape or u_in.ndim != 1:
        raise ShapeError(f"social_prob: {u_in.shape} vs {w_re.shape}")
    return float(sigmoid_np(np.dot(u_in, w_re)))


def anchor_prob(u_in: np.ndarray, u_re: np.ndarray, v_in: np.ndarray, v_re: np.ndarray) -> float:
    """Anchor probability: sigmoid((u_in || u_re) . (v_in || v_re)), symmetric."""
    u = np.concatenate([np.asarray(u_in, dtype=np.float64), np.asarray(u_re, dtype=np.float64)])
    v = np.concatenate([np.asarray(v_in, dtype=np.float64), np.asarray(v_re, dtype=np.float64)])
    if u.shape != v.shape:
        raise ShapeError(f"anchor_prob: {u.shape} vs {v.shape}")
    return float(sigmoid_np(np.dot(u, v)))


def _clamped_log(p: np.ndarray) -> np.ndarray:
    return np.log(np.clip(p, PROB_EPS, 1.0 - PROB_EPS))


def _social_scores(links: np.ndarray, emb_in: np.ndarray, emb_re: np.ndarray) -> np.ndarray:
    links = np.asarray(links, dtype=np.int64).reshape(-1, 2)
    if links.shape[0] == 0:
        return np.empty(0)
    z = np.sum(emb_in[links[:, 0]] * emb_re[links[:, 1]], axis=1)
    return sigmoid_np(z)


def _anchor_scores(links: np.ndarray, net1: tuple, net2: tuple) -> np.ndarray:
    links = np.asarray(links, dtype=np.int64).reshape(-1, 2)
    if links.shape[0] == 0:
        return np.empty(0)
    in1, re1 = net1
    in2, re2 = net2
    z = (np.sum(in1[links[:, 0]] * in2[links[:, 1]], axis=1)
         + np.sum(re1[links[:, 0]] * re2[links[:, 1]], axis=1))
    return sigmoid_np(z)


def social_loss(pos: np.ndarray, neg: np.ndarray, emb_in: np.ndarray, emb_re: np.ndarray) -> float:
    """Negative-sampling social objective: sum log p(pos) + sum log(1 - p(neg))."""
    p_pos = _social_scores(pos, emb_in, emb_re)
    p_neg = _social_scores(neg, emb_in, emb_re)
    return float(np.sum(_clamped_log(p_pos)) + np.sum(_clamped_log(1.0 - p_neg)))


def anchor_loss(pos: np.ndarray, neg: np.ndarray, emb: EmbeddingTable) -> float:
    """Same form as :func:`social_loss` over anchor probabilities."""
    p_pos = _anchor_scores(pos, emb.net(0), emb.net(1))
    p_neg = _anchor_scores(neg, emb.net(0), emb.net(1))
    return float(np.sum(_clamped_log(p_pos)) + np.sum(_clamped_log(1.0 - p_neg)))


def regularizer(params: ModelParams) -> float:
    """L2 penalty: sum of squared entries of every weight matrix and vector."""
    return float(sum(np.sum(arr * arr) for _, arr in iter_params(params)))


def apply_feature_roles(emb: EmbeddingTable, feature_roles: str) -> EmbeddingTable:
    """Single-role ablation: replace one role's embeddings by the other's."""
    if feature_roles == "both":
        return emb
    if feature_roles == "initiator-only":
        return EmbeddingTable(emb.net1_in, emb.net1_in, emb.net2_in, emb.net2_in)
    if feature_roles == "recipient-only":
        return EmbeddingTable(emb.net1_re, emb.net1_re, emb.net2_re, emb.net2_re)
    raise ValueError(f"unknown feature_roles {feature_roles!r}")


def total_loss(split, emb: EmbeddingTable, params: ModelParams, alpha: float, beta: float,
               feature_roles: str = "both") -> LossBreakdown:
    """Joint objective over the train partition of ``split``.

    Returns all components; ``total`` is the minimized quantity.
    """
    emb = apply_feature_roles(emb, feature_roles)
    l1 = social_loss(split.pos_soc1.train, split.neg_soc1.train, emb.net1_in, emb.net1_re)
    l2 = social_loss(split.pos_soc2.train, split.neg_soc2.train, emb.net2_in, emb.net2_re)
    la = anchor_loss(split.pos_anchor.train, split.neg_anchor.train, emb)
    reg = regularizer(params)
    total = -(l1 + l2 + alpha * la) + beta * reg
    return LossBreakdown(soc1=l1, soc2=l2, anchor=la, reg=reg, total=total)


def write_loss_trace(trace: list[LossBreakdown], path_or_file) -> None:
    """Append-style CSV: epoch,l_soc1,l_soc2,l_anchor,l_reg,total."""
    own = isinstance(path_or_file, str)
    fh = open(path_or_file, "w", encoding="utf-8") if own else path_or_file
    try:
        fh.write("epoch,l_soc1,l_soc2,l_anchor,l_reg,total\n")
        for epoch, b in enumerate(trace):
            fh.write(f"{epoch},{b.soc1!r},{b.soc2!r},{b.anchor!r},{b.reg!r},{b.total!r}\n")
    finally:
        if own:
            fh.close()

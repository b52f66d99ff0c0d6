"""Attention coefficients over mixed same-network / cross-network neighborhoods.

Every node carries two feature vectors, one per directed role: an initiator
vector (how it behaves as a follower) and a recipient vector (how it is
followed).  Four raw attention scores arise from crossing the two roles with
the two neighbor kinds (same-network social neighbors, cross-network anchor
partners).  All scores for one target node and one role are normalized with
a single softmax over the union of its social neighbors and anchor partners,
so the two neighbor kinds compete for the same unit of attention mass.

These are per-node reference implementations; the model layer in
:mod:`alignet.model` computes the same quantities vectorized over all edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyNeighborhoodError, ShapeError

__all__ = [
    "AttentionParams",
    "ContributionMode",
    "leaky_relu",
    "raw_intra_initiator",
    "raw_intra_recipient",
    "raw_inter_initiator",
    "raw_inter_recipient",
    "normalize",
    "coefficient_sets",
]


def leaky_relu(x: float, slope: float = 0.2) -> float:
    """Coefficient nonlinearity; slope 0.2 is the conventional choice."""
    return float(x) if x >= 0.0 else slope * float(x)


@dataclass
class AttentionParams:
    """Per-network attention weights for one head.

    ``w_in``/``w_re`` project this network's own initiator/recipient features
    (shape d' x d_own).  ``w_in_cross``/``w_re_cross`` project the partner
    network's features when information crosses an anchor (shape d' x
    d_other).  The ``a_*`` score vectors have length 2 d': the first half is
    applied to the target-node block, the second to the neighbor block.
    """

    w_in: np.ndarray
    w_re: np.ndarray
    w_in_cross: np.ndarray
    w_re_cross: np.ndarray
    a_in: np.ndarray
    a_re: np.ndarray
    a_in_cross: np.ndarray
    a_re_cross: np.ndarray

    def out_dim(self) -> int:
        return self.w_in.shape[0]

    def tensors(self) -> dict[str, np.ndarray]:
        return {
            "w_in": self.w_in,
            "w_re": self.w_re,
            "w_in_cross": self.w_in_cross,
            "w_re_cross": self.w_re_cross,
            "a_in": self.a_in,
            "a_re": self.a_re,
            "a_in_cross": self.a_in_cross,
            "a_re_cross": self.a_re_cross,
        }

    def validate(self) -> None:
        dp = self.out_dim()
        for name, t in self.tensors().items():
            if name.startswith("w") and (t.ndim != 2 or t.shape[0] != dp):
                raise ShapeError(f"{name}: expected ({dp}, d) matrix, got {t.shape}")
            if name.startswith("a") and t.shape != (2 * dp,):
                raise ShapeError(f"{name}: expected length-{2 * dp} vector, got {t.shape}")
            if not np.isfinite(t).all():
                raise ShapeError(f"{name}: contains non-finite entries")


@dataclass(frozen=True)
class ContributionMode:
    """Which feature role a neighbor contributes to each target role.

    ``social`` and ``anchor`` each take "cross" (neighbor's opposite-role
    features feed the target role) or "direct" (same-role features feed it).
    The default, social-cross + anchor-direct, is the configuration the
    scoring formulas below are written in.
    """

    social: str = "cross"
    anchor: str = "direct"

    def __post_init__(self):
        for axis, value in (("social", self.social), ("anchor", self.anchor)):
            if value not in ("cross", "direct"):
                raise ValueError(f"{axis} mode must be 'cross' or 'direct', got {value!r}")

    @classmethod
    def parse(cls, label: str) -> "ContributionMode":
        """Parse compact labels like "sc+ad" (social-cross + anchor-direct)."""
        try:
            s, a = label.lower().split("+")
            social = {"sc": "cross", "sd": "direct"}[s]
            anchor = {"ac": "cross", "ad": "direct"}[a]
        except (ValueError, KeyError):
            raise ValueError(f"mode label must look like 'sc+ad', got {label!r}") from None
        return cls(social=social, anchor=anchor)

    def label(self) -> str:
        s = "sc" if self.social == "cross" else "sd"
        a = "ac" if self.anchor == "cross" else "ad"
        return f"{s}+{a}"


def _score(a: np.ndarray, left: np.ndarray, right: np.ndarray, slope: float) -> float:
    dp = left.shape[0]
    if a.shape != (2 * dp,) or right.shape != (dp,):
        raise ShapeError(
            f"score: a {a.shape}, left {left.shape}, right {right.shape} are inconsistent"
        )
    return leaky_relu(float(a[:dp] @ left + a[dp:] @ right), slope)


def _project(w: np.ndarray, x: np.ndarray) -> np.ndarray:
    if w.ndim != 2 or x.ndim != 1 or w.shape[1] != x.shape[0]:
        raise ShapeError(f"projection: matrix {w.shape} does not apply to vector {x.shape}")
    return w @ x


def raw_intra_initiator(params: AttentionParams, u_i_in: np.ndarray, u_j_re: np.ndarray,
                        slope: float = 0.2) -> float:
    """sigma(a_in . [W_in u_i_in || W_re u_j_re]) for a followed neighbor j."""
    return _score(params.a_in, _project(params.w_in, np.asarray(u_i_in, dtype=np.float64)),
                  _project(params.w_re, np.asarray(u_j_re, dtype=np.float64)), slope)


def raw_intra_recipient(params: AttentionParams, u_i_re: np.ndarray, u_j_in: np.ndarray,
                        slope: float = 0.2) -> float:
    """sigma(a_re . [W_re u_i_re || W_in u_j_in]) for a following neighbor j."""
    return _score(params.a_re, _project(params.w_re, np.asarray(u_i_re, dtype=np.float64)),
                  _project(params.w_in, np.asarray(u_j_in, dtype=np.float64)), slope)


def raw_inter_initiator(params: AttentionParams, u_i_in: np.ndarray, v_j_in: np.ndarray,
                        slope: float = 0.2) -> float:
    """sigma(a_in_cross . [W_in u_i_in || W_in_cross v_j_in]) for an anchor partner."""
    return _score(params.a_in_cross, _project(params.w_in, np.asarray(u_i_in, dtype=np.float64)),
                  _project(params.w_in_cross, np.asarray(v_j_in, dtype=np.float64)), slope)


def raw_inter_recipient(params: AttentionParams, u_i_re: np.ndarray, v_j_re: np.ndarray,
                        slope: float = 0.2) -> float:
    """sigma(a_re_cross . [W_re u_i_re || W_re_cross v_j_re]) for an anchor partner."""
    return _score(params.a_re_cross, _project(params.w_re, np.asarray(u_i_re, dtype=np.float64)),
                  _project(params.w_re_cross, np.asarray(v_j_re, dtype=np.float64)), slope)


def normalize(raw_intra: dict, raw_inter: dict) -> tuple[dict, dict]:
    """Joint softmax over the union of social neighbors and anchor partners.

    Numerically stabilized by subtracting the overall max before
    exponentiation.  Raises :class:`EmptyNeighborhoodError` when both maps
    are empty; callers treat that node's aggregate as a zero vector.
    """
    if not raw_intra and not raw_inter:
        raise EmptyNeighborhoodError("softmax over an empty neighbor/partner union")
    m = max(list(raw_intra.values()) + list(raw_inter.values()))
    exp_intra = {k: np.exp(v - m) for k, v in raw_intra.items()}
    exp_inter = {k: np.exp(v - m) for k, v in raw_inter.items()}
    total = sum(exp_intra.values()) + sum(exp_inter.values())
    return (
        {k: float(v / total) for k, v in exp_intra.items()},
        {k: float(v / total) for k, v in exp_inter.items()},
    )


def coefficient_sets(
    pair,
    features,
    params: AttentionParams,
    mode: ContributionMode,
    role: str,
    net: int,
    node: int,
    slope: float = 0.2,
) -> tuple[dict, dict]:
    """Normalized attention weights of one node, for one role, under a mode.

    For role "in" the social neighborhood is the node's followees, for role
    "re" its followers; anchor partners are attended in both roles.  The mode
    decides which feature role of the neighbor enters the score: under
    social-cross / anchor-direct the scores are exactly the raw_* functions
    above; the other modes swap the neighbor-side feature role (and its
    projection matrix) while the attended sets stay the same.

    Returns ``(social_weights, partner_weights)`` keyed by neighbor node ids
    in their own networks.
    """
    if role not in ("in", "re"):
        raise ValueError(f"role must be 'in' or 're', got {role!r}")
    g = pair.graph(net)
    own_in, own_re = features.net(net)
    oth_in, oth_re = features.net(1 - net)

    tgt = own_in[node] if role == "in" else own_re[node]
    neighbors = g.out_neighbors(node) if role == "in" else g.in_neighbors(node)
    partners = pair.partners(net, node)

    # neighbor-side role under the mode: "cross" pairs opposite roles
    social_role = ("re" if role == "in" else "in") if mode.social == "cross" else role
    anchor_role = role if mode.anchor == "direct" else ("re" if role == "in" else "in")

    w_tgt = params.w_in if role == "in" else params.w_re
    a_soc = params.a_in if role == "in" else params.a_re
    a_anc = params.a_in_cross if role == "in" else params.a_re_cross
    w_soc = params.w_in if social_role == "in" else params.w_re
    w_anc = params.w_in_cross if anchor_role == "in" else params.w_re_cross
    soc_feats = own_in if social_role == "in" else own_re
    anc_feats = oth_in if anchor_role == "in" else oth_re

    left = _project(w_tgt, tgt)
    raw_soc = {
        int(j): _score(a_soc, left, _project(w_soc, soc_feats[j]), slope) for j in neighbors
    }
    raw_anc = {
        int(p): _score(a_anc, left, _project(w_anc, anc_feats[p]), slope) for p in partners
    }
    return normalize(raw_soc, raw_anc)

"""Embedding model: feature init, parameters, attention layers, forward pass.

The forward pass is two attention layers per network.  Layer 1 runs K
independent heads whose ELU outputs are concatenated; layer 2 is a single
head producing the final initiator and recipient embeddings.  Cross-network
terms in each layer read the other network's input to that same layer, so
both networks advance in lock step.

The layers are expressed in the tape ops of :mod:`alignet.autodiff`; the same
graph builder serves the value-only forward pass here and the gradient
computation in :mod:`alignet.train`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .attention import AttentionParams, ContributionMode
from .graphs import AlignedPair

__all__ = [
    "NodeFeatures",
    "EmbeddingTable",
    "ModelParams",
    "init_features",
    "init_params",
    "iter_params",
    "aggregate_initiator",
    "aggregate_recipient",
    "multi_head_layer",
    "forward",
    "write_embeddings",
]

NETS = (0, 1)
ROLES = ("in", "re")


@dataclass
class NodeFeatures:
    """Per-node initiator and recipient feature matrices for both networks."""

    net1_in: np.ndarray
    net1_re: np.ndarray
    net2_in: np.ndarray
    net2_re: np.ndarray

    def net(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        return (self.net1_in, self.net1_re) if i == 0 else (self.net2_in, self.net2_re)


@dataclass
class EmbeddingTable:
    """Final initiator/recipient embeddings for every node of both networks."""

    net1_in: np.ndarray
    net1_re: np.ndarray
    net2_in: np.ndarray
    net2_re: np.ndarray

    def net(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        return (self.net1_in, self.net1_re) if i == 0 else (self.net2_in, self.net2_re)

    @property
    def dim(self) -> int:
        return self.net1_in.shape[1]


def init_features(pair: AlignedPair, d_cap: int = 1024, projection_seed: int = 0) -> NodeFeatures:
    """Adjacency-indicator starting features from the message graph.

    A node's initiator vector is the indicator row of who it follows, its
    recipient vector the indicator of who follows it, so nodes sharing
    neighbors start out similar.  Networks larger than ``d_cap`` nodes get a
    fixed seeded Gaussian random projection down to ``d_cap`` columns.
    """
    mats = []
    for net in NETS:
        g = pair.graph(net)
        n = g.node_count
        out_ind = np.zeros((n, n), dtype=np.float64)
        in_ind = np.zeros((n, n), dtype=np.float64)
        if g.edge_count:
            out_ind[g.edges[:, 0], g.edges[:, 1]] = 1.0
            in_ind[g.edges[:, 1], g.edges[:, 0]] = 1.0
        if n > d_cap:
            rng = np.random.default_rng(projection_seed + net)
            proj = rng.standard_normal((n, d_cap)) / np.sqrt(d_cap)
            out_ind = out_ind @ proj
            in_ind = in_ind @ proj
        mats.extend([out_ind, in_ind])
    return NodeFeatures(*mats)


@dataclass
class ModelParams:
    """All trainable weights: K layer-1 heads and one layer-2 head per network."""

    layer1: tuple[tuple[AttentionParams, ...], tuple[AttentionParams, ...]]
    layer2: tuple[tuple[AttentionParams, ...], tuple[AttentionParams, ...]]

    @property
    def heads(self) -> int:
        return len(self.layer1[0])

    @property
    def d_emb(self) -> int:
        return self.layer2[0][0].out_dim()

    def layers(self):
        return (self.layer1, self.layer2)


def iter_params(params: ModelParams):
    """Yield ``(name, array)`` for every weight tensor in a fixed order."""
    for li, layer in enumerate(params.layers(), start=1):
        for net in NETS:
            for hi, head in enumerate(layer[net]):
                for tname, arr in head.tensors().items():
                    yield f"layer{li}/net{net + 1}/head{hi}/{tname}", arr


def _glorot(rng: np.random.Generator, fan_out: int, fan_in: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def _init_head(rng, dp: int, d_own: int, d_other: int) -> AttentionParams:
    return AttentionParams(
        w_in=_glorot(rng, dp, d_own, (dp, d_own)),
        w_re=_glorot(rng, dp, d_own, (dp, d_own)),
        w_in_cross=_glorot(rng, dp, d_other, (dp, d_other)),
        w_re_cross=_glorot(rng, dp, d_other, (dp, d_other)),
        a_in=_glorot(rng, 1, 2 * dp, (2 * dp,)),
        a_re=_glorot(rng, 1, 2 * dp, (2 * dp,)),
        a_in_cross=_glorot(rng, 1, 2 * dp, (2 * dp,)),
        a_re_cross=_glorot(rng, 1, 2 * dp, (2 * dp,)),
    )


def init_params(config, d_in1: int, d_in2: int, seed: int | None = None) -> ModelParams:
    """Glorot-uniform initialization of every matrix and score vector."""
    rng = np.random.default_rng(config.seed if seed is None else seed)
    d_ins = (d_in1, d_in2)
    layer1 = tuple(
        tuple(
            _init_head(rng, config.d_hidden, d_ins[net], d_ins[1 - net])
            for _ in range(config.heads)
        )
        for net in NETS
    )
    d_mid = config.heads * config.d_hidden
    layer2 = tuple(
        (_init_head(rng, config.d_emb, d_mid, d_mid),) for _ in NETS
    )
    return ModelParams(layer1=layer1, layer2=layer2)


# ---------------------------------------------------------------------------
# per-node reference aggregation (readable formulation; layers use the
# vectorized tape path below, and the unit tests pin the two to each other)

def _np_elu(x: np.ndarray) -> np.ndarray:
    return np.where(x >= 0.0, x, np.exp(np.minimum(x, 0.0)) - 1.0)


def _contribution_matrices(params: AttentionParams, mode: ContributionMode, role: str):
    other = "re" if role == "in" else "in"
    social_role = other if mode.social == "cross" else role
    anchor_role = role if mode.anchor == "direct" else other
    w_soc = params.w_in if social_role == "in" else params.w_re
    w_anc = params.w_in_cross if anchor_role == "in" else params.w_re_cross
    return social_role, anchor_role, w_soc, w_anc


def _aggregate(node, features, weights_intra, weights_inter, params, mode, role, net, activation):
    social_role, anchor_role, w_soc, w_anc = _contribution_matrices(params, mode, role)
    own_in, own_re = features.net(net)
    oth_in, oth_re = features.net(1 - net)
    soc_feats = own_in if social_role == "in" else own_re
    anc_feats = oth_in if anchor_role == "in" else oth_re
    pre = np.zeros(params.out_dim(), dtype=np.float64)
    for j, a in weights_intra.items():
        pre += a * (w_soc @ soc_feats[j])
    for p, a in weights_inter.items():
        pre += a * (w_anc @ anc_feats[p])
    return activation(pre)


def aggregate_initiator(node, features, weights_intra, weights_inter, params, mode,
                        net: int = 0, activation=_np_elu) -> np.ndarray:
    """Initiator-role output of one node from its normalized attention weights.

    Sums the weighted projected features of followed neighbors and anchor
    partners (which feature role contributes is set by ``mode``), then applies
    the layer nonlinearity.  Empty neighborhoods give ``activation(0)``.
    """
    return _aggregate(node, features, weights_intra, weights_inter, params, mode,
                      "in", net, activation)


def aggregate_recipient(node, features, weights_intra, weights_inter, params, mode,
                        net: int = 0, activation=_np_elu) -> np.ndarray:
    """Recipient-role mirror of :func:`aggregate_initiator` (followers attend)."""
    return _aggregate(node, features, weights_intra, weights_inter, params, mode,
                      "re", net, activation)


# ---------------------------------------------------------------------------
# vectorized layer on the autodiff tape

def _edge_orientation(pair: AlignedPair, net: int, role: str):
    """(target_idx, source_idx, anchor_target_idx, anchor_source_idx) arrays."""
    g = pair.graph(net)
    e = np.asarray(g.edges)
    if role == "in":  # targets attend over nodes they follow
        tgt, src = e[:, 0], e[:, 1]
    else:  # targets attend over their followers
        tgt, src = e[:, 1], e[:, 0]
    a = np.asarray(pair.anchors)
    if net == 0:
        atgt, asrc = a[:, 0], a[:, 1]
    else:
        atgt, asrc = a[:, 1], a[:, 0]
    return tgt, src, atgt, asrc


def _head_output(pair, net, role, feats_t, head_t, mode, slope, masks):
    """One head's pre-concat output for all nodes of one network and role."""
    n = pair.graph(net).node_count
    dp = head_t["w_in"].data.shape[0]
    tgt, src, atgt, asrc = _edge_orientation(pair, net, role)

    other = "re" if role == "in" else "in"
    social_role = other if mode.social == "cross" else role
    anchor_role = role if mode.anchor == "direct" else other

    w_tgt = head_t["w_in"] if role == "in" else head_t["w_re"]
    w_soc = head_t["w_in"] if social_role == "in" else head_t["w_re"]
    w_anc = head_t["w_in_cross"] if anchor_role == "in" else head_t["w_re_cross"]
    a_soc = head_t["a_in"] if role == "in" else head_t["a_re"]
    a_anc = head_t["a_in_cross"] if role == "in" else head_t["a_re_cross"]

    h_tgt = ad.linear(feats_t[(net, role)], w_tgt)
    h_soc = ad.linear(feats_t[(net, social_role)], w_soc)
    h_anc = ad.linear(feats_t[(1 - net, anchor_role)], w_anc)

    s_tgt_soc = ad.matvec(h_tgt, ad.slice1d(a_soc, 0, dp))
    s_src_soc = ad.matvec(h_soc, ad.slice1d(a_soc, dp, 2 * dp))
    s_tgt_anc = ad.matvec(h_tgt, ad.slice1d(a_anc, 0, dp))
    s_src_anc = ad.matvec(h_anc, ad.slice1d(a_anc, dp, 2 * dp))

    e_soc = ad.leaky_relu(ad.add(ad.gather(s_tgt_soc, tgt), ad.gather(s_src_soc, src)), slope)
    e_anc = ad.leaky_relu(ad.add(ad.gather(s_tgt_anc, atgt), ad.gather(s_src_anc, asrc)), slope)

    # stable softmax: per-target max over the combined edge set, as a constant
    m = np.full(n, -np.inf)
    np.maximum.at(m, tgt, e_soc.data)
    np.maximum.at(m, atgt, e_anc.data)
    m[~np.isfinite(m)] = 0.0

    w_s = ad.exp(ad.add_const(e_soc, -m[tgt]))
    w_a = ad.exp(ad.add_const(e_anc, -m[atgt]))
    denom = ad.add(ad.segment_sum(w_s, tgt, n), ad.segment_sum(w_a, atgt, n))
    alpha_s = ad.div(w_s, ad.gather(denom, tgt))
    alpha_a = ad.div(w_a, ad.gather(denom, atgt))

    if masks is not None:
        mask_s, mask_a = masks
        alpha_s = ad.mul(alpha_s, ad.constant(mask_s))
        alpha_a = ad.mul(alpha_a, ad.constant(mask_a))

    rows_s = ad.scale_rows(ad.gather(h_soc, src), alpha_s)
    rows_a = ad.scale_rows(ad.gather(h_anc, asrc), alpha_a)
    return ad.add(ad.segment_sum(rows_s, tgt, n), ad.segment_sum(rows_a, atgt, n))


def _apply_activation(pre, kind: str):
    if kind == "elu":
        return ad.elu(pre)
    if kind == "identity":
        return pre
    if kind == "softmax":
        c = np.max(pre.data, axis=1, keepdims=True) if pre.data.size else 0.0
        e = ad.exp(ad.add_const(pre, -c))
        return ad.div_rows(e, ad.sum_rows(e))
    raise ValueError(f"unknown activation {kind!r}")


def _layer_graph(pair, feats_t, heads_t, mode, slope, activation, mask_lookup):
    """One attention layer for both networks; returns the new feature tensors."""
    out = {}
    for net in NETS:
        for role in ROLES:
            parts = []
            for hi, head_t in enumerate(heads_t[net]):
                masks = mask_lookup(net, role, hi) if mask_lookup else None
                pre = _head_output(pair, net, role, feats_t, head_t, mode, slope, masks)
                parts.append(_apply_activation(pre, activation))
            out[(net, role)] = parts[0] if len(parts) == 1 else ad.concat_cols(parts)
    return out


def _params_to_tensors(params: ModelParams, trainable: bool):
    """Mirror ModelParams as tape tensors; returns (nested dicts, name->tensor)."""
    named = {}
    layers = []
    for li, layer in enumerate(params.layers(), start=1):
        nets = []
        for net in NETS:
            heads = []
            for hi, head in enumerate(layer[net]):
                head_t = {}
                for tname, arr in head.tensors().items():
                    t = ad.parameter(arr) if trainable else ad.constant(arr)
                    head_t[tname] = t
                    named[f"layer{li}/net{net + 1}/head{hi}/{tname}"] = t
                heads.append(head_t)
            nets.append(tuple(heads))
        layers.append(tuple(nets))
    return tuple(layers), named


def _sample_coefficient_masks(pair, params, rate, rng):
    """Inverted-dropout masks over attention coefficients, one per head."""
    keep = 1.0 - rate
    masks = {}
    n_soc = [pair.g1.edge_count, pair.g2.edge_count]
    n_anc = pair.anchor_count
    for li, layer in enumerate(params.layers(), start=1):
        for net in NETS:
            for role in ROLES:
                for hi in range(len(layer[net])):
                    mask_s = (rng.random(n_soc[net]) < keep) / keep
                    mask_a = (rng.random(n_anc) < keep) / keep
                    masks[(li, net, role, hi)] = (mask_s, mask_a)
    return masks


def build_forward_graph(
    pair: AlignedPair,
    features: NodeFeatures,
    params: ModelParams,
    mode: ContributionMode,
    *,
    trainable: bool = False,
    attn_slope: float = 0.2,
    layer2_activation: str = "identity",
    dropout_masks=None,
):
    """Tape graph of the full two-layer pass.

    Returns ``(embeddings, named_params)`` where ``embeddings`` maps
    ``(net, role)`` to the final embedding tensor and ``named_params`` maps
    tensor names to their tape nodes (for gradient extraction).
    """
    layers_t, named = _params_to_tensors(params, trainable)
    feats_t = {
        (net, role): ad.constant(features.net(net)[0 if role == "in" else 1])
        for net in NETS
        for role in ROLES
    }

    def lookup(li):
        if dropout_masks is None:
            return None
        return lambda net, role, hi: dropout_masks[(li, net, role, hi)]

    mid = _layer_graph(pair, feats_t, layers_t[0], mode, attn_slope, "elu", lookup(1))
    emb = _layer_graph(pair, mid, layers_t[1], mode, attn_slope, layer2_activation, lookup(2))
    return emb, named


def multi_head_layer(
    pair: AlignedPair,
    features: NodeFeatures,
    heads: tuple[tuple[AttentionParams, ...], tuple[AttentionParams, ...]],
    mode: ContributionMode,
    dropout_state: tuple[float, np.random.Generator] | None = None,
    attn_slope: float = 0.2,
    activation: str = "elu",
) -> NodeFeatures:
    """One attention layer (values only): K heads concatenated per role.

    With ``dropout_state = (rate, rng)`` each head's normalized coefficients
    are dropped independently (inverted scaling, no renormalization); without
    it the layer is deterministic.
    """
    mask_lookup = None
    if dropout_state is not None and dropout_state[0] > 0.0:
        rate, rng = dropout_state
        keep = 1.0 - rate
        n_soc = [pair.g1.edge_count, pair.g2.edge_count]
        cache = {}

        def mask_lookup(net, role, hi):
            key = (net, role, hi)
            if key not in cache:
                cache[key] = (
                    (rng.random(n_soc[net]) < keep) / keep,
                    (rng.random(pair.anchor_count) < keep) / keep,
                )
            return cache[key]

    feats_t = {
        (net, role): ad.constant(features.net(net)[0 if role == "in" else 1])
        for net in NETS
        for role in ROLES
    }
    heads_t = []
    for net in NETS:
        heads_t.append(tuple(
            {k: ad.constant(v) for k, v in h.tensors().items()} for h in heads[net]
        ))
    out = _layer_graph(pair, feats_t, tuple(heads_t), mode, attn_slope, activation, mask_lookup)
    return NodeFeatures(
        out[(0, "in")].data, out[(0, "re")].data, out[(1, "in")].data, out[(1, "re")].data
    )


def forward(
    pair: AlignedPair,
    params: ModelParams,
    mode: ContributionMode = ContributionMode(),
    train_flag: bool = False,
    *,
    features: NodeFeatures | None = None,
    dropout: float = 0.0,
    rng: np.random.Generator | None = None,
    attn_slope: float = 0.2,
    layer2_activation: str = "identity",
    d_cap: int = 1024,
) -> EmbeddingTable:
    """Full two-layer pass producing the embedding table for both networks.

    Dropout on attention coefficients applies only when ``train_flag`` is set
    and ``dropout > 0``; evaluation calls are deterministic.
    """
    if features is None:
        features = init_features(pair, d_cap=d_cap)
    masks = None
    if train_flag and dropout > 0.0:
        masks = _sample_coefficient_masks(
            pair, params, dropout, rng if rng is not None else np.random.default_rng()
        )
    emb, _ = build_forward_graph(
        pair, features, params, mode,
        trainable=False, attn_slope=attn_slope,
        layer2_activation=layer2_activation, dropout_masks=masks,
    )
    return EmbeddingTable(
        emb[(0, "in")].data, emb[(0, "re")].data, emb[(1, "in")].data, emb[(1, "re")].data
    )


def write_embeddings(table: EmbeddingTable, path: str) -> None:
    """Export as TSV rows: network, node_id, role, v_1..v_d."""
    with open(path, "w", encoding="utf-8") as fh:
        for net in NETS:
            emb_in, emb_re = table.net(net)
            for role, emb in (("in", emb_in), ("re", emb_re)):
                for i in range(emb.shape[0]):
                    vals = "\t".join(repr(float(v)) for v in emb[i])
                    fh.write(f"{net + 1}\t{i}\t{role}\t{vals}\n")

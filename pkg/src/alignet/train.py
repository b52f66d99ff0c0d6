"""Training: exact gradients of the joint objective, Adam, and the epoch loop.

Gradients come from reverse-mode differentiation over the fixed two-layer
compute graph (see :mod:`alignet.autodiff`): the same tape that produces the
loss value is walked backwards, so dropout masks and resampled negatives are
shared exactly between the value and its gradient.  Training is full batch:
every train-partition link contributes every epoch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .config import RunConfig
from .errors import FormatError, NumericalError
from .graphs import AlignedPair, LinkSplit, message_graph, resample_negatives
from .model import (
    EmbeddingTable,
    ModelParams,
    NodeFeatures,
    _sample_coefficient_masks,
    build_forward_graph,
    forward,
    init_features,
    init_params,
    iter_params,
)
from .objective import PROB_EPS, LossBreakdown

__all__ = [
    "AdamState",
    "backward",
    "adam_step",
    "fit",
    "save_checkpoint",
    "load_checkpoint",
]


# ---------------------------------------------------------------------------
# loss graph on the tape

def _link_logits(pos_in, pos_re, links: np.ndarray):
    links = np.asarray(links, dtype=np.int64).reshape(-1, 2)
    lhs = ad.gather(pos_in, links[:, 0])
    rhs = ad.gather(pos_re, links[:, 1])
    return ad.sum_rows(ad.mul(lhs, rhs))


def _log_p(z, positive: bool):
    if positive:
        return ad.sum_all(ad.log_sigmoid(z, PROB_EPS))
    return ad.sum_all(ad.log_one_minus_sigmoid(z, PROB_EPS))


def _social_term(emb, net, pos, neg):
    e_in, e_re = emb[(net, "in")], emb[(net, "re")]
    return ad.add(
        _log_p(_link_logits(e_in, e_re, pos), True),
        _log_p(_link_logits(e_in, e_re, neg), False),
    )


def _anchor_logits(emb, links: np.ndarray):
    links = np.asarray(links, dtype=np.int64).reshape(-1, 2)
    z_in = ad.sum_rows(ad.mul(ad.gather(emb[(0, "in")], links[:, 0]),
                              ad.gather(emb[(1, "in")], links[:, 1])))
    z_re = ad.sum_rows(ad.mul(ad.gather(emb[(0, "re")], links[:, 0]),
                              ad.gather(emb[(1, "re")], links[:, 1])))
    return ad.add(z_in, z_re)


def _loss_graph(pair, split, params, config, features, masks, neg_sets):
    emb, named = build_forward_graph(
        pair, features, params, config.mode,
        trainable=True, attn_slope=config.attn_slope,
        layer2_activation=config.layer2_activation, dropout_masks=masks,
    )
    if config.feature_roles == "initiator-only":
        emb = {(n, r): emb[(n, "in")] for n in (0, 1) for r in ("in", "re")}
    elif config.feature_roles == "recipient-only":
        emb = {(n, r): emb[(n, "re")] for n in (0, 1) for r in ("in", "re")}

    neg1, neg2, nega = neg_sets
    l1 = _social_term(emb, 0, split.pos_soc1.train, neg1)
    l2 = _social_term(emb, 1, split.pos_soc2.train, neg2)
    la = ad.add(
        _log_p(_anchor_logits(emb, split.pos_anchor.train), True),
        _log_p(_anchor_logits(emb, nega), False),
    )
    reg = ad.sum_squares(list(named.values()))
    total = ad.add(
        ad.scale(ad.add(ad.add(l1, l2), ad.scale(la, config.alpha)), -1.0),
        ad.scale(reg, config.beta),
    )
    return total, (l1, l2, la, reg), named


def backward(
    pair: AlignedPair,
    split: LinkSplit,
    params: ModelParams,
    config: RunConfig,
    rng: np.random.Generator | None = None,
    *,
    features: NodeFeatures | None = None,
    neg_override=None,
) -> tuple[LossBreakdown, dict[str, np.ndarray]]:
    """Loss components and exact gradients for one full-batch pass.

    ``pair`` must be the message graph (train-partition links only).  With
    dropout configured, masks are sampled once from ``rng`` and used for both
    the loss value and its gradients.  The gradient table maps the parameter
    names of :func:`alignet.model.iter_params` to same-shaped arrays.
    """
    if features is None:
        features = init_features(pair, d_cap=config.d_cap)
    masks = None
    if config.dropout > 0.0:
        masks = _sample_coefficient_masks(
            pair, params, config.dropout,
            rng if rng is not None else np.random.default_rng(),
        )
    neg_sets = neg_override
    if neg_sets is None:
        neg_sets = (split.neg_soc1.train, split.neg_soc2.train, split.neg_anchor.train)

    total, (l1, l2, la, reg), named = _loss_graph(
        pair, split, params, config, features, masks, neg_sets
    )
    breakdown = LossBreakdown(
        soc1=float(l1.data), soc2=float(l2.data), anchor=float(la.data),
        reg=float(reg.data), total=float(total.data),
    )
    for name, value in (("soc1", breakdown.soc1), ("soc2", breakdown.soc2),
                        ("anchor", breakdown.anchor), ("reg", breakdown.reg)):
        if not np.isfinite(value):
            raise NumericalError(f"loss component {name} is non-finite ({value})")

    ad.backward(total)
    grads = {}
    for name, arr in iter_params(params):
        g = named[name].grad
        grads[name] = np.zeros_like(arr) if g is None else g
        if not np.isfinite(grads[name]).all():
            raise NumericalError(f"gradient of {name} is non-finite")
    return breakdown, grads


# ---------------------------------------------------------------------------
# Adam

@dataclass
class AdamState:
    """First/second moment accumulators plus the step counter."""

    lr: float = 0.005
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def create(cls, params: ModelParams, lr: float = 0.005) -> "AdamState":
        state = cls(lr=lr)
        for name, arr in iter_params(params):
            state.m[name] = np.zeros_like(arr)
            state.v[name] = np.zeros_like(arr)
        return state


def adam_step(params: ModelParams, grads: dict[str, np.ndarray], state: AdamState):
    """Standard bias-corrected Adam update, applied in place."""
    state.step += 1
    c1 = 1.0 - state.beta1 ** state.step
    c2 = 1.0 - state.beta2 ** state.step
    for name, arr in iter_params(params):
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        arr -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


# ---------------------------------------------------------------------------
# epoch loop

def fit(
    pair: AlignedPair,
    split: LinkSplit,
    config: RunConfig,
    seed: int | None = None,
    *,
    init: tuple[ModelParams, AdamState, int] | None = None,
    state_sink: dict | None = None,
) -> tuple[ModelParams, EmbeddingTable, list[LossBreakdown]]:
    """Full-batch training for ``config.epochs`` epochs.

    Builds the message graph from the split, initializes features and
    parameters, and runs backward + Adam per epoch.  Returns the trained
    parameters, evaluation-mode embeddings (dropout off, message graph), and
    the per-epoch loss trace.  Deterministic given the seed.  Pass ``init``
    (params, adam state, completed epochs) to resume from a checkpoint; pass
    a dict as ``state_sink`` to receive the final optimizer state and epoch
    for checkpointing.
    """
    if seed is not None:
        config = config.with_(seed=seed)
    msg = message_graph(pair, split)
    feats = init_features(msg, d_cap=config.d_cap)
    d_in1 = feats.net1_in.shape[1]
    d_in2 = feats.net2_in.shape[1]
    if init is not None:
        params, state, done = init
    else:
        params, state, done = init_params(config, d_in1, d_in2), None, 0
        state = AdamState.create(params, lr=config.lr)
    rng = np.random.default_rng([config.seed, 0xA11])
    trace: list[LossBreakdown] = []
    best = np.inf
    stale = 0
    for epoch in range(done, config.epochs):
        neg_override = None
        if config.resample_negatives:
            neg_override = resample_negatives(pair, split, rng)
        try:
            breakdown, grads = backward(
                msg, split, params, config, rng=rng,
                features=feats, neg_override=neg_override,
            )
        except NumericalError as err:
            last = trace[-1] if trace else None
            raise NumericalError(f"epoch {epoch}: {err} (previous losses: {last})") from err
        adam_step(params, grads, state)
        trace.append(breakdown)
        if config.patience is not None:
            if breakdown.total < best:
                best = breakdown.total
                stale = 0
            else:
                stale += 1
                if stale > config.patience:
                    break
    emb = forward(
        msg, params, config.mode, train_flag=False, features=feats,
        attn_slope=config.attn_slope, layer2_activation=config.layer2_activation,
        d_cap=config.d_cap,
    )
    if state_sink is not None:
        state_sink["adam"] = state
        state_sink["epoch"] = done + len(trace)
    return params, emb, trace


# ---------------------------------------------------------------------------
# checkpoints

_CKPT_MAGIC = "alignet-checkpoint"
_CKPT_VERSION = 1


def save_checkpoint(path: str, params: ModelParams, state: AdamState, epoch: int) -> None:
    """Structured binary dump of parameters + optimizer state, versioned."""
    payload = {
        "magic": np.array(_CKPT_MAGIC),
        "version": np.array(_CKPT_VERSION),
        "epoch": np.array(epoch),
        "adam": np.array([state.lr, state.beta1, state.beta2, state.eps, state.step]),
    }
    for name, arr in iter_params(params):
        payload[f"p/{name}"] = arr
        payload[f"m/{name}"] = state.m[name]
        payload[f"v/{name}"] = state.v[name]
    np.savez_compressed(path, **payload)


def load_checkpoint(path: str) -> tuple[ModelParams, AdamState, int]:
    from .attention import AttentionParams

    with np.load(path, allow_pickle=False) as npz:
        if "magic" not in npz or str(npz["magic"]) != _CKPT_MAGIC:
            raise FormatError(f"{path}: not a checkpoint file")
        if int(npz["version"]) != _CKPT_VERSION:
            raise FormatError(f"{path}: unsupported checkpoint version {npz['version']}")
        epoch = int(npz["epoch"])
        lr, b1, b2, eps, step = npz["adam"].tolist()
        tree: dict[tuple[int, int], dict[int, dict[str, np.ndarray]]] = {}
        state = AdamState(lr=lr, beta1=b1, beta2=b2, eps=eps, step=int(step))
        for key in npz.files:
            if not key.startswith("p/"):
                continue
            name = key[2:]
            layer_s, net_s, head_s, tname = name.split("/")
            li = int(layer_s.removeprefix("layer"))
            net = int(net_s.removeprefix("net")) - 1
            hi = int(head_s.removeprefix("head"))
            tree.setdefault((li, net), {}).setdefault(hi, {})[tname] = npz[key].copy()
            state.m[name] = npz[f"m/{name}"].copy()
            state.v[name] = npz[f"v/{name}"].copy()
    layers = []
    for li in (1, 2):
        nets = []
        for net in (0, 1):
            heads = tree.get((li, net), {})
            nets.append(tuple(AttentionParams(**heads[hi]) for hi in sorted(heads)))
        layers.append(tuple(nets))
    params = ModelParams(layer1=layers[0], layer2=layers[1])
    for _, layer in zip((1, 2), params.layers()):
        for net_heads in layer:
            for head in net_heads:
                head.validate()
    return params, state, epoch

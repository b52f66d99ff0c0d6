"""AUC evaluation and the experiment harness.

Three subtasks are scored on test-partition links only: social link
prediction in each network and anchor link prediction across them.  AUC is
computed exactly from rank statistics (ties count one half).  The harness
functions reproduce the standard protocols: training-ratio grids, the
single-role feature ablation, the contribution-mode grid, and one-axis
hyperparameter sweeps, all emitting CSV with the configuration echoed in a
header comment.
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass

import numpy as np

from .autodiff import sigmoid_np
from .config import RunConfig
from .errors import EvaluationError
from .graphs import AlignedPair, LinkSplit, load_aligned_pair, make_split
from .model import EmbeddingTable
from .objective import apply_feature_roles
from .synth import DegreeParams, generate_synthetic
from .train import fit

__all__ = [
    "EvalReport",
    "SyntheticSource",
    "FileSource",
    "auc",
    "evaluate",
    "run_experiment",
    "sweep",
    "mode_grid",
    "feature_role_grid",
    "report_csv",
    "rows_csv",
]


@dataclass(frozen=True)
class EvalReport:
    """Test-set AUC of the three subtasks plus the run's identifying echo."""

    auc_soc1: float
    auc_soc2: float
    auc_anchor: float
    config_echo: str
    seed: int
    lam: float
    wall_time: float = 0.0


def auc(scores_pos, scores_neg) -> float:
    """Exact rank-based AUC with ties counted 1/2.

    Equals the probability that a uniformly random positive outranks a
    uniformly random negative.
    """
    pos = np.asarray(scores_pos, dtype=np.float64)
    neg = np.asarray(scores_neg, dtype=np.float64)
    if pos.size == 0 or neg.size == 0:
        raise EvaluationError("AUC needs at least one positive and one negative score")
    allv = np.concatenate([pos, neg])
    order = np.argsort(allv, kind="mergesort")
    ranks = np.empty(allv.size, dtype=np.float64)
    sorted_vals = allv[order]
    # average the 1-based ranks inside each tie group
    i = 0
    while i < sorted_vals.size:
        j = i
        while j + 1 < sorted_vals.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    r_pos = float(np.sum(ranks[: pos.size]))
    n_pos, n_neg = pos.size, neg.size
    return (r_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _social_scores(links: np.ndarray, emb_in: np.ndarray, emb_re: np.ndarray) -> np.ndarray:
    links = np.asarray(links, dtype=np.int64).reshape(-1, 2)
    z = np.sum(emb_in[links[:, 0]] * emb_re[links[:, 1]], axis=1)
    return sigmoid_np(z)


def _anchor_scores(links: np.ndarray, emb: EmbeddingTable) -> np.ndarray:
    links = np.asarray(links, dtype=np.int64).reshape(-1, 2)
    z = (np.sum(emb.net1_in[links[:, 0]] * emb.net2_in[links[:, 1]], axis=1)
         + np.sum(emb.net1_re[links[:, 0]] * emb.net2_re[links[:, 1]], axis=1))
    return sigmoid_np(z)


def evaluate(
    pair: AlignedPair,
    split: LinkSplit,
    embeddings: EmbeddingTable,
    config: RunConfig | None = None,
    wall_time: float = 0.0,
    partition: str = "test",
) -> EvalReport:
    """Score the held-out links of all three subtasks.

    Only the requested partition (test by default) is read; train links never
    enter the metric.  ``config.feature_roles`` is honored so single-role
    ablations score with the same substitution they trained with.
    """
    roles = config.feature_roles if config is not None else "both"
    emb = apply_feature_roles(embeddings, roles)
    part = lambda p: getattr(p, partition)
    a1 = auc(_social_scores(part(split.pos_soc1), emb.net1_in, emb.net1_re),
             _social_scores(part(split.neg_soc1), emb.net1_in, emb.net1_re))
    a2 = auc(_social_scores(part(split.pos_soc2), emb.net2_in, emb.net2_re),
             _social_scores(part(split.neg_soc2), emb.net2_in, emb.net2_re))
    aa = auc(_anchor_scores(part(split.pos_anchor), emb),
             _anchor_scores(part(split.neg_anchor), emb))
    return EvalReport(
        auc_soc1=float(a1), auc_soc2=float(a2), auc_anchor=float(aa),
        config_echo=config.echo() if config is not None else "",
        seed=config.seed if config is not None else split.seed,
        lam=split.lam, wall_time=wall_time,
    )


# ---------------------------------------------------------------------------
# data sources

@dataclass(frozen=True)
class SyntheticSource:
    """Generate the aligned pair on the fly (seeded from the run config)."""

    n1: int = 200
    n2: int = 200
    anchor_frac: float = 0.6
    divergence: float = 0.3
    deg: DegreeParams = DegreeParams()
    fixed_seed: int | None = None  # set to pin the data independently of runs


@dataclass(frozen=True)
class FileSource:
    g1_edges: str
    g2_edges: str
    anchor_file: str


def resolve_source(source, config: RunConfig) -> AlignedPair:
    if isinstance(source, AlignedPair):
        return source
    if isinstance(source, FileSource):
        return load_aligned_pair(source.g1_edges, source.g2_edges, source.anchor_file)
    if isinstance(source, SyntheticSource):
        seed = source.fixed_seed if source.fixed_seed is not None else config.seed
        return generate_synthetic(
            source.n1, source.n2, source.anchor_frac, source.deg,
            source.divergence, seed,
        )
    raise TypeError(f"unsupported data source {type(source).__name__}")


def run_experiment(config: RunConfig, source) -> EvalReport:
    """Load/generate, split, train, and evaluate, end to end.

    Deterministic per seed: identical configs produce identical reports
    (wall time aside).  Errors are re-raised with a stage label.
    """
    t0 = time.perf_counter()
    stage = "load"
    try:
        pair = resolve_source(source, config)
        stage = "split"
        split = make_split(pair, config.lam, config.seed)
        stage = "train"
        params, emb, _trace = fit(pair, split, config)
        stage = "evaluate"
        report = evaluate(pair, split, emb, config, wall_time=time.perf_counter() - t0)
    except Exception as err:
        raise type(err)(f"[stage: {stage}] {err}") from err
    return report


# ---------------------------------------------------------------------------
# CSV rendering (wall time deliberately excluded so reports are reproducible)

_REPORT_HEADER = "lambda,seed,auc_soc1,auc_soc2,auc_anchor"


def report_csv(report: EvalReport, header: bool = True) -> str:
    out = io.StringIO()
    if header:
        out.write(f"# config: {report.config_echo}\n")
        out.write(_REPORT_HEADER + "\n")
    out.write(
        f"{report.lam!r},{report.seed},{report.auc_soc1!r},"
        f"{report.auc_soc2!r},{report.auc_anchor!r}\n"
    )
    return out.getvalue()


def rows_csv(rows: list[dict], header_comment: str = "") -> str:
    """Render a list of uniform dict rows as CSV with an optional comment."""
    out = io.StringIO()
    if header_comment:
        out.write(f"# {header_comment}\n")
    if rows:
        cols = list(rows[0].keys())
        out.write(",".join(cols) + "\n")
        for row in rows:
            out.write(",".join(_fmt(row[c]) for c in cols) + "\n")
    return out.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


# ---------------------------------------------------------------------------
# experiment grids

_SWEEP_FIELDS = {"d": "d_emb", "alpha": "alpha", "beta": "beta"}


def _mean_std_rows(label_col: str, label, reports: list[EvalReport]) -> dict:
    row: dict = {label_col: label, "repeats": len(reports)}
    for task in ("auc_soc1", "auc_soc2", "auc_anchor"):
        vals = np.array([getattr(r, task) for r in reports])
        row[f"{task}_mean"] = float(vals.mean())
        row[f"{task}_std"] = float(vals.std(ddof=0))
    return row


def sweep(base: RunConfig, axis: str, values, repeats: int, source) -> list[dict]:
    """One-axis hyperparameter sweep: mean and std of each AUC per value.

    ``axis`` is one of d (embedding size), alpha, beta.  Each value runs
    ``repeats`` times with seeds base.seed, base.seed+1, ...
    """
    if axis not in _SWEEP_FIELDS:
        raise ValueError(f"sweep axis must be one of {sorted(_SWEEP_FIELDS)}, got {axis!r}")
    if not values:
        raise ValueError("sweep needs at least one value")
    field_name = _SWEEP_FIELDS[axis]
    rows = []
    for value in values:
        reports = []
        for r in range(repeats):
            cfg = base.with_(**{field_name: value, "seed": base.seed + r})
            reports.append(run_experiment(cfg, source))
        rows.append(_mean_std_rows(axis, value, reports))
    return rows


def mode_grid(base: RunConfig, repeats: int, source,
              labels=("sc+ac", "sd+ad", "sd+ac", "sc+ad")) -> list[dict]:
    """Contribution-mode hypothesis grid over the four social/anchor pairings."""
    rows = []
    for label in labels:
        reports = [
            run_experiment(base.with_(mode=label, seed=base.seed + r), source)
            for r in range(repeats)
        ]
        rows.append(_mean_std_rows("mode", label, reports))
    return rows


def feature_role_grid(base: RunConfig, repeats: int, source,
                      roles=("initiator-only", "recipient-only", "both")) -> list[dict]:
    """Single-role ablation: train and score with one role's embeddings."""
    rows = []
    for role in roles:
        reports = [
            run_experiment(base.with_(feature_roles=role, seed=base.seed + r), source)
            for r in range(repeats)
        ]
        rows.append(_mean_std_rows("feature_roles", role, reports))
    return rows

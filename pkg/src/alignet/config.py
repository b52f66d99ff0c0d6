"""Experiment configuration: one record holding every knob of a run."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .attention import ContributionMode

__all__ = ["RunConfig"]

FEATURE_ROLES = ("both", "initiator-only", "recipient-only")


@dataclass(frozen=True)
class RunConfig:
    """Hyperparameters, contribution mode, and ablation flags for one run.

    Defaults are the reference settings: 100-dimensional embeddings from a
    second single-head layer on top of a first layer of 8 heads with 256
    features each, ELU between layers, Adam at learning rate 0.005 for 3000
    epochs, joint-objective weights alpha 1.0 and beta 0.0005.
    """

    d_emb: int = 100
    d_hidden: int = 256
    heads: int = 8
    lr: float = 0.005
    epochs: int = 3000
    alpha: float = 1.0
    beta: float = 0.0005
    dropout: float = 0.4
    lam: float = 0.8
    mode: ContributionMode = field(default_factory=ContributionMode)
    feature_roles: str = "both"
    seed: int = 0
    # engine knobs beyond the headline settings
    attn_slope: float = 0.2
    layer2_activation: str = "identity"  # or "softmax" over embedding dims
    d_cap: int = 1024
    resample_negatives: bool = False
    patience: int | None = None

    def __post_init__(self):
        if self.d_emb < 1 or self.d_hidden < 1 or self.heads < 1:
            raise ValueError("dimensions and head count must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if not (0.0 < self.lam < 1.0):
            raise ValueError(f"training ratio must lie in (0, 1), got {self.lam}")
        if not (0.0 <= self.dropout < 1.0):
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")
        if self.feature_roles not in FEATURE_ROLES:
            raise ValueError(f"feature_roles must be one of {FEATURE_ROLES}")
        if self.layer2_activation not in ("identity", "softmax"):
            raise ValueError("layer2_activation must be 'identity' or 'softmax'")

    def with_(self, **kwargs) -> "RunConfig":
        if "mode" in kwargs and isinstance(kwargs["mode"], str):
            kwargs["mode"] = ContributionMode.parse(kwargs["mode"])
        return replace(self, **kwargs)

    def echo(self) -> str:
        """Stable one-line summary used as a CSV header comment."""
        return (
            f"d_emb={self.d_emb} d_hidden={self.d_hidden} heads={self.heads} "
            f"lr={self.lr!r} epochs={self.epochs} alpha={self.alpha!r} beta={self.beta!r} "
            f"dropout={self.dropout!r} lambda={self.lam!r} mode={self.mode.label()} "
            f"feature_roles={self.feature_roles} seed={self.seed}"
        )

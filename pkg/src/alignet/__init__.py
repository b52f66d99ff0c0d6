"""Collective link prediction over two anchor-aligned directed networks.

The package learns per-node initiator and recipient embeddings for a pair of
directed networks joined by anchor links, using two attention layers whose
neighborhoods mix same-network neighbors with cross-network anchor partners.
Training optimizes social-link and anchor-link likelihoods jointly, with
exact gradients from a small built-in reverse-mode tape.
"""

from .attention import AttentionParams, ContributionMode
from .config import RunConfig
from .errors import (
    AlignetError,
    EvaluationError,
    FormatError,
    GenerationError,
    NumericalError,
    SamplingError,
    ShapeError,
    ValidationError,
)
from .evaluate import (
    EvalReport,
    FileSource,
    SyntheticSource,
    auc,
    evaluate,
    feature_role_grid,
    mode_grid,
    report_csv,
    rows_csv,
    run_experiment,
    sweep,
)
from .graphs import (
    AlignedPair,
    DirectedGraph,
    LinkSplit,
    PartitionedPairs,
    load_aligned_pair,
    load_split,
    make_split,
    message_graph,
    save_split,
)
from .model import (
    EmbeddingTable,
    ModelParams,
    NodeFeatures,
    forward,
    init_features,
    init_params,
    multi_head_layer,
    write_embeddings,
)
from .objective import (
    LossBreakdown,
    anchor_loss,
    anchor_prob,
    regularizer,
    social_loss,
    social_prob,
    total_loss,
    write_loss_trace,
)
from .synth import DegreeParams, generate_synthetic
from .train import AdamState, adam_step, backward, fit, load_checkpoint, save_checkpoint

__version__ = "0.1.0"

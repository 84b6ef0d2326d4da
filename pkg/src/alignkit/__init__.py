"""Alignment search kernels for parallel sequence-to-sequence conversion.

Dependency-light building blocks: monotonic alignment search between
paired feature sequences, the alignment-learning losses, length
regulation, source-length reduction, and objective evaluation metrics,
plus deterministic NPY/PGM file I/O and a CLI.
"""

__version__ = "0.1.0"

from .align import (
    AlignmentDiagnostics,
    LogAlignment,
    MonotonicPath,
    aas_durations,
    beta_binomial_prior,
    distance_matrix,
    log_soft_alignment,
    mas,
    path_to_durations,
)
from .config import AASConfig, ObjectiveWeights, ReductionConfig
from .losses import (
    LossValue,
    duration_loss,
    forward_sum,
    kl_hard_soft,
    l1_loss,
    total_objective,
)
from .metrics import (
    DEFAULT_FRAME_SHIFT_S,
    WarpPath,
    ddur,
    dtw,
    dvar,
    f0corr,
    mcd,
    pair_by_warp,
)
from .npyio import LoadedMatrix, read_matrix, write_heatmap, write_matrix
from .regulate import expand, reduce_stack
from .selftest import run_selftest

__all__ = [
    "AASConfig",
    "AlignmentDiagnostics",
    "DEFAULT_FRAME_SHIFT_S",
    "LoadedMatrix",
    "LogAlignment",
    "LossValue",
    "MonotonicPath",
    "ObjectiveWeights",
    "ReductionConfig",
    "WarpPath",
    "__version__",
    "aas_durations",
    "beta_binomial_prior",
    "ddur",
    "distance_matrix",
    "dtw",
    "duration_loss",
    "dvar",
    "expand",
    "f0corr",
    "forward_sum",
    "kl_hard_soft",
    "l1_loss",
    "log_soft_alignment",
    "mas",
    "mcd",
    "pair_by_warp",
    "path_to_durations",
    "read_matrix",
    "reduce_stack",
    "run_selftest",
    "total_objective",
    "write_heatmap",
    "write_matrix",
]

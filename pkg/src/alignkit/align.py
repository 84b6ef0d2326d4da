"""Alignment search over paired feature sequences.

Pipeline: pairwise Euclidean distances -> column-wise log-softmax
(optionally biased by a near-diagonal beta-binomial prior) -> Viterbi
monotonic alignment search with stay-or-advance moves -> backtracked
hard path -> per-source-frame durations.

All dynamic programming runs in float64 regardless of input storage
precision.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .config import AASConfig
from .errors import (
    DimensionMismatch,
    InvalidParameter,
    InvalidPath,
    NoFeasiblePath,
    NonFiniteInput,
)
from .losses import LossValue, forward_sum, kl_hard_soft

# Probabilities are floored here before entering log domain so that the
# DP never sees -inf coming from the prior.
PROB_FLOOR = 1e-12

# Row block size keeping the (rows, t_trg, dim) broadcast temporary small.
_DIST_BLOCK_ROWS = 64


def _as_features(x, name: str) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatch(
            f"{name} must be a non-empty 2-D frame matrix, got shape {a.shape}"
        )
    if not np.isfinite(a).all():
        raise NonFiniteInput(f"{name} contains NaN or Inf")
    return a


def _distance_rows(src_rows: np.ndarray, trg: np.ndarray) -> np.ndarray:
    out = np.empty((src_rows.shape[0], trg.shape[0]))
    for start in range(0, src_rows.shape[0], _DIST_BLOCK_ROWS):
        block = src_rows[start : start + _DIST_BLOCK_ROWS]
        diff = block[:, None, :] - trg[None, :, :]
        out[start : start + block.shape[0]] = np.sqrt(
            np.einsum("ijk,ijk->ij", diff, diff)
        )
    return out


def distance_matrix(src, trg, n_workers: int | None = None) -> np.ndarray:
    """Pairwise Euclidean distances between source and target frames.

    Args:
        src: (t_src, d) frame matrix.
        trg: (t_trg, d) frame matrix with the same feature dimension.
        n_workers: if > 1, compute disjoint row blocks on a thread pool.
            The partitioned path is bitwise-identical to the serial one
            because each output element is an independent reduction.

    Returns:
        (t_src, t_trg) float64 matrix of non-negative distances.
    """
    src = _as_features(src, "src")
    trg = _as_features(trg, "trg")
    if src.shape[1] != trg.shape[1]:
        raise DimensionMismatch(
            f"feature dims differ: src has {src.shape[1]}, trg has {trg.shape[1]}"
        )
    if n_workers is None or n_workers <= 1 or src.shape[0] < 2:
        return _distance_rows(src, trg)
    bounds = np.linspace(0, src.shape[0], n_workers + 1).astype(int)
    spans = [(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    with ThreadPoolExecutor(max_workers=len(spans)) as pool:
        parts = list(pool.map(lambda s: _distance_rows(src[s[0] : s[1]], trg), spans))
    return np.concatenate(parts, axis=0)


def _lbeta(x, y):
    return gammaln(x) + gammaln(y) - gammaln(x + y)


def beta_binomial_prior(t_src: int, t_trg: int, omega: float = 1.0) -> np.ndarray:
    """Near-diagonal prior over source indices, one pmf per target frame.

    Column j holds the beta-binomial pmf over i in [0, t_src-1] with
    n = t_src - 1, a = omega * (j + 1), b = omega * (t_trg - j).  Larger
    ``omega`` concentrates mass on the diagonal.

    Returns:
        (t_src, t_trg) matrix whose columns each sum to 1.
    """
    if int(t_src) != t_src or int(t_trg) != t_trg or t_src < 1 or t_trg < 1:
        raise InvalidParameter(
            f"sizes must be positive integers, got ({t_src}, {t_trg})"
        )
    if not np.isfinite(omega) or omega <= 0:
        raise InvalidParameter(f"omega must be a positive real, got {omega}")
    n = float(t_src - 1)
    k = np.arange(t_src, dtype=np.float64)[:, None]
    j = np.arange(t_trg, dtype=np.float64)[None, :]
    a = omega * (j + 1.0)
    b = omega * (t_trg - j)
    log_comb = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
    log_pmf = log_comb + _lbeta(k + a, n - k + b) - _lbeta(a, b)
    return np.exp(log_pmf)


@dataclass(frozen=True)
class LogAlignment:
    """Column-wise log-probabilities of source indices per target frame.

    ``prior_applied`` records whether a log-prior was added on top of the
    column log-softmax (in which case columns no longer renormalize).
    """

    data: np.ndarray
    prior_applied: bool = False

    @property
    def t_src(self) -> int:
        return self.data.shape[0]

    @property
    def t_trg(self) -> int:
        return self.data.shape[1]


def log_soft_alignment(dist, prior=None) -> LogAlignment:
    """Column log-softmax of negated distances, optionally prior-biased.

    Without a prior, each column is a proper log-distribution over
    source indices.  With a prior, log(max(prior, floor)) is added and
    no renormalization is performed, keeping one consistent log-domain
    representation for both the Viterbi search and the forward-sum loss.
    """
    d = np.asarray(dist, dtype=np.float64)
    if d.ndim != 2:
        raise DimensionMismatch(f"distance matrix must be 2-D, got shape {d.shape}")
    if not np.isfinite(d).all():
        raise NonFiniteInput("distance matrix contains NaN or Inf")
    neg = -d
    col_max = neg.max(axis=0, keepdims=True)
    log_norm = col_max + np.log(np.exp(neg - col_max).sum(axis=0, keepdims=True))
    out = neg - log_norm
    if prior is None:
        return LogAlignment(out, prior_applied=False)
    p = np.asarray(prior, dtype=np.float64)
    if p.shape != d.shape:
        raise DimensionMismatch(
            f"prior shape {p.shape} does not match distance shape {d.shape}"
        )
    out = out + np.log(np.maximum(p, PROB_FLOOR))
    return LogAlignment(out, prior_applied=True)


@dataclass(frozen=True)
class MonotonicPath:
    """Hard alignment: one source index per target frame.

    Stored in vector form; ``as_matrix`` expands to the binary
    (t_src, t_trg) form when needed.
    """

    indices: np.ndarray
    t_src: int

    @property
    def t_trg(self) -> int:
        return self.indices.shape[0]

    def as_matrix(self) -> np.ndarray:
        m = np.zeros((self.t_src, self.t_trg), dtype=np.int8)
        m[self.indices, np.arange(self.t_trg)] = 1
        return m

    def validate(self) -> None:
        """Raise InvalidPath unless the monotone-path invariants hold."""
        idx = np.asarray(self.indices)
        if idx.ndim != 1 or idx.shape[0] < 1:
            raise InvalidPath("path must be a non-empty index vector")
        if idx[0] != 0:
            raise InvalidPath(f"path must start at source index 0, got {idx[0]}")
        if idx[-1] != self.t_src - 1:
            raise InvalidPath(
                f"path must end at source index {self.t_src - 1}, got {idx[-1]}"
            )
        steps = np.diff(idx)
        if steps.size and not np.isin(steps, (0, 1)).all():
            raise InvalidPath("path steps must stay or advance by exactly 1")


def _band_bounds(t_src: int, t_trg: int, j: int) -> tuple[int, int]:
    # Feasible rows at column j: i <= j and t_src-1-i <= t_trg-1-j.
    return max(0, t_src - t_trg + j), min(j, t_src - 1)


def mas(scores) -> tuple[MonotonicPath, np.ndarray]:
    """Viterbi monotonic alignment search with stay-or-advance moves.

    Solves Q(i, j) = max(Q(i-1, j-1), Q(i, j-1)) + scores(i, j) over the
    feasible band (cells outside it hold -inf), then backtracks from the
    terminal cell.  On ties the diagonal move wins, which biases against
    degenerate long dwells and makes the output deterministic.

    Args:
        scores: (t_src, t_trg) score matrix or a LogAlignment.  Log-domain
            scores are the standard mode; pass exponentiated values for
            linear-domain search.

    Returns:
        (path, q_table): the optimal path and the full cumulative table;
        q_table[-1, -1] is the terminal path score.

    Raises:
        NoFeasiblePath: if t_trg < t_src, or -inf scores block every path.
        NonFiniteInput: if scores contain NaN or +inf.
    """
    s = np.asarray(getattr(scores, "data", scores), dtype=np.float64)
    if s.ndim != 2:
        raise DimensionMismatch(f"scores must be 2-D, got shape {s.shape}")
    if np.isnan(s).any() or np.isposinf(s).any():
        raise NonFiniteInput("scores contain NaN or +inf")
    t_src, t_trg = s.shape
    if t_trg < t_src:
        raise NoFeasiblePath(
            f"target length {t_trg} is shorter than source length {t_src}"
        )

    q = np.full((t_src, t_trg), -np.inf)
    q[0, 0] = s[0, 0]
    for j in range(1, t_trg):
        prev = q[:, j - 1]
        diag = np.empty(t_src)
        diag[0] = -np.inf
        diag[1:] = prev[:-1]
        col = np.maximum(prev, diag) + s[:, j]
        lo, hi = _band_bounds(t_src, t_trg, j)
        if lo > 0:
            col[:lo] = -np.inf
        if hi < t_src - 1:
            col[hi + 1 :] = -np.inf
        q[:, j] = col

    if not np.isfinite(q[t_src - 1, t_trg - 1]):
        raise NoFeasiblePath("terminal cell unreachable: -inf scores block every path")

    idx = np.empty(t_trg, dtype=np.int64)
    i = t_src - 1
    idx[t_trg - 1] = i
    for j in range(t_trg - 1, 0, -1):
        if i > 0 and q[i - 1, j - 1] >= q[i, j - 1]:
            i -= 1
        idx[j - 1] = i
    return MonotonicPath(idx, t_src), q


def path_to_durations(path: MonotonicPath) -> np.ndarray:
    """Count target frames per source index along a valid path."""
    path.validate()
    return np.bincount(np.asarray(path.indices), minlength=path.t_src).astype(np.int64)


@dataclass(frozen=True)
class AlignmentDiagnostics:
    log_alignment: LogAlignment
    path: MonotonicPath
    viterbi_score: float
    forward_sum: LossValue
    kl: LossValue


def aas_durations(
    src, trg, config: AASConfig | None = None
) -> tuple[np.ndarray, AlignmentDiagnostics]:
    """Full alignment search: paired features in, integer durations out.

    Composes distance_matrix -> log_soft_alignment (with the diagonal
    prior unless disabled) -> mas -> path_to_durations, and evaluates
    both alignment losses on the same log-domain matrix fed to the
    search.
    """
    cfg = config if config is not None else AASConfig()
    dist = distance_matrix(src, trg)
    prior = None
    if cfg.use_prior:
        prior = beta_binomial_prior(dist.shape[0], dist.shape[1], cfg.omega)
    la = log_soft_alignment(dist, prior)
    mas_scores = np.exp(la.data) if cfg.viterbi_on_linear else la.data
    path, q = mas(mas_scores)
    durations = path_to_durations(path)
    diagnostics = AlignmentDiagnostics(
        log_alignment=la,
        path=path,
        viterbi_score=float(q[-1, -1]),
        forward_sum=forward_sum(la),
        kl=kl_hard_soft(la, path),
    )
    return durations, diagnostics

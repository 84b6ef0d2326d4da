"""Training-loss terms as pure value-and-gradient functions.

The alignment likelihood is a blank-free monotone-lattice forward
algorithm (stay-or-advance transitions only): the alignment lattice has
no blank symbol, so generic CTC with blanks would change the path set.
Gradients are with respect to the log-probability inputs; chaining back
through softmax or distance stages is the caller's job.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .config import ObjectiveWeights
from .errors import (
    DimensionMismatch,
    LengthMismatch,
    NegativeDuration,
    NoFeasiblePath,
    NonFiniteInput,
)

if TYPE_CHECKING:  # pragma: no cover
    from .align import LogAlignment, MonotonicPath


@dataclass(frozen=True)
class LossValue:
    """A scalar loss plus, when computed, its gradient w.r.t. the input."""

    value: float
    gradient: np.ndarray | None = None


def _as_log_probs(log_probs) -> np.ndarray:
    lp = np.asarray(getattr(log_probs, "data", log_probs), dtype=np.float64)
    if lp.ndim != 2:
        raise DimensionMismatch(f"log-probs must be 2-D, got shape {lp.shape}")
    if np.isnan(lp).any() or np.isposinf(lp).any():
        raise NonFiniteInput("log-probs contain NaN or +inf")
    return lp


def _mask_band(table: np.ndarray) -> None:
    # Zero out (to -inf) cells that cannot lie on any complete path:
    # i <= j and t_src-1-i <= t_trg-1-j.
    t_src, t_trg = table.shape
    i = np.arange(t_src)[:, None]
    j = np.arange(t_trg)[None, :]
    table[(i > j) | (t_src - 1 - i > t_trg - 1 - j)] = -np.inf


def _forward_table(lp: np.ndarray) -> np.ndarray:
    t_src, t_trg = lp.shape
    alpha = np.full((t_src, t_trg), -np.inf)
    alpha[0, 0] = lp[0, 0]
    for j in range(1, t_trg):
        prev = alpha[:, j - 1]
        diag = np.empty(t_src)
        diag[0] = -np.inf
        diag[1:] = prev[:-1]
        alpha[:, j] = np.logaddexp(prev, diag) + lp[:, j]
    _mask_band(alpha)
    return alpha


def _backward_table(lp: np.ndarray) -> np.ndarray:
    t_src, t_trg = lp.shape
    beta = np.full((t_src, t_trg), -np.inf)
    beta[t_src - 1, t_trg - 1] = 0.0
    for j in range(t_trg - 2, -1, -1):
        nxt = beta[:, j + 1] + lp[:, j + 1]
        up = np.empty(t_src)
        up[t_src - 1] = -np.inf
        up[:-1] = nxt[1:]
        beta[:, j] = np.logaddexp(nxt, up)
    _mask_band(beta)
    return beta


def forward_sum(log_probs, with_gradient: bool = True) -> LossValue:
    """Negative log of the total probability over all monotone paths.

    Runs the forward recursion
    alpha(i, j) = logaddexp(alpha(i-1, j-1), alpha(i, j-1)) + lp(i, j)
    over the feasible band and returns the raw (unnormalized) NLL
    -alpha(t_src-1, t_trg-1).  The gradient, computed by forward-backward,
    is the negated posterior occupancy of each cell; each of its columns
    sums to -1.

    Args:
        log_probs: (t_src, t_trg) log-probability matrix or LogAlignment.
        with_gradient: skip the backward pass when only the value is needed.
    """
    lp = _as_log_probs(log_probs)
    t_src, t_trg = lp.shape
    if t_trg < t_src:
        raise NoFeasiblePath(
            f"target length {t_trg} is shorter than source length {t_src}"
        )
    alpha = _forward_table(lp)
    total = alpha[t_src - 1, t_trg - 1]
    if not np.isfinite(total):
        raise NoFeasiblePath("terminal cell unreachable: -inf scores block every path")
    if not with_gradient:
        return LossValue(float(-total))
    beta = _backward_table(lp)
    occupancy = np.exp(alpha + beta - total)
    return LossValue(float(-total), -occupancy)


def kl_hard_soft(log_soft, hard: "MonotonicPath") -> LossValue:
    """Per-target-frame cross-entropy of a hard path under soft log-probs.

    With a one-hot reference per column this equals the per-column KL
    divergence from the hard to the soft alignment, averaged over target
    frames so the loss scale is independent of utterance length.
    """
    ls = np.asarray(getattr(log_soft, "data", log_soft), dtype=np.float64)
    if ls.ndim != 2:
        raise DimensionMismatch(f"log-probs must be 2-D, got shape {ls.shape}")
    hard.validate()
    if ls.shape != (hard.t_src, hard.t_trg):
        raise DimensionMismatch(
            f"soft alignment shape {ls.shape} does not match path "
            f"({hard.t_src}, {hard.t_trg})"
        )
    t_trg = ls.shape[1]
    cols = np.arange(t_trg)
    picked = ls[hard.indices, cols]
    grad = np.zeros_like(ls)
    grad[hard.indices, cols] = -1.0 / t_trg
    return LossValue(float(-picked.mean()), grad)


def l1_loss(pred, target) -> LossValue:
    """Mean absolute elementwise difference between two frame matrices."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise DimensionMismatch(f"shapes differ: {p.shape} vs {t.shape}")
    if not (np.isfinite(p).all() and np.isfinite(t).all()):
        raise NonFiniteInput("inputs contain NaN or Inf")
    diff = p - t
    return LossValue(float(np.abs(diff).mean()), np.sign(diff) / p.size)


def duration_loss(pred_log_durations, gt_durations, domain: str = "log1p") -> LossValue:
    """L1 duration-prediction loss, by default in the log1p domain.

    Durations are heavy-tailed, so predictions are compared against
    log(1 + d); pass ``domain="linear"`` to compare raw values instead.
    """
    if domain not in ("log1p", "linear"):
        raise ValueError(f"domain must be 'log1p' or 'linear', got {domain!r}")
    p = np.asarray(pred_log_durations, dtype=np.float64)
    g = np.asarray(gt_durations)
    if p.ndim != 1 or g.ndim != 1:
        raise DimensionMismatch("duration inputs must be 1-D vectors")
    if p.shape[0] != g.shape[0]:
        raise LengthMismatch(f"lengths differ: {p.shape[0]} vs {g.shape[0]}")
    if (g < 0).any():
        raise NegativeDuration("ground-truth durations must be >= 0")
    target = np.log1p(g.astype(np.float64)) if domain == "log1p" else g.astype(np.float64)
    diff = p - target
    return LossValue(float(np.abs(diff).mean()), np.sign(diff) / p.shape[0])


def total_objective(
    l1: float,
    ldp: float,
    lfwd: float,
    lkl: float,
    weights: ObjectiveWeights | None = None,
) -> float:
    """Weighted total: l1 + ldp + alpha * (lfwd + lkl)."""
    w = weights if weights is not None else ObjectiveWeights()
    terms = np.array([l1, ldp, lfwd, lkl], dtype=np.float64)
    if not np.isfinite(terms).all():
        raise NonFiniteInput("loss terms must be finite")
    return float(l1 + ldp + w.alpha * (lfwd + lkl))

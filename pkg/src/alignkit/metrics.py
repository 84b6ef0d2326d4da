"""Objective evaluation metrics for converted/target utterance pairs.

Metrics consume precomputed arrays (mel-cepstra, F0 contours, predicted
durations); feature extraction lives outside this library so results
stay deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .align import distance_matrix
from .errors import (
    DimensionMismatch,
    EmptyInput,
    InsufficientVoicedFrames,
    InvalidParameter,
    LengthMismatch,
    NonFiniteInput,
    ZeroVariance,
)

# 256-sample hop at 16 kHz.
DEFAULT_FRAME_SHIFT_S = 256.0 / 16000.0

_MCD_SCALE = 10.0 / math.log(10.0)


@dataclass(frozen=True)
class WarpPath:
    """A DTW warp path: (L, 2) array of (row, col) pairs plus total cost."""

    pairs: np.ndarray
    total_cost: float


def dtw(cost) -> WarpPath:
    """Minimum-total-cost warp path with moves {(1,0), (0,1), (1,1)}.

    The cumulative table is filled along anti-diagonals (each cell only
    needs the two previous diagonals) so the DP stays vectorized.
    Backtracking prefers the diagonal predecessor, then the vertical
    one, making tie handling deterministic.
    """
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
        raise DimensionMismatch(f"cost must be a non-empty 2-D matrix, got {c.shape}")
    if not np.isfinite(c).all():
        raise NonFiniteInput("cost matrix contains NaN or Inf")
    if (c < 0).any():
        raise InvalidParameter("cost matrix must be non-negative")
    n, m = c.shape
    cum = np.full((n, m), np.inf)
    cum[0, 0] = c[0, 0]
    for diag in range(1, n + m - 1):
        i = np.arange(max(0, diag - m + 1), min(n - 1, diag) + 1)
        j = diag - i
        up_i = np.maximum(i - 1, 0)
        left_j = np.maximum(j - 1, 0)
        from_up = np.where(i >= 1, cum[up_i, j], np.inf)
        from_left = np.where(j >= 1, cum[i, left_j], np.inf)
        from_diag = np.where((i >= 1) & (j >= 1), cum[up_i, left_j], np.inf)
        best = np.minimum(np.minimum(from_diag, from_up), from_left)
        cum[i, j] = c[i, j] + best

    pairs = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while (i, j) != (0, 0):
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            candidates = ((cum[i - 1, j - 1], i - 1, j - 1),
                          (cum[i - 1, j], i - 1, j),
                          (cum[i, j - 1], i, j - 1))
            best = min(v for v, _, _ in candidates)
            for v, pi, pj in candidates:
                if v == best:
                    i, j = pi, pj
                    break
        pairs.append((i, j))
    pairs.reverse()
    return WarpPath(np.asarray(pairs, dtype=np.int64), float(cum[n - 1, m - 1]))


def mcd(mcc_x, mcc_y, exclude_c0: bool = True) -> float:
    """Mel-cepstral distortion in dB over DTW-aligned frames.

    Frames are warped on the included coefficients, then the mean of
    (10/ln 10) * sqrt(2 * sum_d delta_d^2) over path nodes is returned.
    Coefficient 0 (overall energy) is dropped by default, the usual
    convention for this metric.
    """
    x = np.asarray(mcc_x, dtype=np.float64)
    y = np.asarray(mcc_y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2:
        raise DimensionMismatch("mel-cepstra must be 2-D (frames x coefficients)")
    if x.shape[0] < 1 or y.shape[0] < 1:
        raise EmptyInput("mel-cepstra must contain at least one frame")
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatch(
            f"coefficient counts differ: {x.shape[1]} vs {y.shape[1]}"
        )
    if exclude_c0:
        if x.shape[1] < 2:
            raise EmptyInput("excluding c0 leaves no coefficients")
        x = x[:, 1:]
        y = y[:, 1:]
    cost = distance_matrix(x, y)
    path = dtw(cost)
    per_node = cost[path.pairs[:, 0], path.pairs[:, 1]]
    return float(_MCD_SCALE * math.sqrt(2.0) * per_node.mean())


def _as_contour(values, name: str) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be a 1-D contour")
    if not np.isfinite(v).all():
        raise NonFiniteInput(f"{name} contains NaN or Inf")
    if (v < 0).any():
        raise InvalidParameter(f"{name} must be >= 0 (0 marks unvoiced frames)")
    return v


def f0corr(f0_x, f0_y) -> float:
    """Pearson correlation of two F0 contours over mutually voiced frames.

    Contours must already be paired frame-by-frame (equal length); use
    ``pair_by_warp`` first when they are not.
    """
    x = _as_contour(f0_x, "f0_x")
    y = _as_contour(f0_y, "f0_y")
    if x.shape[0] != y.shape[0]:
        raise LengthMismatch(f"contour lengths differ: {x.shape[0]} vs {y.shape[0]}")
    voiced = (x > 0) & (y > 0)
    if int(voiced.sum()) < 2:
        raise InsufficientVoicedFrames(
            f"need >= 2 mutually voiced frames, got {int(voiced.sum())}"
        )
    xv = x[voiced]
    yv = y[voiced]
    xd = xv - xv.mean()
    yd = yv - yv.mean()
    sx = math.sqrt(float((xd * xd).sum()))
    sy = math.sqrt(float((yd * yd).sum()))
    if sx == 0.0 or sy == 0.0:
        raise ZeroVariance("a contour is constant over the mutually voiced frames")
    # Rounding can push |r| a few ulp past 1; keep the documented range.
    return float(min(1.0, max(-1.0, (xd * yd).sum() / (sx * sy))))


def pair_by_warp(values_x, values_y, warp: WarpPath) -> tuple[np.ndarray, np.ndarray]:
    """Pair two per-frame vectors along a DTW warp path."""
    x = np.asarray(values_x)
    y = np.asarray(values_y)
    if x.ndim != 1 or y.ndim != 1:
        raise DimensionMismatch("per-frame values must be 1-D")
    pairs = warp.pairs
    if pairs[:, 0].max() >= x.shape[0] or pairs[:, 1].max() >= y.shape[0]:
        raise LengthMismatch("warp path indexes beyond the provided vectors")
    return x[pairs[:, 0]], y[pairs[:, 1]]


def ddur(frames_x: int, frames_y: int, frame_shift_s: float = DEFAULT_FRAME_SHIFT_S) -> float:
    """Absolute duration difference in seconds between two frame counts."""
    if int(frames_x) != frames_x or int(frames_y) != frames_y:
        raise InvalidParameter("frame counts must be integers")
    if frames_x <= 0 or frames_y <= 0:
        raise InvalidParameter("frame counts must be positive")
    if not (np.isfinite(frame_shift_s) and frame_shift_s > 0):
        raise InvalidParameter(f"frame shift must be a positive real, got {frame_shift_s}")
    return abs(int(frames_x) - int(frames_y)) * float(frame_shift_s)


def dvar(predicted_durations) -> float:
    """Population variance of pooled frame-level duration predictions.

    Zero means the predictor collapsed to a constant (a purely linear
    duration mapping).
    """
    v = np.asarray(predicted_durations, dtype=np.float64).ravel()
    if v.size == 0:
        raise EmptyInput("no duration predictions to pool")
    if not np.isfinite(v).all():
        raise NonFiniteInput("duration predictions contain NaN or Inf")
    return float(np.var(v))

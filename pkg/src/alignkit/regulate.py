"""Length regulation (expand) and adjacent-frame stacking (reduce)."""

from __future__ import annotations

import numpy as np

from .config import PAD_REPEAT_LAST, ReductionConfig
from .errors import (
    DimensionMismatch,
    EmptyOutput,
    InvalidParameter,
    LengthMismatch,
    NegativeDuration,
    NonFiniteInput,
)


def expand(seq, durations) -> np.ndarray:
    """Repeat frame i of ``seq`` durations[i] times, in order.

    A duration of 0 drops the frame entirely, so the output can be
    shorter than the input despite the name.
    """
    s = np.asarray(seq, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] < 1:
        raise DimensionMismatch(f"seq must be a non-empty 2-D matrix, got {s.shape}")
    d = np.asarray(durations)
    if d.ndim != 1:
        raise DimensionMismatch("durations must be a 1-D vector")
    if d.shape[0] != s.shape[0]:
        raise LengthMismatch(
            f"durations length {d.shape[0]} does not match {s.shape[0]} frames"
        )
    as_float = d.astype(np.float64)
    if not np.isfinite(as_float).all():
        raise NonFiniteInput("durations contain NaN or Inf")
    if np.any(as_float != np.floor(as_float)):
        raise InvalidParameter("durations must be integers")
    d = d.astype(np.int64)
    if (d < 0).any():
        raise NegativeDuration("durations must be >= 0")
    if int(d.sum()) == 0:
        raise EmptyOutput("all durations are 0; output would have no frames")
    return np.repeat(s, d, axis=0)


def reduce_stack(seq, config: ReductionConfig | None = None) -> np.ndarray:
    """Stack k adjacent frames into one wider frame.

    (T, d) becomes (ceil(T/k), d*k) under pad_repeat_last (the final
    frame is repeated to fill the last stack) or (floor(T/k), d*k) under
    truncate.
    """
    cfg = config if config is not None else ReductionConfig()
    s = np.asarray(seq, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] < 1:
        raise DimensionMismatch(f"seq must be a non-empty 2-D matrix, got {s.shape}")
    t, d = s.shape
    k = cfg.k
    if k == 1:
        return s.copy()
    if cfg.pad_policy == PAD_REPEAT_LAST:
        m = -(-t // k)
        deficit = m * k - t
        if deficit:
            s = np.concatenate([s, np.repeat(s[-1:], deficit, axis=0)], axis=0)
    else:
        m = t // k
        if m == 0:
            raise EmptyOutput(f"truncating {t} frames by k={k} leaves no rows")
        s = s[: m * k]
    return s.reshape(m, d * k)

"""Seeded verification harness: recovery trials plus brute-force oracles.

Desk-scale stand-in for end-to-end training runs: synthetic targets are
constructed by expanding random sources with known durations, and the
search must recover those durations.  The DP kernels are also checked
against exhaustive path enumeration and finite differences.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .align import aas_durations, log_soft_alignment, mas
from .config import AASConfig
from .losses import forward_sum, kl_hard_soft
from .regulate import expand

THRESHOLDS = {
    "recovery_rate_min": 0.99,
    "noiseless_recovery_rate_min": 1.0,
    "viterbi_max_abs_deviation": 1e-12,
    "forward_max_rel_deviation": 1e-9,
    "gradient_max_rel_error": 1e-5,
    "occupancy_max_column_deviation": 1e-9,
}


def iter_monotone_paths(t_src: int, t_trg: int):
    """Yield every path as an index-per-target-frame tuple.

    A path is fixed by choosing which t_src-1 of the t_trg-1 steps
    advance the source index, so there are C(t_trg-1, t_src-1) of them.
    """
    for advances in itertools.combinations(range(1, t_trg), t_src - 1):
        path = []
        i = 0
        advance_set = set(advances)
        for j in range(t_trg):
            if j in advance_set:
                i += 1
            path.append(i)
        yield tuple(path)


def enumerate_best_path_score(scores: np.ndarray) -> float:
    t_src, t_trg = scores.shape
    best = -math.inf
    for path in iter_monotone_paths(t_src, t_trg):
        total = 0.0
        for j, i in enumerate(path):
            total += scores[i, j]
        best = max(best, total)
    return best


def enumerate_path_probability(log_probs: np.ndarray) -> float:
    t_src, t_trg = log_probs.shape
    total = 0.0
    for path in iter_monotone_paths(t_src, t_trg):
        s = 0.0
        for j, i in enumerate(path):
            s += log_probs[i, j]
        total += math.exp(s)
    return total


def _random_log_alignment(rng: np.random.Generator, t_src: int, t_trg: int) -> np.ndarray:
    dist = rng.uniform(0.0, 4.0, size=(t_src, t_trg))
    return log_soft_alignment(dist).data


def _finite_difference(fn, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    grad = np.empty_like(x)
    for idx in np.ndindex(*x.shape):
        orig = x[idx]
        x[idx] = orig + eps
        hi = fn(x)
        x[idx] = orig - eps
        lo = fn(x)
        x[idx] = orig
        grad[idx] = (hi - lo) / (2.0 * eps)
    return grad


def _rel_error(got: np.ndarray, want: np.ndarray) -> float:
    scale = float(np.abs(want).max())
    if scale == 0.0:
        return float(np.abs(got - want).max())
    return float(np.abs(got - want).max() / scale)


def run_recovery_trials(
    trials: int, max_t_src: int, dim: int, sigma: float, rng: np.random.Generator,
    config: AASConfig | None = None,
) -> dict:
    """Construct-then-recover: expand a random source, add noise, align."""
    cfg = config if config is not None else AASConfig()
    exact = 0
    for _ in range(trials):
        t_src = int(rng.integers(2, max_t_src + 1))
        src = rng.standard_normal((t_src, dim))
        durations = rng.integers(1, 5, size=t_src)
        trg = expand(src, durations)
        if sigma > 0:
            trg = trg + sigma * rng.standard_normal(trg.shape)
        recovered, _ = aas_durations(src, trg, cfg)
        if np.array_equal(recovered, durations):
            exact += 1
    return {"trials": trials, "exact": exact, "rate": exact / trials}


def run_viterbi_oracle(instances: int, rng: np.random.Generator) -> dict:
    max_dev = 0.0
    for _ in range(instances):
        t_src = int(rng.integers(1, 7))
        t_trg = int(rng.integers(t_src, 10))
        lp = _random_log_alignment(rng, t_src, t_trg)
        _, q = mas(lp)
        dev = abs(float(q[-1, -1]) - enumerate_best_path_score(lp))
        max_dev = max(max_dev, dev)
    return {"instances": instances, "max_abs_deviation": max_dev}


def run_forward_oracle(instances: int, rng: np.random.Generator) -> dict:
    max_rel = 0.0
    for _ in range(instances):
        t_src = int(rng.integers(1, 6))
        t_trg = int(rng.integers(t_src, 9))
        lp = _random_log_alignment(rng, t_src, t_trg)
        got = math.exp(-forward_sum(lp, with_gradient=False).value)
        want = enumerate_path_probability(lp)
        max_rel = max(max_rel, abs(got - want) / want)
    return {"instances": instances, "max_rel_deviation": max_rel}


def run_gradient_checks(instances: int, rng: np.random.Generator) -> dict:
    max_rel = 0.0
    max_col_dev = 0.0
    for _ in range(instances):
        t_src = int(rng.integers(1, 6))
        t_trg = int(rng.integers(t_src, 9))
        lp = _random_log_alignment(rng, t_src, t_trg)

        fwd = forward_sum(lp)
        fd = _finite_difference(lambda m: forward_sum(m, with_gradient=False).value, lp.copy())
        max_rel = max(max_rel, _rel_error(fwd.gradient, fd))
        col_sums = fwd.gradient.sum(axis=0)
        max_col_dev = max(max_col_dev, float(np.abs(col_sums + 1.0).max()))

        path, _ = mas(lp)
        kl = kl_hard_soft(lp, path)
        fd_kl = _finite_difference(lambda m: kl_hard_soft(m, path).value, lp.copy())
        max_rel = max(max_rel, _rel_error(kl.gradient, fd_kl))
    return {
        "instances": instances,
        "max_rel_error": max_rel,
        "max_occupancy_column_deviation": max_col_dev,
    }


def run_selftest(
    trials: int = 200,
    max_t_src: int = 30,
    dim: int = 8,
    sigma: float = 0.01,
    seed: int = 1234,
) -> dict:
    """Run every suite with one seeded generator; returns the report dict."""
    rng = np.random.default_rng(seed)
    noisy = run_recovery_trials(trials, max_t_src, dim, sigma, rng)
    clean = run_recovery_trials(trials, max_t_src, dim, 0.0, rng)
    viterbi = run_viterbi_oracle(trials, rng)
    fwd = run_forward_oracle(trials, rng)
    grads = run_gradient_checks(max(10, trials // 4), rng)

    passed = (
        noisy["rate"] >= THRESHOLDS["recovery_rate_min"]
        and clean["rate"] >= THRESHOLDS["noiseless_recovery_rate_min"]
        and viterbi["max_abs_deviation"] <= THRESHOLDS["viterbi_max_abs_deviation"]
        and fwd["max_rel_deviation"] <= THRESHOLDS["forward_max_rel_deviation"]
        and grads["max_rel_error"] <= THRESHOLDS["gradient_max_rel_error"]
        and grads["max_occupancy_column_deviation"]
        <= THRESHOLDS["occupancy_max_column_deviation"]
    )
    return {
        "version": 1,
        "config": {
            "trials": trials,
            "max_t_src": max_t_src,
            "dim": dim,
            "sigma": sigma,
            "seed": seed,
        },
        "recovery": noisy,
        "recovery_noiseless": clean,
        "viterbi_oracle": viterbi,
        "forward_oracle": fwd,
        "gradient_check": grads,
        "thresholds": THRESHOLDS,
        "passed": passed,
    }

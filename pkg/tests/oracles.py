"""Independent brute-force oracles used to pin expected test values.

Everything here is deliberately written as scalar loops and direct
formula evaluation, independent of the vectorized library code it
checks.
"""

import itertools
import math


def pairwise_norms(src, trg):
    """Per-pair Euclidean norms via explicit scalar loops."""
    out = []
    for a in src:
        row = []
        for b in trg:
            acc = 0.0
            for x, y in zip(a, b):
                acc += (x - y) ** 2
            row.append(math.sqrt(acc))
        out.append(row)
    return out


def lbeta(x, y):
    return math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y)


def betabinom_pmf(k, n, a, b):
    """C(n,k) * B(k+a, n-k+b) / B(a,b), evaluated through log-gammas."""
    log_comb = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
    return math.exp(log_comb + lbeta(k + a, n - k + b) - lbeta(a, b))


def prior_column(t_src, t_trg, j, omega):
    n = t_src - 1
    a = omega * (j + 1)
    b = omega * (t_trg - j)
    return [betabinom_pmf(k, n, a, b) for k in range(t_src)]


def column_log_softmax(neg_values):
    """Scalar log-softmax of a single column of scores."""
    m = max(neg_values)
    z = sum(math.exp(v - m) for v in neg_values)
    return [v - m - math.log(z) for v in neg_values]


def monotone_paths(t_src, t_trg):
    """All index-per-target-frame paths: a(0)=0, a(-1)=t_src-1, steps 0/1."""
    paths = []
    for advances in itertools.combinations(range(1, t_trg), t_src - 1):
        advance_set = set(advances)
        path = []
        i = 0
        for j in range(t_trg):
            if j in advance_set:
                i += 1
            path.append(i)
        paths.append(tuple(path))
    return paths


def path_score(scores, path):
    total = 0.0
    for j, i in enumerate(path):
        total += scores[i][j]
    return total


def best_monotone_score(scores):
    t_src = len(scores)
    t_trg = len(scores[0])
    return max(path_score(scores, p) for p in monotone_paths(t_src, t_trg))


def total_path_probability(log_probs):
    t_src = len(log_probs)
    t_trg = len(log_probs[0])
    return sum(
        math.exp(path_score(log_probs, p)) for p in monotone_paths(t_src, t_trg)
    )


def dtw_min_cost(cost):
    """Minimum warp cost by memoized recursion over {down, right, diag}."""
    n = len(cost)
    m = len(cost[0])
    memo = {}

    def rec(i, j):
        if (i, j) == (0, 0):
            return cost[0][0]
        if (i, j) in memo:
            return memo[(i, j)]
        best = math.inf
        if i > 0 and j > 0:
            best = min(best, rec(i - 1, j - 1))
        if i > 0:
            best = min(best, rec(i - 1, j))
        if j > 0:
            best = min(best, rec(i, j - 1))
        memo[(i, j)] = best + cost[i][j]
        return memo[(i, j)]

    return rec(n - 1, m - 1)


def two_pass_variance(values):
    n = len(values)
    mean = sum(values) / n
    return sum((v - mean) ** 2 for v in values) / n


def central_difference(fn, x, eps=1e-6):
    """Elementwise central finite differences of a scalar function."""
    grad = [[0.0] * len(x[0]) for _ in x]
    for i in range(len(x)):
        for j in range(len(x[0])):
            orig = x[i][j]
            x[i][j] = orig + eps
            hi = fn(x)
            x[i][j] = orig - eps
            lo = fn(x)
            x[i][j] = orig
            grad[i][j] = (hi - lo) / (2 * eps)
    return grad

"""Fabrication-yield analytics: how defect tolerance scales with mode overhead.

With per-component defect probability ``epsilon`` and roughly ``n**2``
components on an n-mode universal mesh, the no-defect probability is
``(1 - epsilon)**N``; demanding it exceed 1/2 caps the feasible mode count.
Building ``n + m`` modes instead and circumventing up to ``m`` single-mode
defects replaces the no-defect condition with a binomial tail
``P[defects <= m] > 1/2``, which is dramatically easier to meet.  All tail
probabilities are evaluated in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels

APPROXIMATE = "approximate"
EXACT = "exact"


def component_count(modes: int, count_model: str = APPROXIMATE) -> int:
    """Optical components on a universal mesh with the given mode count.

    The approximate model uses modes**2; the exact inventory of a rectangular
    mesh (crossings plus all phase shifters) is modes**2 - 1.
    """
    if modes < 1:
        raise ValueError(f"mode count must be positive, got {modes}")
    if count_model == APPROXIMATE:
        return modes * modes
    if count_model == EXACT:
        return modes * modes - 1
    raise ValueError(f"unknown count model {count_model!r}")


def p_zero_defect(n: int, epsilon: float, count_model: str = APPROXIMATE) -> float:
    """Probability that none of the components of an n-mode mesh is defective."""
    _check_epsilon(epsilon, closed=True)
    if epsilon == 1.0:
        return 0.0
    weight = component_count(n, count_model)
    return math.exp(weight * math.log1p(-epsilon))


def p_at_most(N: int, m: int, epsilon: float) -> float:
    """Binomial tail P[X <= m] for X ~ Bin(N, epsilon), in log space."""
    if not 0 <= m <= N:
        raise ValueError(f"need 0 <= m <= N, got m={m}, N={N}")
    _check_epsilon(epsilon, closed=True)
    if epsilon == 0.0 or m == N:
        return 1.0
    if epsilon == 1.0:
        return 0.0
    k = np.arange(1, m + 1, dtype=float)
    log_comb = np.concatenate(([0.0], np.cumsum(np.log(N - k + 1.0) - np.log(k))))
    ks = np.arange(m + 1, dtype=float)
    logs = log_comb + ks * math.log(epsilon) + (N - ks) * math.log1p(-epsilon)
    peak = logs.max()
    return float(min(1.0, math.exp(peak) * np.exp(logs - peak).sum()))


def _check_epsilon(epsilon: float, closed: bool) -> None:
    lo_ok = epsilon >= 0.0 if closed else epsilon > 0.0
    if not (lo_ok and epsilon <= 1.0):
        kind = "[0, 1]" if closed else "(0, 1]"
        raise ValueError(f"defect probability must lie in {kind}, got {epsilon}")


def _largest_true(pred, start_hi: int) -> int:
    """Largest n >= 1 with pred(n) true, for monotonically failing pred; 0 if none."""
    if not pred(1):
        return 0
    hi = max(start_hi, 2)
    while pred(hi):
        hi *= 2
        if hi > 1 << 26:
            raise ValueError("search bound exceeded; probability too close to 1")
    lo = 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def max_modes_plain(epsilon: float, count_model: str = APPROXIMATE) -> int:
    """Largest n whose zero-defect probability strictly exceeds 1/2.

    For the approximate model this is the floor of
    sqrt(log(2) / log(1/(1-epsilon))); ties at exactly 1/2 fail.
    """
    if epsilon == 0.0:
        raise ValueError("epsilon = 0 admits unboundedly large meshes")
    _check_epsilon(epsilon, closed=False)
    if epsilon == 1.0:
        return 0
    guess = int(math.sqrt(math.log(2.0) / -math.log1p(-epsilon))) + 2
    return _largest_true(lambda n: p_zero_defect(n, epsilon, count_model) > 0.5, guess)


def _overhead_ok(n: int, r: float, epsilon: float, count_model: str) -> bool:
    m = int(math.floor(r * n))
    N = component_count(n + m, count_model)
    return p_at_most(N, m, epsilon) > 0.5


def max_modes_overhead(epsilon: float, r: float, count_model: str = APPROXIMATE) -> int:
    """Largest target size n feasible with overhead ratio r = m/n.

    The mesh is built with n + floor(r*n) modes and up to floor(r*n)
    single-mode defects are circumvented; feasibility means the defect count
    stays within budget with probability above 1/2.  The predicate is not
    monotone across floor jumps of r*n, so the search uses a smoothing window
    of width ~1/r before a final exact scan.
    """
    if epsilon == 0.0:
        raise ValueError("epsilon = 0 admits unboundedly large meshes")
    _check_epsilon(epsilon, closed=False)
    if r < 0:
        raise ValueError(f"overhead ratio must be nonnegative, got {r}")
    if r == 0:
        return max_modes_plain(epsilon, count_model)

    window = int(math.ceil(1.0 / r)) + 2

    def ok(n):
        return _overhead_ok(n, r, epsilon, count_model)

    def window_ok(n):
        return any(ok(k) for k in range(n, n + window))

    top = _largest_true(window_ok, max(4, int(r / (epsilon * (1 + r) ** 2)) + 1))
    for n in range(top + window - 1, 0, -1):
        if ok(n):
            return n
    return 0


def tolerance_curve(r: float, epsilon_grid, count_model: str = APPROXIMATE):
    """Rows (epsilon, max_n) over a sorted defect-probability grid."""
    grid = [float(e) for e in epsilon_grid]
    if not grid:
        raise ValueError("empty epsilon grid")
    if sorted(grid) != grid:
        raise ValueError("epsilon grid must be sorted ascending")
    return [(eps, max_modes_overhead(eps, r, count_model)) for eps in grid]


def tolerance_curve_csv(rows) -> str:
    lines = ["epsilon,max_n"]
    for eps, max_n in rows:
        lines.append(f"{np.format_float_positional(eps, trim='-')},{max_n}")
    return "\n".join(lines) + "\n"


def threshold_epsilon(n: int, r: float, count_model: str = APPROXIMATE) -> float:
    """Largest tolerable per-component defect probability at fixed target size.

    Supremum of epsilon for which the (n, r) design stays feasible; computed
    by bisection on the strictly decreasing success probability.
    """
    if n < 1:
        raise ValueError(f"target size must be positive, got {n}")
    if r < 0:
        raise ValueError(f"overhead ratio must be nonnegative, got {r}")

    def ok(eps):
        if r == 0:
            return p_zero_defect(n, eps, count_model) > 0.5
        return _overhead_ok(n, r, eps, count_model)

    lo, hi = 0.0, 1.0
    if not ok(1e-300):
        return 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    stderr: float
    trials: int
    components: int
    defect_budget: int
    successes: int


def monte_carlo_yield(
    n: int,
    m: int,
    epsilon: float,
    trials: int,
    seed: int = 0,
    count_model: str = APPROXIMATE,
) -> MonteCarloEstimate:
    """Stochastic cross-check of the binomial tail.

    Simulates independent per-component defects on an (n + m)-mode mesh and
    reports the fraction of trials with at most m defective components.  The
    per-(trial, component) randomness is derived from the seed by a
    counter-based hash, so results are independent of evaluation order and
    reproducible for a fixed seed.
    """
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    _check_epsilon(epsilon, closed=True)
    N = component_count(n + m, count_model)
    counts = kernels.mc_defect_counts(seed, N, epsilon, trials)
    successes = int((counts <= m).sum())
    p = successes / trials
    stderr = math.sqrt(p * (1.0 - p) / trials)
    return MonteCarloEstimate(p, stderr, trials, N, m, successes)

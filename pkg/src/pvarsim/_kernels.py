"""Numba kernels for the driven-flow recursions.

All kernels are pure functions of their array arguments; parallel loops only
write disjoint output slots, so results are independent of the thread count.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(cache=True, inline="always")
def _s_psi_inv(y: float) -> float:
    # mirrored branches keep s_psi_inv(-y) == 1 - s_psi_inv(y) bit-exact
    if y >= 0.0:
        return (2.0 * y + 1.0) / (2.0 * (1.0 + y))
    return 1.0 - (-2.0 * y + 1.0) / (2.0 * (1.0 - y))


@njit(cache=True)
def propagate_shared(driver: np.ndarray, states0: np.ndarray) -> np.ndarray:
    """Run x <- x + (1+|x|) d through one driver for a batch of starts."""
    m = states0.size
    x = states0.copy()
    for i in range(driver.size):
        d = driver[i]
        for s in range(m):
            x[s] = x[s] + (1.0 + abs(x[s])) * d
    return x


@njit(cache=True, parallel=True)
def propagate_batch(drivers: np.ndarray, states0: np.ndarray) -> np.ndarray:
    """Per-row drivers: propagate each row of states0 through its own driver."""
    n_rows, n_steps = drivers.shape
    m = states0.shape[1]
    out = np.empty((n_rows, m))
    for r in prange(n_rows):
        x = states0[r].copy()
        for i in range(n_steps):
            d = drivers[r, i]
            for s in range(m):
                x[s] = x[s] + (1.0 + abs(x[s])) * d
        out[r] = x
    return out


@njit(cache=True)
def propagate_with_derivative(driver: np.ndarray, dt: float, x0: float):
    """Flow endpoint plus the log-derivative pieces along the trajectory.

    Returns (x_end, n_sum, bracket) with n_sum = sum sign(x_i) d_i and
    bracket = sum sign(x_i)^2 dt, both left-point; sign(0) := 0.
    """
    x = x0
    n_sum = 0.0
    bracket = 0.0
    for i in range(driver.size):
        d = driver[i]
        if x > 0.0:
            sgn = 1.0
        elif x < 0.0:
            sgn = -1.0
        else:
            sgn = 0.0
        n_sum += sgn * d
        bracket += sgn * sgn * dt
        x = x + (1.0 + abs(x)) * d
    return x, n_sum, bracket


@njit(cache=True, parallel=True)
def derivative_batch(drivers: np.ndarray, dt: float, x0: float) -> np.ndarray:
    """exp(N - bracket/2) per driver row, evaluated left-point along the flow."""
    n_rows = drivers.shape[0]
    out = np.empty(n_rows)
    for r in prange(n_rows):
        x = x0
        n_sum = 0.0
        bracket = 0.0
        for i in range(drivers.shape[1]):
            d = drivers[r, i]
            if x > 0.0:
                sgn = 1.0
            elif x < 0.0:
                sgn = -1.0
            else:
                sgn = 0.0
            n_sum += sgn * d
            bracket += sgn * sgn * dt
            x = x + (1.0 + abs(x)) * d
        out[r] = np.exp(n_sum - 0.5 * bracket)
    return out


@njit(cache=True, parallel=True)
def conditional_pvar_sums(
    forward: np.ndarray, root: float, ps: np.ndarray
) -> np.ndarray:
    """Conditional p-variation sums on the coarse Rademacher lattice.

    For each trajectory row of forward increments d_1..d_n and each partition
    index k, the flow map of the reversed driver for horizon t_k is evaluated
    at 0 (the running median) and at +-root; the two-point average is the
    exact one-step conditional expectation of the next median.  Returns the
    sums over k of |cond. expectation - median|^p, one column per p.
    """
    n_traj, n = forward.shape
    n_p = ps.size
    out = np.zeros((n_traj, n_p))
    for j in prange(n_traj):
        for k in range(n):
            a = 0.0
            b = root
            c = -root
            for i in range(k, 0, -1):
                d = -forward[j, i - 1]
                a = a + (1.0 + abs(a)) * d
                b = b + (1.0 + abs(b)) * d
                c = c + (1.0 + abs(c)) * d
            median_k = _s_psi_inv(a)
            cond_k = 0.5 * (_s_psi_inv(b) + _s_psi_inv(c))
            incr = abs(cond_k - median_k)
            for q in range(n_p):
                out[j, q] += incr ** ps[q]
    return out


@njit(cache=True, parallel=True)
def direct_flow_batch(increments: np.ndarray, x_grid: np.ndarray, eps: float):
    """Forward Euler of dD = min(D, 1-D) dB for a batch of paths.

    Returns (D_end, clamped) where D_end[r] is the terminal flow over x_grid
    for path r and clamped[r] counts the (0,1)-escapes clipped to [eps, 1-eps].
    """
    n_rows, n_steps = increments.shape
    m = x_grid.size
    out = np.empty((n_rows, m))
    clamped = np.zeros(n_rows, dtype=np.int64)
    for r in prange(n_rows):
        dvals = x_grid.copy()
        for i in range(n_steps):
            d = increments[r, i]
            for s in range(m):
                v = dvals[s]
                sig = v if v < 1.0 - v else 1.0 - v
                v = v + sig * d
                if v < eps:
                    v = eps
                    clamped[r] += 1
                elif v > 1.0 - eps:
                    v = 1.0 - eps
                    clamped[r] += 1
                dvals[s] = v
        out[r] = dvals
    return out, clamped

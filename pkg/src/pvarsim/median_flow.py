"""Conditional-median process via a time-reversed driven flow.

The conditional distribution flow dD = sigma(D) dB with the tent diffusion
sigma(x) = min(x, 1-x) is mapped by the Lamperti change psi (unit diffusion)
and the drift-removing scale change s into a drift-free flow that the
recursion x <- x + (1+|x|) d integrates exactly on a Rademacher lattice.
Running that recursion against the time-reversed driver produces the space
inverse of the forward flow, and the median at horizon T is the inverse
scale/Lamperti image of the endpoint started from 0.

sign(0) := 0 everywhere a sign of the state enters drift or integrand terms.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NumericalError, PvarsimError
from .rng import TAG_INNER, generator, mix_seed

log = logging.getLogger(__name__)

_CLAMP_EPS = 1e-12


# ---------------------------------------------------------------------------
# space changes
# ---------------------------------------------------------------------------


def diffusion_sigma(x):
    """Tent diffusion coefficient sigma(x) = min(x, 1 - x)."""
    x = np.asarray(x, dtype=np.float64)
    out = np.minimum(x, 1.0 - x)
    return out if out.ndim else float(out)


def lamperti(x):
    """Unit-diffusion change on (0, 1): sign(1-2x) * log(1 - |1-2x|)."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0.0) or np.any(x >= 1.0):
        raise PvarsimError("lamperti is defined on (0, 1)")
    u = 1.0 - 2.0 * x
    out = np.sign(u) * np.log1p(-np.abs(u))
    return out if out.ndim else float(out)


def lamperti_inv(y):
    """Inverse of lamperti: y <= 0 -> exp(y)/2, y >= 0 -> 1 - exp(-y)/2."""
    y = np.asarray(y, dtype=np.float64)
    out = np.where(y <= 0.0, 0.5 * np.exp(y), 1.0 - 0.5 * np.exp(-y))
    return out if out.ndim else float(out)


def scale_map(x):
    """Drift-removing scale change s(x) = sign(x) (e^|x| - 1)."""
    x = np.asarray(x, dtype=np.float64)
    out = np.sign(x) * np.expm1(np.abs(x))
    return out if out.ndim else float(out)


def scale_lamperti(x):
    """s o lamperti in closed form: 1 - 1/(2x) below 1/2, (2x-1)/(2-2x) above."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0.0) or np.any(x >= 1.0):
        raise PvarsimError("scale_lamperti is defined on (0, 1)")
    out = np.where(x <= 0.5, 1.0 - 1.0 / (2.0 * x), (2.0 * x - 1.0) / (2.0 - 2.0 * x))
    return out if out.ndim else float(out)


def scale_lamperti_inv(y):
    """Inverse of scale_lamperti; the mirrored branches keep
    scale_lamperti_inv(-y) == 1 - scale_lamperti_inv(y) bit-exact.
    """
    y = np.asarray(y, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        pos = (2.0 * y + 1.0) / (2.0 * (1.0 + y))
        neg = 1.0 - (-2.0 * y + 1.0) / (2.0 * (1.0 - y))
    out = np.where(y >= 0.0, pos, neg)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# drivers and flow states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DriverSequence:
    """Ordered increments driving the reversed flow, with horizon metadata."""

    increments: np.ndarray
    dt: float
    seed: int | None = None
    kind: str = "rademacher"

    def __post_init__(self):
        inc = np.ascontiguousarray(np.asarray(self.increments, dtype=np.float64))
        inc.setflags(write=False)
        object.__setattr__(self, "increments", inc)
        if self.dt <= 0:
            raise PvarsimError("dt must be positive")
        if self.kind == "rademacher" and inc.size:
            root = np.sqrt(self.dt)
            lattice = (inc == root) | (inc == -root) | (inc == 0.0)
            if not np.all(lattice):
                raise PvarsimError("rademacher increments must be exactly +-sqrt(dt)")

    @property
    def n_steps(self) -> int:
        return int(self.increments.size)

    @property
    def horizon(self) -> float:
        return self.n_steps * self.dt


@dataclass(frozen=True)
class FlowState:
    """Value of the driven flow after consuming a number of steps."""

    x: float
    steps_consumed: int

    def __post_init__(self):
        if not np.isfinite(self.x):
            raise NumericalError("flow state is not finite")


@dataclass(frozen=True)
class MedianSample:
    """A simulated conditional median in (0, 1)."""

    T: float
    m: float
    seed: int | None
    method: str  # "reversed_flow" | "direct_oracle"

    def __post_init__(self):
        if not 0.0 < self.m < 1.0:
            raise PvarsimError("median must lie in (0, 1)")


def rademacher_driver(n_steps: int, dt: float, seed: int) -> DriverSequence:
    """n_steps independent +-sqrt(dt) increments."""
    root = np.sqrt(dt)
    g = generator(seed)
    inc = np.where(g.integers(0, 2, size=n_steps) == 1, root, -root)
    return DriverSequence(increments=inc, dt=dt, seed=seed, kind="rademacher")


def gaussian_driver(n_steps: int, dt: float, seed: int) -> DriverSequence:
    """N(0, dt) increments; sensitivity-analysis alternative to the lattice."""
    g = generator(seed)
    inc = g.standard_normal(n_steps) * np.sqrt(dt)
    return DriverSequence(increments=inc, dt=dt, seed=seed, kind="gaussian")


def reversed_driver(forward_increments, dt: float, *, seed: int | None = None,
                    kind: str = "rademacher") -> DriverSequence:
    """Reverse-and-negate view of the forward increments of B on [0, T].

    Extending the forward path by one increment prepends one increment here,
    which is what keeps consecutive horizons on the same trajectory.
    """
    fwd = np.asarray(forward_increments, dtype=np.float64)
    return DriverSequence(increments=-fwd[::-1], dt=dt, seed=seed, kind=kind)


def euler_flow(driver: DriverSequence, x0: float, steps: int | None = None) -> FlowState:
    """Iterate x <- x + (1 + |x|) d for the first `steps` driver increments."""
    n = driver.n_steps if steps is None else int(steps)
    if n > driver.n_steps:
        raise PvarsimError("steps exceeds the driver length")
    x = float(
        _kernels.propagate_shared(driver.increments[:n], np.array([float(x0)]))[0]
    )
    if not np.isfinite(x) or abs(x) > 1e300:
        raise NumericalError("flow overflow")
    return FlowState(x=x, steps_consumed=n)


def median_from_flow(driver: DriverSequence) -> MedianSample:
    """Median at the driver's horizon: inverse scale/Lamperti of the endpoint."""
    end = euler_flow(driver, 0.0)
    return MedianSample(
        T=driver.horizon,
        m=float(scale_lamperti_inv(end.x)),
        seed=driver.seed,
        method="reversed_flow",
    )


def flow_derivative(driver: DriverSequence, x0: float) -> float:
    """Space derivative of the flow map at x0 along one driver.

    Discrete exponential exp(N - [N]/2) with N the left-point sum of
    sign(state) increments and [N] the matching sign^2 * dt bracket.
    """
    _, n_sum, bracket = _kernels.propagate_with_derivative(
        driver.increments, driver.dt, float(x0)
    )
    return float(np.exp(n_sum - 0.5 * bracket))


def flow_derivative_batch(drivers: np.ndarray, dt: float, x0: float = 0.0) -> np.ndarray:
    """Vectorized flow_derivative over rows of driver increments."""
    return _kernels.derivative_batch(np.ascontiguousarray(drivers), dt, x0)


# ---------------------------------------------------------------------------
# conditional expectation of the median
# ---------------------------------------------------------------------------


def inner_start_values(
    delta_t: float,
    dt: float,
    inner_n: int,
    seed: int,
    *,
    inner_steps: int | None = None,
    antithetic: bool = True,
    kind: str = "rademacher",
) -> np.ndarray:
    """Sample the short-horizon flow endpoints used as inner start values.

    The inner grid step defaults to min(dt, delta_t) so the inner ensemble
    lives on the trajectory's own lattice when delta_t >= dt.  Antithetic
    pairing appends the exact negations (the flow from 0 is odd in its
    driver), halving the number of fresh draws.
    """
    if inner_n < 2:
        raise PvarsimError("inner ensemble needs at least 2 members")
    if delta_t == 0.0:
        return np.zeros(inner_n)
    if inner_steps is None:
        inner_steps = max(1, int(round(delta_t / min(dt, delta_t))))
    step = delta_t / inner_steps
    n_draw = inner_n // 2 if antithetic else inner_n
    if antithetic and inner_n % 2:
        raise PvarsimError("antithetic pairing needs an even inner_n")
    g = generator(seed)
    if kind == "rademacher":
        root = np.sqrt(step)
        incs = np.where(g.integers(0, 2, size=(n_draw, inner_steps)) == 1, root, -root)
    else:
        incs = g.standard_normal((n_draw, inner_steps)) * np.sqrt(step)
    y = _kernels.propagate_batch(incs, np.zeros((n_draw, 1)))[:, 0]
    return np.concatenate([y, -y]) if antithetic else y


def cond_exp_median(
    forward_increments,
    dt: float,
    delta_t: float,
    inner_n: int = 1000,
    inner_steps: int | None = None,
    *,
    seed: int = 0,
    antithetic: bool = True,
    average_raw_F: bool = False,
    kind: str = "rademacher",
) -> float:
    """Estimate E[median at T + delta_t | path up to T] on one trajectory.

    Draws inner_n short-horizon endpoints, pushes each through the reversed
    driver of the forward increments, and averages the transformed endpoints.
    average_raw_F=True instead averages the raw flow endpoints before the
    inverse transform (the averaging order the reference procedure used).
    delta_t = 0 collapses the inner ensemble to {0} and returns the median.
    """
    fwd = np.asarray(forward_increments, dtype=np.float64)
    rev = reversed_driver(fwd, dt, kind=kind)
    if delta_t == 0.0:
        return median_from_flow(rev).m
    y = inner_start_values(
        delta_t, dt, inner_n, mix_seed(seed, TAG_INNER),
        inner_steps=inner_steps, antithetic=antithetic, kind=kind,
    )
    ends = _kernels.propagate_shared(rev.increments, y)
    if average_raw_F:
        return float(scale_lamperti_inv(float(np.mean(ends))))
    return float(np.mean(scale_lamperti_inv(ends)))


# ---------------------------------------------------------------------------
# direct forward oracle and the flow-inverse roundtrip
# ---------------------------------------------------------------------------


def direct_median_oracle(
    forward_increments,
    dt: float,
    *,
    x_grid: np.ndarray | None = None,
    seed: int | None = None,
) -> MedianSample:
    """Forward Euler of the conditional distribution flow, inverted at 1/2.

    Evolves dD = min(D, 1-D) dB from a grid of starting points in (0, 1),
    clamps (0,1)-escapes to [eps, 1-eps] with a warning, repairs any broken
    monotonicity by sorting (warned), then inverts at 1/2 by interpolation.
    """
    fwd = np.ascontiguousarray(np.asarray(forward_increments, dtype=np.float64))
    if x_grid is None:
        x_grid = np.linspace(0.0, 1.0, 2002)[1:-1]
    x_grid = np.asarray(x_grid, dtype=np.float64)
    if np.any(x_grid <= 0.0) or np.any(x_grid >= 1.0) or np.any(np.diff(x_grid) <= 0):
        raise PvarsimError("x_grid must be strictly increasing inside (0, 1)")
    ends, clamped = _kernels.direct_flow_batch(fwd[None, :], x_grid, _CLAMP_EPS)
    if clamped[0]:
        log.warning("direct oracle clamped %d escapes of (0, 1)", int(clamped[0]))
    d_end = ends[0]
    if np.any(np.diff(d_end) < 0):
        log.warning("direct oracle: Euler broke monotonicity, sorting as repair")
        d_end = np.sort(d_end)
    m = float(np.interp(0.5, d_end, x_grid))
    m = min(max(m, _CLAMP_EPS), 1.0 - _CLAMP_EPS)
    return MedianSample(T=fwd.size * dt, m=m, seed=seed, method="direct_oracle")


def flow_inverse_check(forward_increments, dt: float, x_list) -> float:
    """Roundtrip error of the drifted flow and its reversed-time inverse.

    Forward: G <- G + sign(G) dt/2 + d.  Reverse from G_T(x) with the
    reversed driver and drift -sign(H) dt/2; returns max |H_T - x| over
    x_list.  Converges to 0 as dt -> 0.
    """
    fwd = np.asarray(forward_increments, dtype=np.float64)
    xs = np.asarray(x_list, dtype=np.float64)
    g = xs.copy()
    for d in fwd:
        g = g + 0.5 * np.sign(g) * dt + d
    h = g.copy()
    for d in -fwd[::-1]:
        h = h - 0.5 * np.sign(h) * dt + d
    return float(np.max(np.abs(h - xs)))

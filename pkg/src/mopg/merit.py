"""Merit oracle for weak Pareto optimality and rate-constant estimation.

``u0_estimate`` lower-bounds ``sup_z min_i (F_i(x) - F_i(z))``, the merit
value that vanishes exactly at weakly Pareto optimal points; it drives
the convergence-rate checks in the test suite and is intended for small
dimensions only, never inside a solver.  ``rate_constant`` estimates the
squared-distance constant that scales those rate bounds, using a
parametric description of the Pareto set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Array, MultiObjectiveProblem, eval_F
from .problems import ParetoSegment

__all__ = [
    "MeritConfig",
    "UnsupportedProblemError",
    "u0_estimate",
    "rate_constant",
]

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class UnsupportedProblemError(ValueError):
    """Raised when no Pareto-set description is available."""


@dataclass(frozen=True)
class MeritConfig:
    """Search settings for the inner supremum.

    The box ``[lower, upper]`` must enclose the region where the
    supremum is attained (for the shipped convex problems, the Pareto
    set).  ``multistarts`` ascent runs are seeded inside the box and
    refined by ``sweeps`` passes of per-coordinate line search.
    """

    lower: Array
    upper: Array
    multistarts: int = 16
    ascent_iterations: int = 80
    sweeps: int = 4
    tolerance: float = 1e-6
    seed: int = 0

    def __post_init__(self) -> None:
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be 1-D arrays of equal shape")
        if not (upper >= lower).all():
            raise ValueError("search box is empty")
        if self.multistarts < 1:
            raise ValueError("multistarts must be at least 1")
        if self.ascent_iterations < 1:
            raise ValueError("ascent_iterations must be at least 1")
        if self.sweeps < 0:
            raise ValueError("sweeps must be nonnegative")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


def _golden_max(f, lo: float, hi: float, iters: int = 60) -> tuple[float, float]:
    """Maximize a unimodal function on [lo, hi] by golden-section search."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def u0_estimate(
    problem: MultiObjectiveProblem, x: Array, cfg: MeritConfig
) -> float:
    """Best-effort value of ``sup_z min_i (F_i(x) - F_i(z))`` over the box.

    Runs multistart projected ascent (along the steepest smooth gradient
    of the worst coordinate) followed by per-coordinate golden-section
    sweeps.  The returned value is a lower estimate of the supremum and
    is never negative: ``z = x`` always certifies 0.
    """
    x = np.asarray(x, dtype=float)
    Fx = eval_F(problem, x)
    if not np.isfinite(Fx).all():
        raise ValueError("x lies outside dom F")
    lo, hi = cfg.lower, cfg.upper
    if lo.shape != x.shape:
        raise ValueError("search box dimension does not match x")

    def inner(z: Array) -> float:
        return float((Fx - eval_F(problem, z)).min())

    rng = np.random.default_rng(cfg.seed)
    starts = [np.clip(x, lo, hi)]
    for _ in range(cfg.multistarts - 1):
        starts.append(rng.uniform(lo, hi))

    best = 0.0
    span = float((hi - lo).max())
    for z0 in starts:
        z = z0.copy()
        val = inner(z)
        step = 0.25 * span
        for _ in range(cfg.ascent_iterations):
            gap = Fx - eval_F(problem, z)
            worst = int(np.argmin(gap))
            direction = -np.asarray(problem.smooth_jacobian(z), dtype=float)[worst]
            scale = float(np.abs(direction).max())
            if scale == 0.0:
                break
            direction = direction / scale
            s = step
            moved = False
            for _ in range(30):
                zc = np.clip(z + s * direction, lo, hi)
                vc = inner(zc)
                if vc > val + 1e-14:
                    z, val = zc, vc
                    step = min(1.5 * s, span)
                    moved = True
                    break
                s *= 0.5
            if not moved:
                break
        for _ in range(cfg.sweeps):
            for j in range(z.size):
                zj = z.copy()

                def along(t: float, _zj=zj, _j=j) -> float:
                    _zj[_j] = t
                    return inner(_zj)

                t, vt = _golden_max(along, float(lo[j]), float(hi[j]))
                if vt > val:
                    z = zj.copy()
                    z[j] = t
                    val = vt
        if val > best:
            best = val
    return max(best, 0.0)


def rate_constant(
    problem: MultiObjectiveProblem,
    x0: Array,
    pareto: ParetoSegment,
    num_samples: int = 4097,
) -> float:
    """Largest squared distance from ``x0`` to the described Pareto set.

    The segment is sampled densely; each sampled front point has a
    unique preimage here, so the inner minimization over preimages is
    trivial.
    """
    if pareto is None:
        raise UnsupportedProblemError(
            "no Pareto-set description available for this problem"
        )
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (problem.n,):
        raise ValueError(f"x0 has shape {x0.shape}, expected ({problem.n},)")
    if num_samples < 2:
        raise ValueError("num_samples must be at least 2")
    worst = 0.0
    for c in np.linspace(pareto.c_min, pareto.c_max, num_samples):
        diff = pareto.point_at(float(c)) - x0
        worst = max(worst, float(diff @ diff))
    return worst

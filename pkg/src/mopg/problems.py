"""Benchmark problem definitions.

Four problems are shipped, identified by the strings in ``PROBLEM_IDS``:

* ``jos1``: two scaled quadratics, no nonsmooth part.
* ``jos1-l1``: the same quadratics plus shifted scaled l1 terms, with a
  closed-form weighted prox built from two nested soft thresholds.
* ``fds``: three smooth objectives (quartic, exp-plus-quadratic, weighted
  exponential decay), no nonsmooth part and no known Lipschitz bound.
* ``fds-nonneg``: the ``fds`` objectives with every ``g_i`` the indicator
  of the nonnegative orthant, so the weighted prox is the orthant
  projection for every weight vector.

Each problem carries a start box from which initial points are drawn
uniformly; the box also bounds the region of interest for merit
evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Array, MultiObjectiveProblem, project_nonneg, soft_threshold

__all__ = [
    "PROBLEM_IDS",
    "UnknownProblemError",
    "start_box",
    "make_problem",
    "make_jos1",
    "make_jos1_l1",
    "make_fds",
    "make_fds_nonneg",
    "ParetoSegment",
    "jos1_pareto_segment",
    "jos1_pareto_distance",
]

PROBLEM_IDS = ("jos1", "jos1-l1", "fds", "fds-nonneg")

_START_BOXES = {
    "jos1": (-2.0, 4.0),
    "jos1-l1": (-2.0, 4.0),
    "fds": (-2.0, 2.0),
    "fds-nonneg": (0.0, 2.0),
}


class UnknownProblemError(ValueError):
    """Raised for a problem identifier outside ``PROBLEM_IDS``."""


def start_box(problem_id: str, n: int) -> tuple[Array, Array]:
    """Per-coordinate lower and upper bounds for initial points."""
    if problem_id not in _START_BOXES:
        raise UnknownProblemError(f"unknown problem {problem_id!r}")
    lo, hi = _START_BOXES[problem_id]
    return np.full(n, lo), np.full(n, hi)


def make_problem(problem_id: str, n: int) -> MultiObjectiveProblem:
    """Build one of the shipped problems by identifier."""
    if problem_id == "jos1":
        return make_jos1(n)
    if problem_id == "jos1-l1":
        return make_jos1_l1(n)
    if problem_id == "fds":
        return make_fds(n)
    if problem_id == "fds-nonneg":
        return make_fds_nonneg(n)
    raise UnknownProblemError(f"unknown problem {problem_id!r}")


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")


def _jos1_smooth(n: int):
    def values(x: Array) -> Array:
        d = x - 2.0
        return np.array([x @ x, d @ d]) / n

    def jacobian(x: Array) -> Array:
        return np.vstack([2.0 * x, 2.0 * (x - 2.0)]) / n

    return values, jacobian


def _zero_values(m: int):
    zeros = np.zeros(m)

    def values(x: Array) -> Array:
        return zeros.copy()

    return values


def _identity_prox(w: Array, v: Array) -> Array:
    return np.asarray(v, dtype=float)


def make_jos1(n: int = 50) -> MultiObjectiveProblem:
    """Two quadratics ``||x||^2 / n`` and ``||x - 2||^2 / n`` with ``g = 0``."""
    _check_n(n)
    values, jacobian = _jos1_smooth(n)
    return MultiObjectiveProblem(
        m=2,
        n=n,
        smooth_values=values,
        smooth_jacobian=jacobian,
        nonsmooth_values=_zero_values(2),
        weighted_prox=_identity_prox,
        lipschitz_hint=2.0 / n,
    )


def make_jos1_l1(n: int = 50) -> MultiObjectiveProblem:
    """The ``jos1`` quadratics plus ``||x||_1 / n`` and ``||x - 1||_1 / (2n)``."""
    _check_n(n)
    values, jacobian = _jos1_smooth(n)

    def nonsmooth(x: Array) -> Array:
        return np.array(
            [np.abs(x).sum() / n, np.abs(x - 1.0).sum() / (2.0 * n)]
        )

    def prox(w: Array, v: Array) -> Array:
        # Nested shrinkage: first toward 0 with radius w1/n, then toward 1
        # with radius w2/(2n).
        a = w[0] / n
        b = w[1] / (2.0 * n)
        if a == 0.0 and b == 0.0:
            # the prox of the zero function is exactly the identity; the
            # shift arithmetic below would cost an ulp
            return np.array(v, dtype=float, copy=True)
        inner = soft_threshold(v + b, a) - b - 1.0
        return soft_threshold(inner, b) + 1.0

    return MultiObjectiveProblem(
        m=2,
        n=n,
        smooth_values=values,
        smooth_jacobian=jacobian,
        nonsmooth_values=nonsmooth,
        weighted_prox=prox,
        lipschitz_hint=2.0 / n,
    )


def _fds_smooth(n: int):
    idx = np.arange(1.0, n + 1.0)
    decay_w = idx * (n - idx + 1.0) / (n * (n + 1.0))

    def values(x: Array) -> Array:
        d = x - idx
        f1 = idx @ d**4 / n**2
        f2 = np.exp(x.sum() / n) + x @ x
        f3 = decay_w @ np.exp(-x)
        return np.array([f1, f2, f3])

    def jacobian(x: Array) -> Array:
        d = x - idx
        g1 = 4.0 * idx * d**3 / n**2
        g2 = np.exp(x.sum() / n) / n + 2.0 * x
        g3 = -decay_w * np.exp(-x)
        return np.vstack([g1, g2, g3])

    return values, jacobian


def make_fds(n: int = 50) -> MultiObjectiveProblem:
    """Quartic, exp-plus-quadratic and weighted-decay objectives, ``g = 0``.

    No gradient Lipschitz bound is supplied; solvers rely on backtracking.
    """
    _check_n(n)
    values, jacobian = _fds_smooth(n)
    return MultiObjectiveProblem(
        m=3,
        n=n,
        smooth_values=values,
        smooth_jacobian=jacobian,
        nonsmooth_values=_zero_values(3),
        weighted_prox=_identity_prox,
        lipschitz_hint=None,
    )


def make_fds_nonneg(n: int = 50) -> MultiObjectiveProblem:
    """The ``fds`` objectives restricted to the nonnegative orthant.

    Every ``g_i`` is the indicator of ``x >= 0``, so the weighted prox is
    the orthant projection for every weight vector.
    """
    _check_n(n)
    values, jacobian = _fds_smooth(n)

    def nonsmooth(x: Array) -> Array:
        inside = bool((x >= 0).all())
        v = 0.0 if inside else np.inf
        return np.full(3, v)

    def prox(w: Array, v: Array) -> Array:
        # the orthant is a domain restriction, so it binds for every
        # weight vector, including w = 0
        return project_nonneg(v)

    return MultiObjectiveProblem(
        m=3,
        n=n,
        smooth_values=values,
        smooth_jacobian=jacobian,
        nonsmooth_values=nonsmooth,
        weighted_prox=prox,
        lipschitz_hint=None,
    )


@dataclass(frozen=True)
class ParetoSegment:
    """One-parameter description of a known Pareto set ``{point_at(c)}``."""

    c_min: float
    c_max: float
    point_at: Callable[[float], Array]


def jos1_pareto_segment(n: int) -> ParetoSegment:
    """The ``jos1`` Pareto set: constant vectors ``c * ones``, ``c in [0, 2]``."""
    _check_n(n)

    def point_at(c: float) -> Array:
        return np.full(n, float(c))

    return ParetoSegment(0.0, 2.0, point_at)


def jos1_pareto_distance(x: Array) -> float:
    """Euclidean distance from ``x`` to the ``jos1`` Pareto set.

    The nearest constant vector has level ``clip(mean(x), 0, 2)``.
    """
    x = np.asarray(x, dtype=float)
    c = min(max(float(x.mean()), 0.0), 2.0)
    return float(np.linalg.norm(x - c))

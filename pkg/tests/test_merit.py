"""Tests for the weak-Pareto merit oracle and the rate constant."""

import numpy as np
import pytest

from mopg import (
    MeritConfig,
    MultiObjectiveProblem,
    SolverConfig,
    TerminationStatus,
    UnsupportedProblemError,
    jos1_pareto_segment,
    make_fds,
    make_jos1,
    rate_constant,
    run_pgm,
    u0_estimate,
)


def box(lo: float, hi: float, n: int) -> MeritConfig:
    return MeritConfig(lower=np.full(n, lo), upper=np.full(n, hi))


def test_u0_zero_at_weakly_pareto_point():
    prob = make_jos1(1)
    val = u0_estimate(prob, np.array([1.0]), box(-1.0, 5.0, 1))
    assert abs(val) <= 1e-4


def test_u0_scalar_jos1_off_pareto():
    # sup_z min(9 - z^2, 1 - (z-2)^2) is attained at z = 2 with value 1
    prob = make_jos1(1)
    val = u0_estimate(prob, np.array([3.0]), box(-1.0, 5.0, 1))
    assert val == pytest.approx(1.0, abs=1e-3)


def test_u0_single_objective_is_distance_to_optimum():
    prob = MultiObjectiveProblem(
        m=1,
        n=1,
        smooth_values=lambda x: np.array([x[0] ** 2]),
        smooth_jacobian=lambda x: np.array([[2.0 * x[0]]]),
        nonsmooth_values=lambda x: np.zeros(1),
        weighted_prox=lambda w, v: v,
        lipschitz_hint=2.0,
    )
    val = u0_estimate(prob, np.array([2.0]), box(-5.0, 5.0, 1))
    assert val == pytest.approx(4.0, abs=1e-3)


def test_u0_never_negative_on_random_points():
    prob = make_jos1(2)
    cfg = box(-2.0, 4.0, 2)
    rng = np.random.default_rng(17)
    for _ in range(10):
        x = rng.uniform(-2.0, 4.0, 2)
        assert u0_estimate(prob, x, cfg) >= -1e-6


def test_u0_rejects_points_outside_domain():
    from mopg import make_fds_nonneg

    prob = make_fds_nonneg(2)
    with pytest.raises(ValueError):
        u0_estimate(prob, np.array([-1.0, 1.0]), box(0.0, 2.0, 2))


def test_u0_separates_terminal_points_from_interior_starts():
    prob = make_jos1(2)
    cfg = box(-2.0, 4.0, 2)
    rng = np.random.default_rng(23)
    for _ in range(3):
        x0 = rng.uniform(-2.0, 4.0, 2)
        trace = run_pgm(prob, x0)
        assert trace.status is TerminationStatus.CONVERGED
        assert u0_estimate(prob, trace.x_final, cfg) <= 1e-3
        if np.ptp(x0) > 0.2 or not 0.0 <= x0.mean() <= 2.0:
            assert u0_estimate(prob, x0, cfg) >= 1e-3


def test_merit_config_validation():
    with pytest.raises(ValueError):
        MeritConfig(lower=np.zeros(2), upper=np.zeros(3))
    with pytest.raises(ValueError):
        MeritConfig(lower=np.ones(2), upper=np.zeros(2))
    with pytest.raises(ValueError):
        MeritConfig(lower=np.zeros(2), upper=np.ones(2), multistarts=0)
    with pytest.raises(ValueError):
        MeritConfig(lower=np.zeros(2), upper=np.ones(2), tolerance=0.0)


def test_rate_constant_scalar_examples():
    prob = make_jos1(1)
    seg = jos1_pareto_segment(1)
    assert rate_constant(prob, np.array([3.0]), seg) == pytest.approx(
        9.0, rel=1e-6
    )
    assert rate_constant(prob, np.array([1.0]), seg) == pytest.approx(
        1.0, rel=1e-6
    )


def test_rate_constant_separates_coordinates():
    prob = make_jos1(2)
    seg = jos1_pareto_segment(2)
    assert rate_constant(prob, np.array([3.0, 3.0]), seg) == pytest.approx(
        18.0, rel=1e-6
    )


def test_rate_constant_requires_pareto_description():
    prob = make_fds(2)
    with pytest.raises(UnsupportedProblemError):
        rate_constant(prob, np.zeros(2), None)

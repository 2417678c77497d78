import numpy as np
import pytest

from nrap import (
    GenSpec,
    OracleConfig,
    Status,
    bisection_solve,
    generate,
    kkt_residual,
    verify,
)
from nrap.oracle import interior_count

from conftest import quad, small_grid, assert_close


def test_symmetric_interior(symmetric2):
    sol = bisection_solve(symmetric2)
    assert_close(sol.x, [0.5, 0.5])
    assert sol.mu == pytest.approx(-0.5, abs=1e-10)


def test_qpeg2(qpeg2):
    sol = bisection_solve(qpeg2)
    assert_close(sol.x, [2, 2, 0])
    assert 0.0 - 1e-9 <= sol.mu <= 1.0 + 1e-9
    assert verify(qpeg2, sol).max_residual <= 1e-10


def test_degenerate_dual_interval(degenerate2):
    sol = bisection_solve(degenerate2)
    assert_close(sol.x, [1, 0])
    assert -1e-9 <= sol.mu <= 3.0 + 1e-9
    assert verify(degenerate2, sol).max_residual <= 1e-10


def test_less_equal_slack_shortcut():
    inst = quad(b=50.0, a=[1, 1], l=[0, 0], u=[1, 1], w=[1, 1], c=[0, 0], sense="le")
    sol = bisection_solve(inst)
    assert sol.mu == 0.0
    assert sol.iterations == 0
    assert verify(inst, sol).max_residual == 0.0


def test_less_equal_active_constraint():
    inst = quad(b=1.0, a=[1, 1], l=[0, 0], u=[4, 4], w=[1, 1], c=[3, 3], sense="le")
    sol = bisection_solve(inst)
    assert_close(sol.x, [0.5, 0.5], rtol=1e-9)
    assert sol.mu == pytest.approx(2.5, abs=1e-9)


def test_verify_rejects_wrong_mu(qpeg2):
    from nrap import Solution

    bad = Solution(x=np.array([2.0, 2.0, 0.0]), mu=5.0, status=Status.OPTIMAL, iterations=0)
    rep = verify(qpeg2, bad)
    assert rep.max_residual > 1e-8


def test_verify_length_mismatch(qpeg2):
    from nrap import Solution

    with pytest.raises(ValueError):
        verify(qpeg2, Solution(x=np.zeros(2), mu=0.0, status=Status.OPTIMAL, iterations=0))


def test_grid_kkt_pass():
    for inst in small_grid(sizes=(10, 100), h_fracs=(0.0, 0.5, 1.0), seeds=(1, 2)):
        sol = bisection_solve(inst)
        assert sol.status is Status.OPTIMAL
        assert verify(inst, sol).max_residual <= 1e-7


def test_iteration_budget_suffices():
    cfg = OracleConfig()
    for inst in small_grid(sizes=(1000,), h_fracs=(0.5,), seeds=(1,)):
        sol = bisection_solve(inst, cfg)
        assert sol.iterations <= cfg.max_iter
        assert sol.status is Status.OPTIMAL


def test_config_validation():
    with pytest.raises(ValueError):
        OracleConfig(mu_tol=0.0)
    with pytest.raises(ValueError):
        OracleConfig(max_iter=0)


def test_interior_count_strictness(qpeg2):
    assert interior_count(qpeg2, [2, 2, 0]) == 0
    assert interior_count(qpeg2, [2, 1.5, 0]) == 1

import numpy as np
import pytest

from nrap import (
    RELAXATION_VARIANTS,
    Status,
    bisection_solve,
    kkt_residual,
    solve_relaxation,
)
from nrap.relaxation import (
    RelaxState,
    RelaxationDiagnostics,
    explicit_evaluate,
    implicit_evaluate,
    relaxed_dual,
    relaxed_primal,
)

from conftest import quad, small_grid, assert_close


class TestRelaxedSteps:
    """Hand-traced first and second iterations on the Q-peg2 instance."""

    def test_first_iteration(self, qpeg2):
        st = RelaxState(qpeg2, with_breakpoints=True, with_roles=False)
        assert relaxed_dual(st) == pytest.approx(5.0 / 3.0)
        xh = relaxed_primal(st)
        assert_close(xh, [13 / 3, 4 / 3, -5 / 3])
        low, up = st.classify_dual(5.0 / 3.0)
        assert list(st.idx[low]) == [2] and list(st.idx[up]) == [0]
        excess, deficit = implicit_evaluate(st, low, up)
        assert excess == pytest.approx(7 / 3)
        assert deficit == pytest.approx(5 / 3)
        usage = explicit_evaluate(st, low, up)
        assert usage == pytest.approx(10 / 3)
        # equivalence of the two evaluations
        assert usage - st.budget == pytest.approx(deficit - excess)

    def test_second_iteration(self, qpeg2):
        st = RelaxState(qpeg2, with_breakpoints=True, with_roles=False)
        mu1 = relaxed_dual(st)
        low, up = st.classify_dual(mu1)
        x = np.empty(3)
        st.peg(up, x, lower=False, mu_hat=mu1)
        assert st.budget == pytest.approx(2.0)
        assert list(st.idx) == [1, 2]
        assert relaxed_dual(st) == pytest.approx(0.5)
        assert_close(relaxed_primal(st), [2.5, -0.5])
        low, up = st.classify_dual(0.5)
        usage = explicit_evaluate(st, low, up)
        assert usage == pytest.approx(2.0)  # equals the reduced budget: stop
        excess, deficit = implicit_evaluate(st, low, up)
        assert excess == pytest.approx(deficit)

    def test_relaxed_primal_negentropy_shortcut(self):
        from nrap.problem import ProblemInstance

        inst = ProblemInstance(
            family="negentropy", sense="eq", b=100.0, a=[1, 1], l=[10, 10], u=[200, 200],
            params={"c": [100, 100]},
        )
        st = RelaxState(inst, with_breakpoints=False, with_roles=False)
        assert_close(relaxed_primal(st), [50.0, 50.0])


@pytest.mark.parametrize("variant", RELAXATION_VARIANTS)
class TestSolveRelaxation:
    def test_qpeg2(self, variant, qpeg2):
        sol = solve_relaxation(qpeg2, variant)
        assert_close(sol.x, [2, 2, 0])
        assert sol.iterations == 2
        assert kkt_residual(qpeg2, sol.x, sol.mu).max_residual <= 1e-8

    def test_equal_excess_deficit_stop(self, variant, degenerate2):
        sol = solve_relaxation(degenerate2, variant)
        assert_close(sol.x, [1, 0])
        assert sol.iterations == 1

    def test_all_interior_stops_first_iteration(self, variant):
        for inst in small_grid(sizes=(25,), h_fracs=(1.0,), seeds=(1, 2)):
            sol = solve_relaxation(inst, variant)
            ref = bisection_solve(inst)
            assert sol.iterations == 1
            assert float(np.max(np.abs(sol.x - ref.x))) <= 1e-9 * max(1.0, float(np.max(np.abs(ref.x))))

    def test_less_equal_slack(self, variant):
        inst = quad(b=50.0, a=[1, 1], l=[0, 0], u=[1, 1], w=[1, 1], c=[0, 0], sense="le")
        sol = solve_relaxation(inst, variant)
        assert sol.mu == 0.0 and sol.iterations == 0

    def test_oracle_equivalence_on_grid(self, variant):
        for inst in small_grid(sizes=(10, 60), h_fracs=(0.0, 0.5, 1.0), seeds=(1, 2)):
            ours = solve_relaxation(inst, variant)
            ref = bisection_solve(inst)
            scale = max(1.0, float(np.max(np.abs(ref.x))))
            assert ours.status is Status.OPTIMAL
            assert float(np.max(np.abs(ours.x - ref.x))) <= 1e-9 * scale
            assert kkt_residual(inst, ours.x, ours.mu).max_residual <= 1e-8

    def test_iterations_at_most_n(self, variant):
        for inst in small_grid(sizes=(50,), h_fracs=(0.0, 0.5), seeds=(3,)):
            sol = solve_relaxation(inst, variant)
            assert sol.iterations <= inst.n


def test_variants_identical_x():
    for inst in small_grid(sizes=(40,), h_fracs=(0.0, 0.25, 0.5, 1.0), seeds=(4, 5)):
        sols = [solve_relaxation(inst, v).x for v in RELAXATION_VARIANTS]
        for other in sols[1:]:
            assert float(np.max(np.abs(sols[0] - other))) <= 1e-9


def test_implicit_explicit_equivalence_logged():
    for inst in small_grid(sizes=(50,), h_fracs=(0.25, 0.75), seeds=(6, 7)):
        diag = RelaxationDiagnostics()
        solve_relaxation(inst, "dir2", diagnostics=diag)
        assert diag.usage, "expected at least one logged iteration"
        for usage, budget, excess, deficit, di, de in zip(
            diag.usage, diag.budget, diag.excess, diag.deficit,
            diag.decision_implicit, diag.decision_explicit,
        ):
            lhs = usage - budget
            rhs = deficit - excess
            assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9 * max(1.0, excess + deficit))
            assert di == de


def test_primal_dual_classification_equivalence():
    for inst in small_grid(sizes=(40,), h_fracs=(0.25, 0.5), seeds=(8,)):
        for variant in ("pir2", "dir2", "dbr5"):
            diag = RelaxationDiagnostics()
            solve_relaxation(inst, variant, diagnostics=diag)
            for lp, ld in zip(diag.lower_primal, diag.lower_dual):
                assert np.array_equal(lp, ld)
            for up, ud in zip(diag.upper_primal, diag.upper_dual):
                assert np.array_equal(up, ud)


def test_bracket_contains_oracle_mu():
    for inst in small_grid(sizes=(40,), h_fracs=(0.25,), seeds=(9,)):
        ref = bisection_solve(inst)
        diag = RelaxationDiagnostics()
        solve_relaxation(inst, "dir5", diagnostics=diag)
        tol = 1e-10 * max(1.0, abs(ref.mu))
        for lo, hi in diag.bracket:
            assert lo - tol <= ref.mu <= hi + tol


def test_aggregate_integrity():
    for inst in small_grid(sizes=(60,), h_fracs=(0.25,), seeds=(10,)):
        for variant in ("dir2", "dbr5", "pir2"):
            diag = RelaxationDiagnostics()
            solve_relaxation(inst, variant, diagnostics=diag)
            assert max(diag.agg_drift) <= 1e-9


def test_pegging_soundness():
    for inst in small_grid(sizes=(40,), h_fracs=(0.25,), seeds=(11,)):
        ref = bisection_solve(inst)
        for variant in ("dir2", "der3", "dbr5"):
            sol = solve_relaxation(inst, variant)
            pegged_low = sol.x == inst.l
            pegged_up = sol.x == inst.u
            assert np.all(np.abs(sol.x[pegged_low] - ref.x[pegged_low]) <= 1e-9)
            assert np.all(np.abs(sol.x[pegged_up] - ref.x[pegged_up]) <= 1e-9)


def test_unknown_variant(qpeg2):
    with pytest.raises(ValueError):
        solve_relaxation(qpeg2, "xyz9")

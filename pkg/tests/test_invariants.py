"""Constants of motion: exact forms, condition gating, drift along trajectories."""

import io
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emdenlab.gauge import EmdenProblem
from emdenlab.invariants import (
    ConditionedInvariant,
    DriftReport,
    Invariant,
    InvariantDomainError,
    dilation_invariant,
    drift,
    generic_first_integral,
    invariant_from_particular_solution,
    particular_invariant_expansion,
    rescaled_energy_invariant,
)
from emdenlab.numerics import IntegratorConfig, integrate
from emdenlab.timefn import PowerFn, constant


def drag_problem_n5():
    return EmdenProblem(a=PowerFn(-2, 0, 1, -1), b=-1.0, n=5)


def decaying_scale():
    return PowerFn(1, 0, 2, Fraction(-1, 2))


def bounded_profile(t):
    # the regular solution of the n=5 drag problem and its slope
    x = (1.0 + t * t / 3.0) ** -0.5
    return x, -(t / 3.0) * x ** 3


class TestGenericFirstIntegral:
    def test_power_form_matches_printed_shape_up_to_constant(self):
        inv = generic_first_integral(1.0, 1.0, -1.0, -1.0, 0.0, 5)
        for x, v in [(0.7, -0.3), (1.4, 0.8), (0.2, 1.9)]:
            printed = x ** 6 / 6.0 + v * v / 2.0 + x * v
            assert inv(0.0, x, v) == pytest.approx(-printed, rel=1e-13)

    def test_log_form_at_reciprocal_exponent(self):
        inv = generic_first_integral(1.0, 1.0, -1.0, -1.0, 0.0, -1)
        for x, v in [(0.7, -0.3), (2.1, 0.4)]:
            printed = math.log(x) + v * v / 2.0 + x * v
            assert inv(0.0, x, v) == pytest.approx(-printed, rel=1e-13)

    def test_mismatched_diagonal_drifts_rejected(self):
        with pytest.raises(ValueError, match="integrating factor"):
            generic_first_integral(1.0, 1.0, -0.5, -1.0, 0.0, 5)

    def test_directional_derivative_vanishes_at_random_points(self):
        inv = generic_first_integral(1.0, 1.0, -1.0, -1.0, 0.0, 5)
        rng = random.Random(20260819)
        h = 1e-6
        for _ in range(1000):
            x = rng.uniform(0.3, 2.0)
            v = rng.uniform(-2.0, 2.0)
            fx, fv = x + v, -v - x ** 5
            ahead = inv(0.0, x + h * fx, v + h * fv)
            behind = inv(0.0, x - h * fx, v - h * fv)
            deriv = (ahead - behind) / (2.0 * h)
            assert abs(deriv) <= 1e-6 * (1.0 + abs(inv(0.0, x, v)))

    @given(
        c11=st.sampled_from([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]),
        c12=st.sampled_from([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]),
        c22=st.sampled_from([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]),
        cx=st.sampled_from([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]),
        n=st.sampled_from([2, 3, 5, 7]),
        x=st.floats(0.4, 1.6),
        v=st.floats(-1.5, 1.5),
    )
    @settings(derandomize=True, max_examples=150, deadline=None)
    def test_conserved_for_any_cancelling_diagonal(self, c11, c12, c22, cx, n, x, v):
        inv = generic_first_integral(c11, c12, -c11, c22, cx, n)
        fx = c11 * x + c12 * v
        fv = -c11 * v + cx * x + c22 * x ** n
        h = 1e-6
        deriv = (
            inv(0.0, x + h * fx, v + h * fv) - inv(0.0, x - h * fx, v - h * fv)
        ) / (2.0 * h)
        assert abs(deriv) <= 1e-6 * (1.0 + abs(inv(0.0, x, v)))


class TestParticularSolutionInvariant:
    def test_exact_cubic_expansion(self):
        # for the (2t)^(-1/2) profile at n=5 every coefficient is an exact
        # rational times an integer power of t
        expansion = particular_invariant_expansion(decaying_scale(), 5)
        assert expansion == {
            (6, 0): (Fraction(4, 3), 3),
            (0, 2): (Fraction(4), 3),
            (1, 1): (Fraction(4), 2),
        }

    def test_evaluator_matches_expansion(self):
        inv = invariant_from_particular_solution(
            drag_problem_n5(), decaying_scale(), (0.5, 5.0)
        )
        for t, x, v in [(1.3, 0.8, -0.2), (0.7, 1.1, 0.5), (4.0, 0.3, -0.1)]:
            direct = (4.0 / 3.0) * t ** 3 * x ** 6 + 4.0 * t ** 3 * v * v + 4.0 * t * t * x * v
            assert inv(t, x, v) == pytest.approx(direct, rel=1e-12)

    def test_vanishes_along_the_bounded_solution(self):
        inv = invariant_from_particular_solution(
            drag_problem_n5(), decaying_scale(), (0.2, 3.0)
        )
        for t in np.linspace(0.2, 3.0, 12):
            x, v = bounded_profile(float(t))
            assert abs(inv(float(t), x, v)) <= 1e-12

    def test_constant_along_generic_trajectories(self):
        prob = drag_problem_n5()
        inv = invariant_from_particular_solution(prob, decaying_scale(), (0.5, 5.0))
        traj = integrate(prob.rhs, 0.5, (0.9, -0.3), 5.0, IntegratorConfig())
        report = drift(inv, traj)
        assert report.relative_drift < 1e-7
        assert report.provenance == "particular-solution"

    def test_rejects_profile_failing_reduction_checks(self):
        with pytest.raises(ValueError, match="slope compatibility"):
            invariant_from_particular_solution(
                EmdenProblem(a=PowerFn(-2, 0, 1, -1), b=-1.0, n=3),
                decaying_scale(),
                (0.5, 4.0),
            )

    def test_expansion_requires_power_profile(self):
        with pytest.raises(TypeError, match="PowerFn"):
            particular_invariant_expansion(lambda t: t, 5)


class TestRescaledEnergy:
    def test_autonomous_case_is_plain_energy(self):
        prob = EmdenProblem(a=0.0, b=-1.0, n=5)
        rep = rescaled_energy_invariant(prob, 0.0, (0.0, 3.0))
        assert rep.passed
        assert rep.constant == pytest.approx(-1.0, abs=1e-12)
        inv = rep.invariant
        for x, v in [(0.9, 0.1), (0.4, -0.7)]:
            assert inv(1.7, x, v) == pytest.approx(v * v / 2.0 + x ** 6 / 6.0, rel=1e-11)
        traj = integrate(prob.rhs, 0.0, (0.9, 0.0), 3.0, IntegratorConfig())
        assert drift(inv, traj).relative_drift < 1e-8

    def test_exponential_balance_passes(self):
        K, c = 0.7, 0.3
        prob = EmdenProblem(a=c, b=lambda t: K * math.exp(2 * c * t), n=3)
        rep = rescaled_energy_invariant(prob, 0.0, (0.0, 1.5))
        assert rep.passed
        assert rep.constant == pytest.approx(K, rel=1e-9)
        traj = integrate(prob.rhs, 0.0, (0.3, 0.0), 1.5, IntegratorConfig())
        assert drift(rep.invariant, traj).relative_drift < 1e-7

    def test_drag_coefficients_fail_the_condition(self):
        rep = rescaled_energy_invariant(drag_problem_n5(), 0.5, (0.5, 3.0))
        assert not rep.passed
        assert rep.invariant is None
        assert rep.variation > 1.0
        # condition value is -(t/anchor)^4; frozen at the left endpoint
        assert rep.condition_values[0] == pytest.approx(-1.0, rel=1e-9)
        assert "FAIL" in rep.render()


class TestDilationInvariant:
    def test_balanced_power_coefficient_passes(self):
        K = -0.5
        prob = EmdenProblem(a=0.0, b=PowerFn(K, 0, 2, -4), n=5)
        rep = dilation_invariant(prob, 0.0, (0.5, 3.0))
        assert rep.passed
        assert rep.constant == pytest.approx(K, rel=1e-9)
        traj = integrate(prob.rhs, 0.5, (1.0, -0.2), 3.0, IntegratorConfig())
        assert drift(rep.invariant, traj).relative_drift < 1e-6

    def test_degenerate_exponent_collapses_condition(self):
        K = 0.8
        prob = EmdenProblem(a=0.0, b=K, n=-3)
        rep = dilation_invariant(prob, 0.0, (0.5, 3.0))
        assert rep.passed
        assert rep.constant == pytest.approx(K, abs=1e-12)
        inv = rep.invariant
        t, x, v = 2.0, 1.1, 0.4
        energy = v * v / 2.0 + (K / 2.0) * x ** -2.0
        assert inv(t, x, v) == pytest.approx(energy * t - x * v / 2.0, rel=1e-10)
        traj = integrate(prob.rhs, 0.5, (1.0, 0.1), 3.0, IntegratorConfig())
        assert drift(inv, traj).relative_drift < 1e-6

    def test_drag_coefficients_sampled_honestly(self):
        # with the drag problem the condition value is -(2t-1)^4 from a
        # 0.5 anchor: decisively non-constant
        rep = dilation_invariant(drag_problem_n5(), 0.5, (1.0, 3.0))
        assert not rep.passed
        assert rep.condition_values[0] == pytest.approx(-1.0, rel=1e-6)
        assert rep.condition_values[-1] == pytest.approx(-625.0, rel=1e-6)

    def test_interval_must_start_after_anchor(self):
        prob = EmdenProblem(a=0.0, b=-1.0, n=5)
        with pytest.raises(ValueError, match="strictly after"):
            dilation_invariant(prob, 0.5, (0.5, 3.0))


class TestDrift:
    def trajectory(self):
        prob = drag_problem_n5()
        return prob, integrate(prob.rhs, 0.5, (0.9, -0.3), 5.0, IntegratorConfig())

    def test_constant_map_has_zero_drift(self):
        _, traj = self.trajectory()
        report = drift(Invariant(lambda t, x, v: 3.7, "generic"), traj)
        assert report.max_drift == 0.0
        assert report.relative_drift == 0.0

    def test_non_invariant_flagged(self):
        _, traj = self.trajectory()
        report = drift(Invariant(lambda t, x, v: x, "generic"), traj)
        assert report.relative_drift > 0.01
        assert "drift" in report.render()

    def test_domain_error_reports_sample(self):
        _, traj = self.trajectory()
        bad = Invariant(lambda t, x, v: 1.0 / (t - 2.0), "generic")
        with pytest.raises(InvariantDomainError, match="sample"):
            drift(bad, traj, samples=7)  # grid hits t = 2.0 exactly

    def test_validity_interval_enforced(self):
        _, traj = self.trajectory()
        inv = Invariant(lambda t, x, v: x, "generic", validity_interval=(0.5, 2.0))
        with pytest.raises(ValueError, match="validity"):
            drift(inv, traj)

    def test_csv_rows_and_summary(self):
        _, traj = self.trajectory()
        report = drift(Invariant(lambda t, x, v: x, "generic"), traj, samples=5)
        buf = io.StringIO()
        report.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "t,I"
        assert len(lines) == 7
        assert lines[-1].startswith("# relative drift")
        assert float(lines[1].split(",")[0]) == 0.5


class TestUniversalDriftProperty:
    """Every constructor whose precondition passed yields relative drift
    below 1e3 times the integrator tolerance on singularity-free windows."""

    REL = 1e-10
    BAR = 1e3 * REL

    def check(self, inv, rhs, t0, z0, t1):
        traj = integrate(rhs, t0, z0, t1, IntegratorConfig(rel_tol=self.REL))
        assert drift(inv, traj).relative_drift < self.BAR

    def test_generic_on_frozen_field(self):
        inv = generic_first_integral(1.0, 1.0, -1.0, -1.0, 0.0, 5)
        rhs = lambda t, z: (z[0] + z[1], -z[1] - z[0] ** 5)
        self.check(inv, rhs, 0.0, (0.9, -0.5), 1.5)

    def test_particular_solution_construction(self):
        prob = drag_problem_n5()
        inv = invariant_from_particular_solution(prob, decaying_scale(), (0.5, 5.0))
        self.check(inv, prob.rhs, 0.5, (1.1, 0.2), 5.0)

    def test_rescaled_energy_construction(self):
        prob = EmdenProblem(a=0.3, b=lambda t: 0.7 * math.exp(0.6 * t), n=3)
        rep = rescaled_energy_invariant(prob, 0.0, (0.0, 1.5))
        assert rep.passed
        self.check(rep.invariant, prob.rhs, 0.0, (0.3, 0.0), 1.5)

    def test_dilation_construction(self):
        prob = EmdenProblem(a=0.0, b=PowerFn(-0.5, 0, 2, -4), n=5)
        rep = dilation_invariant(prob, 0.0, (0.5, 3.0))
        assert rep.passed
        self.check(rep.invariant, prob.rhs, 0.5, (1.0, -0.2), 3.0)

"""Integrator, quadrature and antiderivative checks.

The tableau identities at the top are exact-rational assertions: stage
abscissae, quadrature conditions through order five, and the endpoint /
derivative conditions of the dense interpolant.  The behavioral tests then
confirm fifth-order convergence and the documented error contracts.
"""

import io
import math
from fractions import Fraction

import numpy as np
import pytest

from emdenlab import numerics
from emdenlab.numerics import (
    AntiderivativeFn, IntegrationError, IntegratorConfig, QuadratureError,
    RhsError, StepSizeUnderflowError, integrate, invert_monotone, quad,
    write_csv,
)


class TestTableauIdentities:
    def test_stage_abscissae_match_row_sums(self):
        for i, row in enumerate(numerics._A):
            assert sum(row, Fraction(0)) == numerics._C[i]

    def test_quadrature_conditions_of_both_weight_rows(self):
        B, C, E = numerics._B, numerics._C, numerics._E
        Bstar = [b - e for b, e in zip(B, E)]
        for k in range(5):
            assert sum(b * c ** k for b, c in zip(B, C)) == Fraction(1, k + 1)
        for k in range(4):
            assert sum(b * c ** k for b, c in zip(Bstar, C)) == Fraction(1, k + 1)

    def test_last_stage_reuses_the_accepted_weights(self):
        assert numerics._A[6] == numerics._B[:6]

    def test_interpolant_matches_endpoints_and_slopes(self):
        P, B = numerics._P, numerics._B
        for s, row in enumerate(P):
            assert sum(row, Fraction(0)) == B[s]
            slope_at_1 = sum((j + 1) * p for j, p in enumerate(row))
            assert slope_at_1 == (1 if s == 6 else 0)
            assert row[0] == (1 if s == 0 else 0)


def _oscillator(t, y):
    return np.array([y[1], -y[0]])


def _oscillator_exact(t):
    return np.array([math.cos(t), -math.sin(t)])


class TestIntegrate:
    def test_polynomial_rhs_is_integrated_exactly_in_one_step(self):
        traj = integrate(lambda t, y: np.array([t ** 4]), 0.0, [0.0], 1.0,
                         IntegratorConfig(rel_tol=1e-2, abs_tol=1e-2,
                                          first_step=1.0))
        assert len(traj.t) == 2
        assert abs(traj.y[-1][0] - 0.2) <= 5e-16

    def test_fifth_order_convergence_at_fixed_steps(self):
        def err_at(h):
            cfg = IntegratorConfig(rel_tol=10.0, abs_tol=10.0,
                                   first_step=h, max_step=h)
            traj = integrate(_oscillator, 0.0, [1.0, 0.0], math.pi, cfg)
            return float(np.max(np.abs(traj.y[-1] - _oscillator_exact(math.pi))))

        h = math.pi / 100
        ratio = err_at(h) / err_at(h / 2)
        assert 20 < ratio < 45

    def test_oscillator_error_decreases_with_tolerance(self):
        errs = []
        for rt in (1e-6, 1e-8, 1e-10):
            cfg = IntegratorConfig(rel_tol=rt, abs_tol=rt * 1e-2)
            traj = integrate(_oscillator, 0.0, [1.0, 0.0], 10 * math.pi, cfg)
            errs.append(float(np.max(np.abs(
                traj.y[-1] - _oscillator_exact(10 * math.pi)))))
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 1e-7

    def test_counts_are_reported(self):
        traj = integrate(_oscillator, 0.0, [1.0, 0.0], 10.0)
        assert traj.accepted == len(traj.t) - 1
        assert traj.rejected >= 0

    def test_backward_integration(self):
        traj = integrate(lambda t, y: np.array([-y[0]]), 1.0, [math.exp(-1.0)], 0.0)
        assert traj.t[-1] == 0.0
        assert abs(traj.y[-1][0] - 1.0) < 1e-9

    def test_decaying_profile_against_closed_form(self):
        # x(t) = (1 + t^2/3)^(-1/2) solves x'' = -(2/t) x' - x^5
        def rhs(t, y):
            return np.array([y[1], -2.0 / t * y[1] - y[0] ** 5])

        def exact(t):
            s = 1.0 + t * t / 3.0
            return np.array([s ** -0.5, -(t / 3.0) * s ** -1.5])

        t0 = 0.1
        traj = integrate(rhs, t0, exact(t0), 10.0,
                         IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12))
        for t in np.linspace(t0, 10.0, 50):
            assert np.max(np.abs(traj(t) - exact(t))) < 1e-8

    def test_singular_start_raises_rhs_error(self):
        def rhs(t, y):
            return np.array([y[1], -2.0 / t * y[1] - y[0] ** 5])
        with pytest.raises(RhsError):
            integrate(rhs, 0.0, [1.0, 0.0], 1.0)

    def test_blow_up_reports_the_reached_time(self):
        with pytest.raises(StepSizeUnderflowError) as err:
            integrate(lambda t, y: np.array([1.0 + y[0] ** 2]), 0.0, [0.0], 3.0)
        assert abs(err.value.t_reached - math.pi / 2) < 1e-2

    def test_step_budget_is_enforced(self):
        with pytest.raises(IntegrationError, match="exceeded"):
            integrate(_oscillator, 0.0, [1.0, 0.0], 1000.0,
                      IntegratorConfig(max_steps=10))

    def test_zero_length_interval(self):
        traj = integrate(_oscillator, 2.0, [1.0, 0.5], 2.0)
        assert np.array_equal(traj(2.0), [1.0, 0.5])


class TestDenseOutput:
    def test_nodes_are_reproduced(self):
        traj = integrate(_oscillator, 0.0, [1.0, 0.0], 10.0)
        for i in range(len(traj.t)):
            assert np.max(np.abs(traj(traj.t[i]) - traj.y[i])) < 1e-13

    def test_interpolant_tracks_the_exact_solution(self):
        cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)
        traj = integrate(_oscillator, 0.0, [1.0, 0.0], 10.0, cfg)
        for t in np.linspace(0.0, 10.0, 197):
            assert np.max(np.abs(traj(t) - _oscillator_exact(t))) < 1e-7

    def test_midpoint_reintegration_agrees_within_ten_tolerances(self):
        rel = 1e-8
        cfg = IntegratorConfig(rel_tol=rel, abs_tol=rel * 1e-2)
        traj = integrate(_oscillator, 0.0, [1.0, 0.0], 10.0, cfg)
        for i in range(min(20, len(traj._seg_t))):
            t_lo, h = traj._seg_t[i], traj._seg_h[i]
            mid = t_lo + 0.5 * h
            again = integrate(_oscillator, t_lo, traj._seg_y[i], mid, cfg)
            gap = np.max(np.abs(traj(mid) - again.y[-1]))
            assert gap <= 10 * rel * (1.0 + np.max(np.abs(again.y[-1])))

    def test_slope_is_continuous_across_nodes(self):
        traj = integrate(_oscillator, 0.0, [1.0, 0.0], 10.0)
        d = 1e-6
        for t in traj.t[1:-1][:10]:
            fd = (traj(t + d) - traj(t - d)) / (2 * d)
            assert np.max(np.abs(fd - _oscillator(t, traj(t)))) < 1e-5

    def test_outside_the_interval_is_refused(self):
        traj = integrate(_oscillator, 0.0, [1.0, 0.0], 10.0)
        with pytest.raises(ValueError, match="outside"):
            traj(10.5)


class TestQuad:
    def test_exponential(self):
        assert abs(quad(math.exp, 0.0, 1.0) - (math.e - 1.0)) < 1e-12

    def test_reciprocal(self):
        assert abs(quad(lambda t: 1.0 / t, 1.0, 2.0) - math.log(2.0)) < 1e-12

    def test_ratio_of_identical_profiles_measures_the_interval(self):
        decay = lambda t: 1.0 / t
        assert abs(quad(lambda t: decay(t) / decay(t), 1.0, 5.0) - 4.0) < 1e-12

    def test_single_panel_polynomial_exactness(self):
        got = quad(lambda t: t ** 13, 0.0, 1.0)
        assert abs(got - 1.0 / 14.0) < 1e-15

    def test_sine_arch(self):
        assert abs(quad(math.sin, 0.0, math.pi) - 2.0) < 1e-13

    def test_orientation_and_degenerate_interval(self):
        assert quad(math.exp, 1.0, 1.0) == 0.0
        assert abs(quad(math.exp, 1.0, 0.0) + (math.e - 1.0)) < 1e-12

    def test_unresolvable_singularity_raises(self):
        with pytest.raises(QuadratureError):
            quad(lambda t: abs(t) ** -0.5, 0.0, 1.0, tol=1e-13)

    def test_interior_pole_raises_instead_of_tiling_forever(self):
        with pytest.raises(QuadratureError):
            quad(lambda t: 1.0 / (t - 0.5232), 0.0, 1.0)

    def test_non_finite_integrand_raises(self):
        with pytest.raises(QuadratureError, match="not finite"):
            quad(lambda t: float("nan"), 0.0, 1.0)


class TestAntiderivative:
    def test_zero_at_the_anchor_exactly(self):
        F = AntiderivativeFn(lambda t: 1.0 / t, 1.0)
        assert F(1.0) == 0.0

    def test_matches_log_in_both_directions(self):
        F = AntiderivativeFn(lambda t: 1.0 / t, 1.0, tol=1e-12)
        assert abs(F(math.e) - 1.0) < 1e-11
        assert abs(F(0.5) - math.log(0.5)) < 1e-11

    def test_repeat_lookups_are_cached_and_identical(self):
        F = AntiderivativeFn(math.exp, 0.0)
        a = F(2.0)
        assert F(2.0) == a
        assert len(F._ts) == 2

    def test_long_chains_stay_within_tolerance(self):
        tol = 1e-12
        F = AntiderivativeFn(lambda t: 1.0 / t, 1.0, tol=tol)
        for t in np.linspace(1.0, 9.0, 201):
            F(float(t))
        assert abs(F(9.0) - math.log(9.0)) <= tol
        assert abs(F(5.004) - math.log(5.004)) <= tol


class TestInvertMonotone:
    def test_recovers_the_exponential(self):
        t = invert_monotone(math.log, 1.0, 0.5, 10.0)
        assert abs(t - math.e) < 1e-9

    def test_decreasing_functions_work(self):
        t = invert_monotone(lambda t: -t ** 3, -8.0, 0.0, 5.0)
        assert abs(t - 2.0) < 1e-9

    def test_unbracketed_target_is_refused(self):
        with pytest.raises(ValueError, match="not bracketed"):
            invert_monotone(math.log, 99.0, 0.5, 10.0)


class TestCsv:
    def test_exact_bytes(self):
        buf = io.StringIO()
        write_csv(buf, ("t", "x", "v"), [(0.1, 1.0, -0.5)])
        assert buf.getvalue() == "t,x,v\n0.10000000000000001,1,-0.5\n"

    def test_seventeen_significant_digits_round_trip(self):
        buf = io.StringIO()
        rows = [(1 / 3, math.pi, math.e)]
        write_csv(buf, ("t", "x", "v"), rows)
        got = [float(s) for s in buf.getvalue().splitlines()[1].split(",")]
        assert got == [1 / 3, math.pi, math.e]

    def test_writes_to_a_path(self, tmp_path):
        p = tmp_path / "out.csv"
        write_csv(p, ("t", "x"), [(0.0, 2.0)])
        assert p.read_text() == "t,x\n0,2\n"

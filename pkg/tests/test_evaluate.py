from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from modeq import evaluate as ev
from modeq import forms
from modeq.forms import DELTA, E4, E6, ETA, J, T
from modeq.series import context

ctx = context(256)
SMALL = ctx.mpf(10) ** -60


@pytest.fixture(scope="module")
def series():
    return {
        "J": forms.j_invariant(60),
        "E4": forms.eisenstein(4, 60),
        "E6": forms.eisenstein(6, 60),
        "eta": forms.eta(60),
        "theta3": forms.theta(3, 60),
    }


class TestEvalSeries:
    def test_j_at_i(self, series):
        assert abs(ev.eval_series(series["J"], ev.I()) - 1) < SMALL

    def test_e6_at_i(self, series):
        assert abs(ev.eval_series(series["E6"], ev.I())) < SMALL

    def test_j_triple_zero_at_rho(self, series):
        for k in range(3):
            assert abs(ev.eval_series(series["J"], ev.RHO(), k)) < SMALL
        assert abs(ev.eval_series(series["J"], ev.RHO(), 3)) > 1

    def test_e4_at_i_closed_form(self, series):
        # E4(i) = 3 Gamma(1/4)^8 / (2 pi)^6
        expect = 3 * ctx.gamma(ctx.mpf(1) / 4) ** 8 / (2 * ctx.pi) ** 6
        assert abs(ev.eval_series(series["E4"], ev.I()) - expect) < SMALL

    def test_eta_at_i_closed_form(self, series):
        expect = ctx.gamma(ctx.mpf(1) / 4) / (2 * ctx.pi ** (ctx.mpf(3) / 4))
        assert abs(ev.eval_series(series["eta"], ev.I()) - expect) < SMALL

    def test_theta3_against_mpmath(self, series):
        tau = ctx.mpc("0.3", "0.9")
        ref = ctx.jtheta(3, 0, ctx.expjpi(tau))
        assert abs(ev.eval_series(series["theta3"], tau) - ref) < SMALL

    def test_derivative_matches_D(self, series):
        tau = ctx.mpc("0.1", "1.2")
        f = series["E6"]
        lhs = ev.eval_series(f.D(), tau) * 2 * ctx.pi * 1j
        assert abs(lhs - ev.eval_series(f, tau, 1)) < SMALL

    def test_floor(self, series):
        with pytest.raises(ev.EvaluationError):
            ev.eval_series(series["J"], ctx.mpc(0, "0.3"))

    def test_truncation_tolerance(self):
        short = forms.eisenstein(4, 3)
        with pytest.raises(ev.EvaluationError):
            ev.eval_series(short, ev.I(), tol=1e-30)
        v, err = ev.eval_series_with_error(short, ev.I())
        assert err > 1e-10

    def test_half_plane_point(self):
        with pytest.raises(ValueError):
            ev.HalfPlanePoint(0, 0)


class TestJets:
    def test_expr_matches_series(self, series):
        tau = ctx.mpc("0.2", "1.1")
        for k in range(3):
            a = ev.eval_expr(J, tau, k)
            b = ev.eval_series(series["J"], tau, k)
            assert abs(a - b) < SMALL * max(1, abs(b))

    @settings(max_examples=15, deadline=None)
    @given(st.floats(-0.5, 0.5), st.floats(0.7, 1.5))
    def test_delta_relation_pointwise(self, x, y):
        tau = ctx.mpc(x, y)
        lhs = ev.eval_expr(DELTA, tau) * 1728
        rhs = ev.eval_expr(E4**3, tau) - ev.eval_expr(E6**2, tau)
        assert abs(lhs - rhs) <= SMALL * max(1, abs(rhs))

    @settings(max_examples=10, deadline=None)
    @given(st.floats(-0.5, 0.5), st.floats(0.7, 1.5))
    def test_product_rule(self, x, y):
        tau = ctx.mpc(x, y)
        f, g = E4, ETA**4
        lhs = ev.eval_expr(f * g, tau, 1)
        rhs = ev.eval_expr(f, tau, 1) * ev.eval_expr(g, tau) + ev.eval_expr(f, tau) * ev.eval_expr(g, tau, 1)
        assert abs(lhs - rhs) <= SMALL * max(1, abs(rhs))


class TestSpecialValues:
    def test_default(self):
        rep = ev.special_value_report()
        assert rep.passed
        assert rep.max_deviation < 1e-25

    def test_low_precision(self):
        rep = ev.special_value_report(128, 20, 1e-10)
        assert rep.passed

    def test_closed_form(self):
        rho = ev.RHO().tau(256)
        assert abs(12 * (1 + rho) / (1 - rho) - 4 * ctx.sqrt(3) * 1j) < SMALL


class TestInversion:
    def test_arc(self):
        w = ev.invert_j_on_arc(Fr(4, 7))
        tau = w.tau(256)
        assert abs(abs(tau) - 1) < SMALL
        assert ctx.pi / 3 < ctx.arg(tau) < ctx.pi / 2
        assert abs(ev.eval_expr(J, w) - ctx.mpf(4) / 7) < 1e-25

    def test_critical_point_slow_newton(self):
        w = ev.invert_hauptmodul(J, 1, 1.05j, tol=1e-25)
        assert abs(w.tau(256) - 1j) < 1e-10

    def test_derivative_collapse(self):
        with pytest.raises(ev.InversionError):
            ev.invert_hauptmodul(J, ctx.mpf("1.001"), ev.I())

    def test_t_preimage(self):
        w = ev.invert_t(2)
        assert abs(ev.eval_expr(T, w, floor=0.2) - 2) < 1e-25

    def test_t_preimage_of_minus_one(self):
        w = ev.invert_t(-1)
        assert abs(ev.eval_expr(T, w, floor=0.2) + 1) < 1e-25


class TestResidues:
    def test_simple_pole(self):
        w = ctx.mpc("0.1", "1.0")
        rq = ev.ResidueQuery(lambda tau: 1 / (tau - w), ev.HalfPlanePoint.of(w))
        assert abs(ev.contour_residue(rq) - 1) < 1e-60

    def test_residue_free_double_pole(self):
        w = ev.invert_j_on_arc(Fr(4, 7))
        res = ev.contour_residue(ev.ResidueQuery(ETA**4 / (J - Fr(4, 7)) ** 2, w))
        assert abs(res) < 1e-15

    def test_negative_control(self):
        w = ev.invert_j_on_arc(Fr(1, 2))
        res = ev.contour_residue(ev.ResidueQuery(ETA**4 / (J - Fr(1, 2)) ** 2, w))
        assert abs(res) > 1e-3

    def test_holomorphic(self):
        assert abs(ev.contour_residue(ev.ResidueQuery(E4, ev.I()))) < 1e-20

    def test_guard(self):
        w = ctx.mpc("0", "1.0")
        rq = ev.ResidueQuery(lambda tau: 1 / (tau - w), ev.HalfPlanePoint(0, ctx.mpf("1.035")))
        with pytest.raises(ev.ResidueGuardError):
            ev.contour_residue(rq)

    def test_radius_invariant(self):
        with pytest.raises(ValueError):
            ev.ResidueQuery(E4, ev.HalfPlanePoint(0, 0.04), radius=0.05)
        with pytest.raises(ValueError):
            ev.ResidueQuery(E4, ev.I(), samples=16)

import json
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modeq.series import context
from modeq.stieltjes import (
    AlgebraicSystem,
    SolutionSet,
    SolverError,
    jacobian,
    ode_defect,
    residual,
    scale_equivalence_check,
    solve,
    solve_complex_multistart,
    solve_positive,
    stieltjes_polynomials,
    to_polynomial,
)

ctx = context(256)
CERT = ctx.mpf(10) ** -30


def S(a, b, c, n):
    return AlgebraicSystem(a, b, c, n)


class TestResidual:
    def test_closed_form_point(self):
        assert residual(S(4, 3, 12, 1), [Fr(4, 7)]) == [0]

    def test_half(self):
        # 4/(1/2) + 3/(-1/2) = 2
        assert residual(S(4, 3, 12, 1), [Fr(1, 2)]) == [2]

    def test_one_variable_jacobian(self):
        x = Fr(1, 3)
        assert jacobian(S(4, 3, 12, 1), [x]) == [[-4 / x**2 - 3 / (x - 1) ** 2]]

    def test_singular_points(self):
        with pytest.raises(ValueError):
            residual(S(1, 1, 1, 2), [Fr(1, 2), Fr(1, 2)])
        with pytest.raises(ValueError):
            residual(S(1, 1, 1, 1), [1])

    def test_invalid_system(self):
        with pytest.raises(ValueError):
            S(0, 0, 0, 1)
        with pytest.raises(ValueError):
            S(1, 1, 1, -1)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.fractions(-3, 3, max_denominator=9), min_size=3, max_size=3, unique=True),
           st.sampled_from([(1, 1, 1), (4, 3, -12), (2, -5, 3)]))
    def test_jacobian_by_finite_difference(self, xs, abc):
        if any(x in (0, 1) for x in xs):
            return
        sys_ = S(*abc, 3)
        x = [ctx.mpf(v.numerator) / v.denominator for v in xs]
        Jm = jacobian(sys_, x)
        h = ctx.mpf(10) ** -30
        for j in range(3):
            xp = list(x)
            xp[j] += h
            fd = [(a - b) / h for a, b in zip(residual(sys_, xp), residual(sys_, x))]
            for i in range(3):
                assert abs(fd[i] - Jm[i][j]) < 1e-20 * max(1, abs(Jm[i][j]))

    @settings(max_examples=30, deadline=None)
    @given(st.permutations([Fr(1, 5), Fr(-2, 3), Fr(7, 2), Fr(3, 4)]))
    def test_permutation_equivariance(self, perm):
        base = [Fr(1, 5), Fr(-2, 3), Fr(7, 2), Fr(3, 4)]
        sys_ = S(2, 3, 5, 4)
        r0 = dict(zip(base, residual(sys_, base)))
        r1 = dict(zip(perm, residual(sys_, perm)))
        assert r0 == r1


class TestPositive:
    @pytest.mark.parametrize("abc, x", [((4, 3, 12), Fr(4, 7)), ((4, 9, 12), Fr(4, 13)),
                                        ((8, 3, 12), Fr(8, 11)), ((8, 9, 12), Fr(8, 17))])
    def test_closed_forms(self, abc, x):
        sol = solve_positive(S(*abc, 1))
        assert sol.points == (x,)
        assert sol.residual_norm == 0

    @pytest.mark.parametrize("n", range(2, 9))
    def test_electrostatic_box(self, n):
        sol = solve_positive(S(4, 3, -12, n))
        xs = sol.points
        assert all(0 < x < 1 for x in xs)
        assert all(u < v for u, v in zip(xs, xs[1:]))
        assert sol.residual_norm <= CERT
        assert sol.domain_tag == "real-unit-interval"

    @pytest.mark.parametrize("n", range(2, 7))
    def test_matches_polynomial_oracle(self, n):
        sys_ = S(8, 9, -12, n)
        poly, kernel = stieltjes_polynomials(sys_)
        assert kernel == []
        roots = sorted(np.roots([float(c) for c in poly]).real)
        sol = solve_positive(sys_)
        assert np.allclose([float(x) for x in sol.points], roots, atol=1e-10)

    def test_positive_n2_has_no_box_solution(self):
        poly, kernel = stieltjes_polynomials(S(4, 3, 12, 2))
        assert kernel == [] and poly == [1, Fr(-4, 5), Fr(8, 5)]
        with pytest.raises(SolverError):
            solve_positive(S(4, 3, 12, 2), max_restarts=2)

    def test_empty(self):
        sol = solve_positive(S(4, 3, -12, 0))
        assert sol.points == () and to_polynomial(sol) == [1]

    def test_rejects_negative_endpoints(self):
        with pytest.raises(ValueError):
            solve_positive(S(-1, 3, 12, 2))


@pytest.fixture(scope="module")
def quartic_family():
    return solve_complex_multistart(S(1, 1, 1, 4), tries=24, rng_seed=0)


class TestMultistart:
    def test_family_membership(self, quartic_family):
        sys_ = S(1, 1, 1, 4)
        for sol in quartic_family:
            assert sol.residual_norm <= CERT
            p = to_polynomial(sol)
            assert ode_defect(sys_, p) < 1e-60
            # pencil x^4 - 2x^3 + s(x - 1/2)
            assert abs(p[1] + 2) < 1e-60 and abs(p[2]) < 1e-60
            assert abs(p[4] + p[3] / 2) < 1e-60
            assert sol.nullity == 1

    def test_reference_quartic_is_member(self):
        sys_ = S(1, 1, 1, 4)
        assert ode_defect(sys_, [1, -2, 0, 4, -2]) == 0
        roots = ctx.polyroots([1, -2, 0, 4, -2], extraprec=256)
        r = residual(S(1, 1, 1, 4), roots)
        assert max(abs(v) for v in r) < CERT

    def test_oracle_detects_continuum(self):
        poly, kernel = stieltjes_polynomials(S(1, 1, 1, 4))
        assert kernel == [[0, 0, 0, 1, Fr(-1, 2)]]

    def test_deterministic(self, quartic_family):
        again = solve_complex_multistart(S(1, 1, 1, 4), tries=24, rng_seed=0)
        assert [s.to_dict() for s in again] == [s.to_dict() for s in quartic_family]

    def test_case2_examples(self):
        assert solve(S(-2, 4, 2, 1))[0].points == (-1,)
        assert solve(S(4, -2, 2, 1))[0].points == (2,)
        sol = solve_complex_multistart(S(-2, 4, 2, 1), tries=4)[0]
        assert abs(sol.points[0] + 1) < 1e-60

    def test_inadmissible_label(self):
        poly, kernel = stieltjes_polynomials(S(2, -2, -2, 4))
        assert kernel == []
        # (x-1)^3 (x-1/3): repeated root at a singular value
        assert poly == [1, Fr(-10, 3), 4, -2, Fr(1, 3)]
        with pytest.raises(SolverError):
            solve_complex_multistart(S(2, -2, -2, 4), tries=16)

    def test_complex_n2(self):
        sol = solve(S(4, 3, 12, 2))[0]
        got = sorted((complex(p) for p in sol.points), key=lambda z: z.imag)
        assert np.allclose(got, [0.4 - 1.2j, 0.4 + 1.2j], atol=1e-12)


class TestPolynomial:
    def test_single(self):
        sol = solve_positive(S(4, 3, 12, 1))
        assert to_polynomial(sol) == [1, Fr(-4, 7)]

    @pytest.mark.parametrize("n", [2, 4, 6])
    def test_roundtrip(self, n):
        sol = solve_positive(S(4, 9, -12, n))
        roots = ctx.polyroots(to_polynomial(sol), maxsteps=200, extraprec=256)
        assert SolutionSet(sol.system, tuple(roots), 0).same_as(sol, 1e-20)


class TestScaling:
    def test_exact(self):
        sol = solve_positive(S(4, 3, 12, 1))
        assert scale_equivalence_check(sol, 2).passed
        assert scale_equivalence_check(sol, 1).passed
        assert residual(S(8, 6, 24, 1), sol.points) == [0]

    def test_quartic(self):
        sol = solve_complex_multistart(S(1, 1, 1, 4), tries=2)[0]
        rep = scale_equivalence_check(sol, 2)
        assert rep.passed

    @settings(max_examples=8, deadline=None)
    @given(st.fractions(-5, 5, max_denominator=7).filter(lambda a: a != 0))
    def test_scaling_property(self, alpha):
        sol = solve_positive(S(4, 3, -12, 3))
        assert scale_equivalence_check(sol, alpha).passed

    def test_zero_alpha(self):
        with pytest.raises(ValueError):
            scale_equivalence_check(solve_positive(S(4, 3, 12, 1)), 0)


class TestJSON:
    def test_schema(self):
        sol = solve_positive(S(4, 3, -12, 2))
        doc = json.loads(json.dumps(sol.to_dict()))
        assert {"a", "b", "c", "n", "points", "residual"} <= set(doc)
        assert all(set(p) >= {"re", "im"} for p in doc["points"])
        assert len(doc["points"][0]["re"]) > 60

    def test_exact_point(self):
        doc = solve_positive(S(4, 3, 12, 1)).to_dict()
        assert doc["points"][0]["exact"] == "4/7"
        assert doc["points"][0]["re"].startswith("0.571428571428")

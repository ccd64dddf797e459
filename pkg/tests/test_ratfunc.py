from fractions import Fraction as Fr

import sympy
from hypothesis import given, settings, strategies as st

from modeq.ratfunc import Poly, RationalFunction, T, poly_gcd

coeffs = st.lists(st.fractions(-4, 4, max_denominator=5), min_size=1, max_size=4)


@st.composite
def ratfuncs(draw):
    num = Poly(draw(coeffs))
    den = Poly(draw(coeffs))
    if den.is_zero():
        den = Poly([1])
    return RationalFunction(num, den)


def to_sympy(r: RationalFunction):
    t = sympy.Symbol("t")
    num = sum(sympy.Rational(c.numerator, c.denominator) * t**i for i, c in enumerate(r.num.c))
    den = sum(sympy.Rational(c.numerator, c.denominator) * t**i for i, c in enumerate(r.den.c))
    return t, num / den


class TestPoly:
    def test_divmod(self):
        q, r = Poly.from_high([1, 0, -1]).divmod(Poly.from_high([1, -1]))
        assert q == Poly.from_high([1, 1]) and r.is_zero()

    def test_gcd(self):
        p = Poly.from_roots([1, 2, 3])
        q = Poly.from_roots([2, 3, 5])
        assert poly_gcd(p, q) == Poly.from_roots([2, 3])

    def test_from_roots_quartic(self):
        assert T**4 - 2 * T**3 + 4 * T - 2 == RationalFunction(Poly.from_high([1, -2, 0, 4, -2]))


class TestRationalFunction:
    def test_reduced_and_monic(self):
        r = RationalFunction(Poly.from_roots([1, 2]) * 3, Poly.from_roots([1, 5]) * 2)
        assert r.den == Poly.from_roots([5])
        assert r.num == Poly.from_roots([2]) * Fr(3, 2)

    def test_limit(self):
        assert (T**2 / (2 * T**2 + 1)).limit_at_infinity() == Fr(1, 2)
        assert (T**3 / (T + 1)).limit_at_infinity() is None

    @settings(max_examples=40, deadline=None)
    @given(ratfuncs(), ratfuncs(), ratfuncs())
    def test_field_laws(self, f, g, h):
        assert f + g == g + f
        assert f * (g + h) == f * g + f * h
        assert (f * g) * h == f * (g * h)
        if not f.is_zero():
            assert f * f.reciprocal() == 1

    @settings(max_examples=40, deadline=None)
    @given(ratfuncs(), ratfuncs())
    def test_derivation(self, f, g):
        assert (f * g).derivative() == f.derivative() * g + f * g.derivative()

    @settings(max_examples=25, deadline=None)
    @given(ratfuncs())
    def test_derivative_against_sympy(self, f):
        t, e = to_sympy(f)
        _, d = to_sympy(f.derivative())
        assert sympy.simplify(sympy.diff(e, t) - d) == 0

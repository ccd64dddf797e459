"""q-expansions of the classical forms and a small expression language over them.

All catalog series are exact rationals on the default grid ``1/48``. The
normalization of ``J`` is ``J = E4^3 / (1728 Delta)`` (so ``J(i) = 1`` and
``J(rho) = 0``); ``lambda = theta2^4 / theta3^4`` and ``T = 1/lambda``.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass
from fractions import Fraction

from .report import VerificationReport
from .series import DEFAULT_DENOM, PuiseuxSeries, SeriesError, is_exact_scalar


class Atom(enum.Enum):
    E2 = "E2"
    E4 = "E4"
    E6 = "E6"
    Eta = "eta"
    Delta = "Delta"
    J = "J"
    Lambda = "lambda"
    Theta2 = "theta2"
    Theta3 = "theta3"
    Theta4 = "theta4"
    T = "t"
    DT = "Dt"


LEADING_EXPONENT = {
    Atom.E2: Fraction(0),
    Atom.E4: Fraction(0),
    Atom.E6: Fraction(0),
    Atom.Eta: Fraction(1, 24),
    Atom.Delta: Fraction(1),
    Atom.J: Fraction(-1),
    Atom.Lambda: Fraction(1, 2),
    Atom.Theta2: Fraction(1, 8),
    Atom.Theta3: Fraction(0),
    Atom.Theta4: Fraction(0),
    Atom.T: Fraction(-1, 2),
    Atom.DT: Fraction(-1, 2),
}


# ---------------------------------------------------------------------------
# catalog constructors


def _sigma(k: int, n: int) -> int:
    return sum(d**k for d in range(1, n + 1) if n % d == 0)


def eisenstein(k: int, order=60) -> PuiseuxSeries:
    """Normalized Eisenstein series ``E2``, ``E4`` or ``E6`` (constant term 1)."""
    scale = {2: -24, 4: 240, 6: -504}
    if k not in scale:
        raise ValueError(f"unsupported weight {k}; expected 2, 4 or 6")
    order = _check_order(order, 1)
    terms = {0: 1}
    for n in range(1, math.ceil(order)):
        terms[n] = scale[k] * _sigma(k - 1, n)
    return PuiseuxSeries.from_terms(terms, order)


def eta(order=60) -> PuiseuxSeries:
    """Dedekind eta via Euler's pentagonal number theorem."""
    order = _check_order(order, 1)
    terms = {}
    bound = order - Fraction(1, 24)
    k = 0
    while True:
        hit = False
        for m in ((k,) if k == 0 else (k, -k)):
            e = Fraction(m * (3 * m - 1), 2)
            if e < bound:
                terms[e + Fraction(1, 24)] = -1 if m % 2 else 1
                hit = True
        if not hit and k > 0:
            break
        k += 1
    return PuiseuxSeries.from_terms(terms, order)


def eta_product(order=60) -> PuiseuxSeries:
    """Eta from the truncated product ``q^(1/24) prod (1 - q^n)``; an oracle for :func:`eta`."""
    order = _check_order(order, 1)
    p = PuiseuxSeries.monomial(Fraction(1, 24), 1, order)
    for n in range(1, math.ceil(order) + 1):
        p = p * PuiseuxSeries.from_terms({0: 1, n: -1}, order)
    return p


def theta(which: int, order=60) -> PuiseuxSeries:
    """Jacobi theta constants with nome convention ``theta3 = sum q^(n^2/2)``."""
    order = _check_order(order, 1)
    terms: dict = {}
    n = 0
    while True:
        if which == 2:
            e = Fraction((2 * n + 1) ** 2, 8)
            mult, sign = 2, 1
        elif which in (3, 4):
            e = Fraction(n * n, 2)
            mult = 1 if n == 0 else 2
            sign = -1 if (which == 4 and n % 2) else 1
        else:
            raise ValueError(f"theta index must be 2, 3 or 4, got {which}")
        if e >= order:
            break
        terms[e] = sign * mult
        n += 1
    return PuiseuxSeries.from_terms(terms, order)


def _check_order(order, minimum):
    order = Fraction(order)
    if order < minimum:
        raise ValueError(f"order must be at least {minimum}")
    return order


_cache: dict = {}
_cache_lock = threading.Lock()


def _cached(key, order, build):
    """Read-mostly memo: reuse any cached series computed to at least ``order``."""
    order = Fraction(order)
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None and hit.order >= order:
        return hit.truncate(order) if hit.order > order else hit
    s = build(order)
    with _cache_lock:
        old = _cache.get(key)
        if old is None or old.order < s.order:
            _cache[key] = s
    return s.truncate(order) if s.order > order else s


def delta(order=60) -> PuiseuxSeries:
    """Discriminant, computed as ``eta^24`` and checked against ``(E4^3 - E6^2)/1728``."""

    def build(order):
        order = _check_order(order, 2)
        via_eta = eta(order).pow_int(24).truncate(order)
        via_eis = ((eisenstein(4, order).pow_int(3) - eisenstein(6, order).pow_int(2)) / 1728).truncate(order)
        if via_eta != via_eis:
            raise ArithmeticError("eta^24 and (E4^3 - E6^2)/1728 disagree")
        return via_eta

    return _cached("delta", order, build)


def j_invariant(order=60) -> PuiseuxSeries:
    """``J = E4^3 / (1728 Delta)``, principal part ``q^-1 / 1728``."""

    def build(order):
        order = _check_order(order, 2)
        d = delta(order + 2)
        return (eisenstein(4, order + 2).pow_int(3) / (d * 1728)).truncate(order)

    return _cached("J", order, build)


def lambda_(order=60) -> PuiseuxSeries:
    """Modular lambda ``theta2^4 / theta3^4``; leading term ``16 q^(1/2)``."""

    def build(order):
        order = _check_order(order, 2)
        return (theta(2, order).pow_int(4) / theta(3, order).pow_int(4)).truncate(order)

    return _cached("lambda", order, build)


def hauptmodul_t(order=60) -> PuiseuxSeries:
    """``t = 1/lambda = theta3^4 / theta2^4``; leading term ``q^(-1/2)/16``."""

    def build(order):
        order = _check_order(order, 2)
        return (theta(3, order + 2).pow_int(4) / theta(2, order + 2).pow_int(4)).truncate(order)

    return _cached("t", order, build)


def atom_series(atom: Atom, order) -> PuiseuxSeries:
    order = Fraction(order)
    if atom is Atom.E2:
        return _cached("E2", order, lambda o: eisenstein(2, o))
    if atom is Atom.E4:
        return _cached("E4", order, lambda o: eisenstein(4, o))
    if atom is Atom.E6:
        return _cached("E6", order, lambda o: eisenstein(6, o))
    if atom is Atom.Eta:
        return _cached("eta", order, eta)
    if atom is Atom.Delta:
        return delta(order)
    if atom is Atom.J:
        return j_invariant(order)
    if atom is Atom.Lambda:
        return lambda_(order)
    if atom in (Atom.Theta2, Atom.Theta3, Atom.Theta4):
        w = {Atom.Theta2: 2, Atom.Theta3: 3, Atom.Theta4: 4}[atom]
        return _cached(atom.value, order, lambda o: theta(w, o))
    if atom is Atom.T:
        return hauptmodul_t(order)
    if atom is Atom.DT:
        return hauptmodul_t(order).D()
    raise ValueError(atom)


# ---------------------------------------------------------------------------
# expression trees


class FormExpr:
    """Base class for symbolic products of catalog forms."""

    def __mul__(self, other):
        if not isinstance(other, FormExpr):
            other = Poly(Atom.J, (other,))
        return Product((self, other))

    def __rmul__(self, other):
        return Product((Poly(Atom.J, (other,)), self))

    def __truediv__(self, other):
        if not isinstance(other, FormExpr):
            other = Poly(Atom.J, (other,))
        return Product((self, IntPow(other, -1)))

    def __pow__(self, m):
        return IntPow(self, int(m))

    def leading_exponent(self) -> Fraction:
        raise NotImplementedError

    def atoms(self) -> set:
        raise NotImplementedError

    def scalars(self) -> list:
        return []


@dataclass(frozen=True)
class AtomExpr(FormExpr):
    atom: Atom

    def __sub__(self, x):
        return Poly(self.atom, (1, -x))

    def __add__(self, x):
        return Poly(self.atom, (1, x))

    def leading_exponent(self):
        return LEADING_EXPONENT[self.atom]

    def atoms(self):
        return {self.atom}

    def __str__(self):
        return self.atom.value


@dataclass(frozen=True)
class IntPow(FormExpr):
    base: FormExpr
    exponent: int

    def leading_exponent(self):
        return self.base.leading_exponent() * self.exponent

    def atoms(self):
        return self.base.atoms()

    def scalars(self):
        return self.base.scalars()

    def __str__(self):
        return f"({self.base})^{self.exponent}"


@dataclass(frozen=True)
class Product(FormExpr):
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def leading_exponent(self):
        return sum((f.leading_exponent() for f in self.factors), Fraction(0))

    def atoms(self):
        return set().union(*(f.atoms() for f in self.factors)) if self.factors else set()

    def scalars(self):
        return [s for f in self.factors for s in f.scalars()]

    def __str__(self):
        return "*".join(str(f) for f in self.factors) or "1"


@dataclass(frozen=True)
class Poly(FormExpr):
    """Polynomial in one atom; ``coefficients`` run from the highest degree down."""

    atom: Atom
    coefficients: tuple

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(self.coefficients))
        if not self.coefficients:
            raise ValueError("empty polynomial")

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def leading_exponent(self):
        e = LEADING_EXPONENT[self.atom]
        nz = [self.degree - i for i, c in enumerate(self.coefficients) if c != 0]
        if not nz:
            raise ZeroDivisionError("zero polynomial")
        cands = [d * e for d in nz]
        if e == 0 and len(nz) > 1:
            raise ValueError("leading exponent of a polynomial in a weight-0-leading atom is not determined")
        return min(cands)

    def atoms(self):
        return {self.atom}

    def scalars(self):
        return list(self.coefficients)

    def __str__(self):
        return f"P_{self.atom.value}{list(map(str, self.coefficients))}"


PolyInAtom = Poly

E2, E4, E6 = AtomExpr(Atom.E2), AtomExpr(Atom.E4), AtomExpr(Atom.E6)
ETA, DELTA, J = AtomExpr(Atom.Eta), AtomExpr(Atom.Delta), AtomExpr(Atom.J)
LAMBDA, T, DT = AtomExpr(Atom.Lambda), AtomExpr(Atom.T), AtomExpr(Atom.DT)
THETA2, THETA3, THETA4 = AtomExpr(Atom.Theta2), AtomExpr(Atom.Theta3), AtomExpr(Atom.Theta4)


def const(c) -> Poly:
    return Poly(Atom.J, (c,))


def _evaluate(expr: FormExpr, atom_order, prec):
    if isinstance(expr, AtomExpr):
        s = atom_series(expr.atom, atom_order)
        return s if prec is None else s.promote(prec)
    if isinstance(expr, IntPow):
        return _evaluate(expr.base, atom_order, prec).pow_int(expr.exponent)
    if isinstance(expr, Product):
        out = None
        for f in expr.factors:
            s = _evaluate(f, atom_order, prec)
            out = s if out is None else out * s
        if out is None:
            one = PuiseuxSeries.constant(1, atom_order)
            return one if prec is None else one.promote(prec)
        return out
    if isinstance(expr, Poly):
        x = atom_series(expr.atom, atom_order)
        if prec is not None:
            x = x.promote(prec)
        # Horner
        acc = None
        for c in expr.coefficients:
            if acc is None:
                acc = x * 0 + c
            else:
                acc = acc * x + c
        return acc
    raise TypeError(expr)


def compile_expr(expr: FormExpr, order=60, prec: int | None = None) -> PuiseuxSeries:
    """Expand ``expr`` into a series known (at least) below q-order ``order``.

    Exact rational arithmetic is used unless ``prec`` is given or a polynomial
    coefficient is not rational, in which case ``prec`` (default 256) bits of
    complex precision are used.
    """
    order = Fraction(order)
    if prec is None and not all(is_exact_scalar(c) for c in expr.scalars()):
        prec = 256
    pad = Fraction(2)
    for _ in range(12):
        s = _evaluate(expr, order + pad, prec)
        if s.order >= order:
            return s.truncate(order)
        pad += (order - s.order) + 1
    raise SeriesError("could not reach requested truncation order")


compile = compile_expr


# ---------------------------------------------------------------------------
# exact identity suite


def _exact_report(name, lhs, rhs, order, details=None):
    dev = lhs.deviation(rhs, order)
    return VerificationReport(name, int(order), dev, dev == 0, details=details or {})


def catalog_identities(order=40) -> list[VerificationReport]:
    """Exact rational checks of the classical relations among the catalog forms.

    Both signs of the ``E6`` relation are reported: with ``J`` normalized as
    here, ``DJ = -J E6/E4``, so only ``E6 = -(DJ)^3/(J^2(J-1))`` holds.
    """
    order = Fraction(order)
    pad = order + 4
    e4, e6 = eisenstein(4, pad), eisenstein(6, pad)
    d = delta(pad)
    j = j_invariant(pad)
    dj = j.D()
    et = eta(pad)
    reports = [
        _exact_report("1728*Delta = E4^3 - E6^2", d * 1728, e4.pow_int(3) - e6.pow_int(2), order),
        _exact_report("E4 = (DJ)^2/(J(J-1))", e4, dj.pow_int(2) / (j * (j - 1)), order),
        _exact_report("E6 = (DJ)^3/(J^2(J-1))", e6, dj.pow_int(3) / (j.pow_int(2) * (j - 1)), order),
        _exact_report("E6 = -(DJ)^3/(J^2(J-1))", e6, -dj.pow_int(3) / (j.pow_int(2) * (j - 1)), order),
        _exact_report(
            "Delta = (DJ)^6/(1728 J^4 (J-1)^3)",
            d,
            dj.pow_int(6) / (j.pow_int(4) * (j - 1).pow_int(3) * 1728),
            order,
        ),
        _exact_report(
            "24 Deta/eta = 6 D^2J/DJ - 4 DJ/J - 3 DJ/(J-1)",
            et.D() / et * 24,
            dj.D() / dj * 6 - dj / j * 4 - dj / (j - 1) * 3,
            order,
        ),
        _exact_report(
            "DE4/E4 = 2 D^2J/DJ - DJ/J - DJ/(J-1)",
            e4.D() / e4,
            dj.D() / dj * 2 - dj / j - dj / (j - 1),
            order,
        ),
        lambda_derivative_report(order),
    ]
    return reports


def lambda_derivative_report(order=40) -> VerificationReport:
    lam = lambda_(order + 2)
    th4 = theta(4, order + 2)
    return _exact_report("D lambda = theta4^4 lambda / 2", lam.D(), th4.pow_int(4) * lam / 2, order)


def jacobi_identity_report(order=40) -> VerificationReport:
    t2, t3, t4 = (theta(w, order) for w in (2, 3, 4))
    return _exact_report("theta3^4 = theta2^4 + theta4^4", t3.pow_int(4), t2.pow_int(4) + t4.pow_int(4), order)


def eta_quotient_lambda_report(order=30) -> VerificationReport:
    """Compare ``(eta(tau/2)/eta(2 tau))^8`` with ``lambda``.

    The quotient has a pole at the cusp while ``lambda`` vanishes there, so it
    cannot equal ``lambda``; the check records that and tests the exact
    relation ``(eta(tau/2)/eta(2 tau))^8 = 16 (1 - lambda)/lambda``.
    """
    order = Fraction(order)
    e = eta(2 * order + 2)
    quotient = (e.scale_exponents(Fraction(1, 2)) / e.scale_exponents(2)).pow_int(8)
    lam = lambda_(order + 2)
    candidate = (1 - lam) * 16 / lam
    rep = _exact_report("(eta(tau/2)/eta(2tau))^8 = 16(1-lambda)/lambda", quotient, candidate, order)
    rep.details = {
        "quotient_leading_exponent": quotient.leading()[0],
        "lambda_leading_exponent": lam.leading()[0],
        "quotient_equals_lambda": quotient.deviation(lam, order) == 0,
    }
    return rep

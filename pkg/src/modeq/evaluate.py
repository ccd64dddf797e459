"""Pointwise evaluation on the upper half-plane.

Series are summed termwise, derivatives included: a term ``c q^e`` contributes
``c (2 pi i e)^k q^e`` to the ``k``-th tau-derivative. Expressions are
evaluated atom by atom from the *holomorphic* base series (Eisenstein series,
eta, theta constants) and combined with Taylor-jet arithmetic, so that
quotients such as ``eta^4/(J - x)^2`` can be evaluated right up to their poles
in the upper half-plane, where their own q-expansions diverge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import forms
from .forms import Atom, AtomExpr, FormExpr, IntPow, Poly, Product
from .report import VerificationReport
from .series import PuiseuxSeries, context, to_complex

CONVERGENCE_FLOOR = 0.5


class EvaluationError(ArithmeticError):
    pass


class InversionError(ArithmeticError):
    pass


class ResidueGuardError(ArithmeticError):
    """The two contour radii disagree: another singularity is too close."""


@dataclass(frozen=True)
class HalfPlanePoint:
    re: object
    im: object

    def __post_init__(self):
        if not self.im > 0:
            raise ValueError("point must lie in the upper half-plane (im > 0)")

    @classmethod
    def of(cls, z):
        return cls(z.real, z.imag)

    def tau(self, prec: int):
        ctx = context(prec)
        return ctx.mpc(ctx.convert(self.re), ctx.convert(self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))


def I(prec=256):
    return HalfPlanePoint(0, 1)


def RHO(prec=256):
    ctx = context(prec)
    return HalfPlanePoint(ctx.mpf(-1) / 2, ctx.sqrt(3) / 2)


# ---------------------------------------------------------------------------
# termwise series evaluation


def _dense(series: PuiseuxSeries):
    """``(l, d, coeffs)`` such that ``series = q^(l/N) * sum coeffs[i] q^(i d/N)``."""
    keys = sorted(series._c)
    l = keys[0]
    d = 0
    for k in keys:
        d = math.gcd(d, k - l)
    d = d or 1
    n = (keys[-1] - l) // d + 1
    out = [0] * n
    for k in keys:
        out[(k - l) // d] = series._c[k]
    return l, d, out


def eval_series_with_error(series: PuiseuxSeries, tau, deriv: int = 0, prec: int = 256,
                           floor: float = CONVERGENCE_FLOOR):
    """Value of the ``deriv``-th tau-derivative of ``series`` at ``tau`` and a tail estimate.

    The tail estimate is the largest magnitude among the three highest stored
    terms, inflated by the geometric factor ``1/(1 - |v|)`` of the grid step.
    """
    ctx = context(prec)
    if isinstance(tau, HalfPlanePoint):
        tau = tau.tau(prec)
    else:
        tau = to_complex(tau, prec)
    if tau.imag < floor:
        raise EvaluationError(f"Im(tau) = {float(tau.imag):.3g} is below the convergence floor {floor}")
    if series.is_zero():
        return ctx.mpc(0), ctx.mpf(0)
    N = series.denom
    l, d, cs = _dense(series)
    twopii = 2 * ctx.pi * ctx.j
    v = ctx.exp(twopii * tau * d / N)
    base = ctx.exp(twopii * tau * l / N)
    acc = ctx.mpc(0)
    tail_terms = []
    av = abs(v)
    for i in range(len(cs) - 1, -1, -1):
        c = cs[i]
        if c != 0:
            c = to_complex(c, prec) if series.prec is None else ctx.mpc(c)
            if deriv:
                c = c * (twopii * ctx.mpf(l + i * d) / N) ** deriv
            if len(tail_terms) < 3:
                tail_terms.append(abs(c) * av**i)
        acc = acc * v + c
    err = max(tail_terms) * abs(base) / (1 - av) if tail_terms else ctx.mpf(0)
    return acc * base, err


def eval_series(series: PuiseuxSeries, tau, deriv: int = 0, prec: int = 256,
                floor: float = CONVERGENCE_FLOOR, tol=None):
    """Termwise value of the ``deriv``-th tau-derivative; raises if the tail exceeds ``tol``."""
    value, err = eval_series_with_error(series, tau, deriv, prec, floor)
    if tol is not None and err > tol:
        raise EvaluationError(f"estimated truncation error {float(err):.3g} exceeds tolerance {tol}")
    return value


evaluate = eval_series


# ---------------------------------------------------------------------------
# Taylor jets


class Jet:
    """Truncated Taylor expansion ``sum a_j (tau - tau0)^j`` for ``j <= K``."""

    __slots__ = ("a", "ctx")

    def __init__(self, a, ctx):
        self.a = list(a)
        self.ctx = ctx

    @property
    def K(self):
        return len(self.a) - 1

    def derivative_value(self, k: int):
        return self.a[k] * math.factorial(k)

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet([x + y for x, y in zip(self.a, other.a)], self.ctx)
        a = list(self.a)
        a[0] += other
        return Jet(a, self.ctx)

    __radd__ = __add__

    def __neg__(self):
        return Jet([-x for x in self.a], self.ctx)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet([x * other for x in self.a], self.ctx)
        n = min(len(self.a), len(other.a))
        out = []
        for k in range(n):
            s = self.ctx.mpc(0)
            for j in range(k + 1):
                s += self.a[j] * other.a[k - j]
            out.append(s)
        return Jet(out, self.ctx)

    __rmul__ = __mul__

    def reciprocal(self):
        a0 = self.a[0]
        if a0 == 0:
            raise ZeroDivisionError("jet has a zero constant term")
        b = [1 / a0]
        for k in range(1, len(self.a)):
            s = self.ctx.mpc(0)
            for j in range(1, k + 1):
                s += self.a[j] * b[k - j]
            b.append(-s / a0)
        return Jet(b, self.ctx)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1 / other)

    def pow_int(self, m: int):
        if m < 0:
            return self.reciprocal().pow_int(-m)
        out = Jet([self.ctx.mpc(1)] + [self.ctx.mpc(0)] * self.K, self.ctx)
        base = self
        while m:
            if m & 1:
                out = out * base
            m >>= 1
            if m:
                base = base * base
        return out

    def derivative(self):
        """Jet of the tau-derivative (one order shorter)."""
        return Jet([(j + 1) * self.a[j + 1] for j in range(self.K)], self.ctx)


_BASE_SERIES = {
    Atom.E2: lambda o: forms.atom_series(Atom.E2, o),
    Atom.E4: lambda o: forms.atom_series(Atom.E4, o),
    Atom.E6: lambda o: forms.atom_series(Atom.E6, o),
    Atom.Eta: lambda o: forms.atom_series(Atom.Eta, o),
    Atom.Theta2: lambda o: forms.atom_series(Atom.Theta2, o),
    Atom.Theta3: lambda o: forms.atom_series(Atom.Theta3, o),
    Atom.Theta4: lambda o: forms.atom_series(Atom.Theta4, o),
}


class PointEvaluator:
    """Evaluates expression jets at one point, caching the atom jets."""

    def __init__(self, tau, K: int = 0, prec: int = 256, order=60, floor: float = CONVERGENCE_FLOOR):
        self.ctx = context(prec)
        self.prec = prec
        self.order = order
        self.floor = floor
        self.K = K
        self.tau = tau.tau(prec) if isinstance(tau, HalfPlanePoint) else to_complex(tau, prec)
        self._atoms: dict = {}

    def _base(self, atom, K):
        s = _BASE_SERIES[atom](self.order)
        return Jet(
            [eval_series(s, self.tau, k, self.prec, self.floor) / math.factorial(k) for k in range(K + 1)],
            self.ctx,
        )

    def atom(self, atom: Atom, K=None):
        K = self.K if K is None else K
        key = (atom, K)
        if key in self._atoms:
            return self._atoms[key]
        if atom in _BASE_SERIES:
            jet = self._base(atom, K)
        elif atom is Atom.Delta:
            jet = self.atom(Atom.Eta, K).pow_int(24)
        elif atom is Atom.J:
            e4c = self.atom(Atom.E4, K).pow_int(3)
            jet = e4c / (e4c - self.atom(Atom.E6, K).pow_int(2))
        elif atom is Atom.Lambda:
            jet = self.atom(Atom.Theta2, K).pow_int(4) / self.atom(Atom.Theta3, K).pow_int(4)
        elif atom is Atom.T:
            jet = self.atom(Atom.Theta3, K).pow_int(4) / self.atom(Atom.Theta2, K).pow_int(4)
        elif atom is Atom.DT:
            jet = self.atom(Atom.T, K + 1).derivative() * (1 / (2 * self.ctx.pi * self.ctx.j))
        else:
            raise ValueError(atom)
        self._atoms[key] = jet
        return jet

    def jet(self, expr: FormExpr) -> Jet:
        ctx = self.ctx
        if isinstance(expr, AtomExpr):
            return self.atom(expr.atom)
        if isinstance(expr, IntPow):
            return self.jet(expr.base).pow_int(expr.exponent)
        if isinstance(expr, Product):
            out = Jet([ctx.mpc(1)] + [ctx.mpc(0)] * self.K, ctx)
            for f in expr.factors:
                out = out * self.jet(f)
            return out
        if isinstance(expr, Poly):
            x = self.atom(expr.atom)
            acc = None
            for c in expr.coefficients:
                c = to_complex(c, self.prec)
                acc = Jet([c] + [ctx.mpc(0)] * self.K, ctx) if acc is None else acc * x + c
            return acc
        raise TypeError(expr)


def eval_expr(expr: FormExpr, tau, deriv: int = 0, prec: int = 256, order=60,
              floor: float = CONVERGENCE_FLOOR):
    """Value of the ``deriv``-th tau-derivative of ``expr`` at ``tau``."""
    ev = PointEvaluator(tau, deriv, prec, order, floor)
    return ev.jet(expr).derivative_value(deriv)


# ---------------------------------------------------------------------------
# special values at the elliptic points


def special_value_report(prec: int = 256, order=60, tol=None) -> VerificationReport:
    """Ratios of derivatives at ``i`` and ``rho`` against ``3i`` and ``12(1+rho)/(1-rho)``."""
    ctx = context(prec)
    tol = ctx.mpf(10) ** (-25) if tol is None else ctx.convert(tol)
    i_pt, rho_pt = I(prec), RHO(prec)
    rho = rho_pt.tau(prec)
    et = forms.eta(order)
    e4, e6 = forms.eisenstein(4, order), forms.eisenstein(6, order)
    j = forms.j_invariant(order)

    def ev(s, pt, k):
        return eval_series(s, pt, k, prec)

    target_i = 3 * ctx.j
    target_rho_closed = 12 * (1 + rho) / (1 - rho)
    target_rho = 4 * ctx.sqrt(3) * ctx.j
    ratios = {
        "12 eta'(i)/eta(i)": (12 * ev(et, i_pt, 1) / ev(et, i_pt, 0), target_i),
        "(3/7) E6''(i)/E6'(i)": (ctx.mpf(3) / 7 * ev(e6, i_pt, 2) / ev(e6, i_pt, 1), target_i),
        "J'''(i)/J''(i)": (ev(j, i_pt, 3) / ev(j, i_pt, 2), target_i),
        "24 eta'(rho)/eta(rho)": (24 * ev(et, rho_pt, 1) / ev(et, rho_pt, 0), target_rho),
        "J''''(rho)/J'''(rho)": (ev(j, rho_pt, 4) / ev(j, rho_pt, 3), target_rho),
        "(6/5) E4''(rho)/E4'(rho)": (ctx.mpf(6) / 5 * ev(e4, rho_pt, 2) / ev(e4, rho_pt, 1), target_rho),
    }
    devs = {name: abs(val - tgt) for name, (val, tgt) in ratios.items()}
    closed_gap = abs(target_rho_closed - target_rho)
    worst = max(list(devs.values()) + [closed_gap])
    details = {
        "values": {name: val for name, (val, _) in ratios.items()},
        "deviations": devs,
        "closed_form_rho_vs_4sqrt3i": closed_gap,
        "precision_bits": prec,
    }
    return VerificationReport("special values at i and rho", int(order), worst, bool(worst <= tol),
                              tolerance=tol, tolerance_source="run configuration", details=details)


# ---------------------------------------------------------------------------
# inversion


def invert_hauptmodul(form: FormExpr, target, seed, prec: int = 256, tol=None, maxiter: int = 200,
                      floor: float = CONVERGENCE_FLOOR, order=60) -> HalfPlanePoint:
    """Newton iteration in tau for ``form(w) = target`` starting at ``seed``."""
    ctx = context(prec)
    tol = ctx.mpf(2) ** (-(prec * 7 // 8)) if tol is None else ctx.convert(tol)
    target = to_complex(target, prec)
    tau = seed.tau(prec) if isinstance(seed, HalfPlanePoint) else to_complex(seed, prec)
    for _ in range(maxiter):
        jet = PointEvaluator(tau, 1, prec, order, floor).jet(form)
        r = jet.a[0] - target
        if abs(r) <= tol:
            return HalfPlanePoint(tau.real, tau.imag)
        d = jet.a[1]
        if abs(d) <= ctx.mpf(2) ** (-prec // 2) * max(1, abs(r)):
            raise InversionError("derivative collapsed during Newton iteration (near a critical point)")
        step = r / d
        for _ in range(40):
            new = tau - step
            if new.imag >= floor:
                break
            step /= 2
        else:
            raise InversionError("Newton iterate left the evaluation region")
        tau = new
    raise InversionError(f"no convergence after {maxiter} iterations (|residual| = {float(abs(r)):.3g})")


def invert_j_on_arc(x, prec: int = 256, order=60) -> HalfPlanePoint:
    """Preimage ``w = exp(i theta)``, ``pi/3 < theta < pi/2``, of ``x`` in ``(0, 1)`` under ``J``.

    ``J`` is real along this arc; monotonicity is checked on a sample grid
    before bisecting, then Newton polishes the bisection result.
    """
    ctx = context(prec)
    x = ctx.convert(x) if not isinstance(x, Fraction) else to_complex(x, prec).real
    if not 0 < x < 1:
        raise InversionError("arc inversion needs 0 < x < 1")
    lo, hi = ctx.pi / 3, ctx.pi / 2

    def J_at(th):
        return eval_expr(forms.J, ctx.expjpi(th / ctx.pi), 0, prec, order).real

    grid = [J_at(lo + (hi - lo) * k / 16) for k in range(1, 16)]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InversionError("J is not monotone along the arc; assumption violated")
    a, b = lo, hi
    for _ in range(60):
        mid = (a + b) / 2
        if J_at(mid) < x:
            a = mid
        else:
            b = mid
    seed = ctx.expjpi(((a + b) / 2) / ctx.pi)
    return invert_hauptmodul(forms.J, x, seed, prec, order=order)


def _theta_np(tau, nterms=40):
    tau = np.asarray(tau, dtype=complex)
    n = np.arange(-nterms, nterms + 1)[:, None]
    ph = np.exp(1j * np.pi * tau[None, :])
    t3 = np.sum(ph ** (n * n), axis=0)
    t2 = np.sum(ph ** ((n + 0.5) ** 2), axis=0)
    return t2, t3


def invert_t(x, prec: int = 256, floor: float = 0.2, order=60) -> HalfPlanePoint:
    """Preimage of ``x`` under ``t = theta3^4/theta2^4`` with the largest imaginary part found.

    A double-precision scan of ``|Re| <= 1, floor <= Im <= 2`` seeds a
    high-precision Newton polish.
    """
    xc = complex(to_complex(x, 64))
    re = np.linspace(-1.0, 1.0, 161)
    im = np.linspace(floor, 2.0, 120)
    R, M = np.meshgrid(re, im)
    tau = (R + 1j * M).ravel()
    t2, t3 = _theta_np(tau)
    with np.errstate(all="ignore"):
        t = (t3 / t2) ** 4
    gap = np.abs(t - xc) / (1 + abs(xc))
    order_idx = np.argsort(gap)
    tried = []
    best = None
    for idx in order_idx[:60]:
        seed = complex(tau[idx])
        if any(abs(seed - s) < 0.05 for s in tried):
            continue
        tried.append(seed)
        try:
            w = invert_hauptmodul(forms.T, x, seed, prec, floor=floor, order=order)
        except InversionError:
            continue
        if best is None or w.im > best.im + 1e-9:
            best = w
        if len(tried) >= 6:
            break
    if best is None:
        raise InversionError(f"could not invert t at {xc}")
    return best


# ---------------------------------------------------------------------------
# residues


@dataclass(frozen=True)
class ResidueQuery:
    """``form`` is a :class:`FormExpr` or any callable of a complex ``tau``."""

    form: object
    center: HalfPlanePoint
    radius: float = 0.05
    samples: int = 256

    def __post_init__(self):
        if self.samples < 64:
            raise ValueError("at least 64 samples are required")
        if not 0 < self.radius < float(self.center.im):
            raise ValueError("contour radius must be positive and smaller than Im(center)")


def _trapezoid(form, center, radius, samples, prec, order, floor):
    ctx = context(prec)
    total = ctx.mpc(0)
    r = ctx.convert(radius)
    if isinstance(form, FormExpr):
        f = lambda tau: eval_expr(form, tau, 0, prec, order, floor)
    else:
        f = form
    for k in range(samples):
        e = ctx.expjpi(ctx.mpf(2 * k) / samples)
        total += f(center + r * e) * e
    return total * r / samples


def contour_residue(rq: ResidueQuery, prec: int = 256, order=60, tol=1e-20, floor=None):
    """``(1/2 pi i)`` times the contour integral over the circle, with a half-radius cross-check."""
    ctx = context(prec)
    center = rq.center.tau(prec)
    if floor is None:
        floor = min(CONVERGENCE_FLOOR, float(center.imag) - rq.radius - 1e-9)
    if float(center.imag) - rq.radius < floor:
        raise ResidueGuardError("contour dips below the evaluation floor")
    outer = _trapezoid(rq.form, center, rq.radius, rq.samples, prec, order, floor)
    inner = _trapezoid(rq.form, center, rq.radius / 2, rq.samples, prec, order, floor)
    scale = max(ctx.mpf(1), abs(outer))
    if abs(outer - inner) > ctx.convert(tol) * scale:
        raise ResidueGuardError(
            f"radius {rq.radius} and {rq.radius / 2} estimates differ by {float(abs(outer - inner)):.3g}"
        )
    return outer

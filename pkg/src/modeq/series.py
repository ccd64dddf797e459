"""Truncated Laurent-Puiseux series in u = q^(1/N).

A series stores its nonzero coefficients sparsely, keyed by the exponent
numerator ``k`` on the grid ``1/N`` (term ``c * q^(k/N)``), together with a
truncation numerator ``trunc``: every exponent ``>= trunc/N`` is unknown.

Two scalar domains are supported:

* exact rationals (``prec is None``), stored as ``gmpy2.mpq``;
* extended-precision complex numbers (``prec`` bits), stored as ``mpc``
  values of a private :class:`mpmath.MPContext` for that precision.

Promotion from exact to complex is always explicit (:meth:`PuiseuxSeries.promote`).
Series are immutable.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from numbers import Rational

import gmpy2
import mpmath

DEFAULT_DENOM = 48
DEFAULT_ORDER = 60
MIN_PREC = 53

_ctx_lock = threading.Lock()
_contexts: dict[int, mpmath.MPContext] = {}


class DomainError(TypeError):
    """Exact and complex scalars were mixed without explicit promotion."""


class SeriesError(ValueError):
    pass


def context(prec: int) -> mpmath.MPContext:
    """Return the shared mpmath context working at ``prec`` bits."""
    with _ctx_lock:
        ctx = _contexts.get(prec)
        if ctx is None:
            ctx = mpmath.MPContext()
            ctx.prec = prec
            _contexts[prec] = ctx
        return ctx


def to_mpq(x):
    if isinstance(x, type(gmpy2.mpq())):
        return x
    if isinstance(x, (int, Fraction)) or isinstance(x, Rational):
        return gmpy2.mpq(x.numerator, x.denominator)
    if isinstance(x, type(gmpy2.mpz())):
        return gmpy2.mpq(x)
    raise DomainError(f"{type(x).__name__} is not an exact rational")


def is_exact_scalar(x) -> bool:
    return isinstance(x, (int, Fraction, type(gmpy2.mpq()), type(gmpy2.mpz()))) or (
        isinstance(x, Rational) and not isinstance(x, bool)
    )


def to_complex(x, prec: int):
    """Convert an exact or floating scalar to a complex scalar at ``prec`` bits."""
    ctx = context(prec)
    if is_exact_scalar(x):
        q = to_mpq(x)
        return ctx.mpc(ctx.mpf(int(q.numerator)) / int(q.denominator))
    if isinstance(x, (mpmath.mpf, mpmath.mpc)) or hasattr(x, "_mpf_") or hasattr(x, "_mpc_"):
        return ctx.mpc(ctx.convert(x))
    return ctx.mpc(x)


def to_fraction(x) -> Fraction:
    q = to_mpq(x)
    return Fraction(int(q.numerator), int(q.denominator))


def _frac(e) -> Fraction:
    return Fraction(e)


class PuiseuxSeries:
    """Truncated series ``sum c_k q^(k/denom)`` with exponents ``< trunc/denom`` known."""

    __slots__ = ("denom", "trunc", "prec", "_c")

    def __init__(self, coeffs, trunc: int, denom: int = DEFAULT_DENOM, prec: int | None = None):
        if denom <= 0:
            raise SeriesError("grid denominator must be positive")
        if prec is not None and prec < MIN_PREC:
            raise SeriesError(f"precision must be at least {MIN_PREC} bits")
        self.denom = int(denom)
        self.trunc = int(trunc)
        self.prec = prec
        conv = to_mpq if prec is None else (lambda v: to_complex(v, prec))
        c = {}
        for k, v in dict(coeffs).items():
            k = int(k)
            if k >= self.trunc:
                continue
            if prec is None and not is_exact_scalar(v):
                raise DomainError("complex coefficient in an exact series; promote first")
            v = conv(v)
            if v != 0:
                c[k] = v
        self._c = c

    @classmethod
    def _raw(cls, coeffs: dict, trunc: int, denom: int, prec: int | None) -> "PuiseuxSeries":
        s = object.__new__(cls)
        s.denom = denom
        s.trunc = trunc
        s.prec = prec
        s._c = {k: v for k, v in coeffs.items() if k < trunc and v != 0}
        return s

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_terms(cls, terms: dict, order, denom: int = DEFAULT_DENOM, prec: int | None = None):
        """Build from ``{exponent: coefficient}`` with rational exponents, known below ``order``."""
        order = _frac(order)
        for e in terms:
            denom = math.lcm(denom, Fraction(e).denominator)
        denom = math.lcm(denom, order.denominator)
        coeffs = {}
        for e, v in terms.items():
            k = Fraction(e) * denom
            coeffs[int(k)] = v
        return cls(coeffs, int(order * denom), denom, prec)

    @classmethod
    def constant(cls, c, order=DEFAULT_ORDER, denom: int = DEFAULT_DENOM, prec: int | None = None):
        return cls.from_terms({0: c}, order, denom, prec)

    @classmethod
    def monomial(cls, exponent, c=1, order=DEFAULT_ORDER, denom: int = DEFAULT_DENOM, prec=None):
        return cls.from_terms({Fraction(exponent): c}, order, denom, prec)

    # -- basic properties ---------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.prec is None

    @property
    def lo(self) -> int:
        """Lowest stored exponent numerator (``trunc`` for the zero series)."""
        return min(self._c) if self._c else self.trunc

    @property
    def order(self) -> Fraction:
        """Truncation order as a q-exponent: terms at ``q^order`` and above are unknown."""
        return Fraction(self.trunc, self.denom)

    def is_zero(self) -> bool:
        return not self._c

    def __len__(self):
        return len(self._c)

    def items(self):
        """Yield ``(exponent, coefficient)`` pairs in increasing exponent order."""
        for k in sorted(self._c):
            yield Fraction(k, self.denom), self._export(self._c[k])

    def terms(self) -> dict:
        return dict(self.items())

    def _export(self, v):
        return to_fraction(v) if self.prec is None else v

    def _zero(self):
        return gmpy2.mpq(0) if self.prec is None else context(self.prec).mpc(0)

    def _one(self):
        return gmpy2.mpq(1) if self.prec is None else context(self.prec).mpc(1)

    def coeff(self, e):
        """Coefficient of ``q^e``; raises if ``e`` is off-grid or not below the truncation."""
        e = Fraction(e)
        k = e * self.denom
        if k.denominator != 1:
            if e < self.order:
                return self._export(self._zero())
            raise SeriesError(f"exponent {e} is at or above truncation order {self.order}")
        k = int(k)
        if k >= self.trunc:
            raise SeriesError(f"exponent {e} is at or above truncation order {self.order}")
        return self._export(self._c.get(k, self._zero()))

    def leading(self):
        """``(exponent, coefficient)`` of the lowest nonzero term."""
        if not self._c:
            raise SeriesError("zero series has no leading term")
        k = self.lo
        return Fraction(k, self.denom), self._export(self._c[k])

    def __repr__(self):
        shown = []
        for e, v in list(self.items())[:4]:
            shown.append(f"{v}*q^({e})")
        body = " + ".join(shown) if shown else "0"
        dom = "QQ" if self.prec is None else f"CC[{self.prec}]"
        return f"PuiseuxSeries({body} + O(q^({self.order})), {dom})"

    # -- grid and domain handling --------------------------------------------

    def regrid(self, denom: int) -> "PuiseuxSeries":
        """Re-express on grid ``1/denom``; ``denom`` must be a multiple of the current grid."""
        if denom % self.denom:
            raise SeriesError(f"grid 1/{denom} does not refine 1/{self.denom}")
        m = denom // self.denom
        if m == 1:
            return self
        return PuiseuxSeries._raw({k * m: v for k, v in self._c.items()}, self.trunc * m, denom, self.prec)

    def promote(self, prec: int) -> "PuiseuxSeries":
        """Explicit exact-to-complex promotion (or precision change for complex series)."""
        if prec < MIN_PREC:
            raise SeriesError(f"precision must be at least {MIN_PREC} bits")
        return PuiseuxSeries._raw({k: to_complex(v, prec) for k, v in self._c.items()}, self.trunc, self.denom, prec)

    def truncate(self, order) -> "PuiseuxSeries":
        """Forget every term at exponent ``>= order``."""
        order = Fraction(order)
        s = self.regrid(math.lcm(self.denom, order.denominator))
        t = min(s.trunc, int(order * s.denom))
        return PuiseuxSeries._raw(s._c, t, s.denom, s.prec)

    def _align(self, other):
        """Bring two series to a common grid and scalar domain."""
        if not isinstance(other, PuiseuxSeries):
            raise TypeError(other)
        if (self.prec is None) != (other.prec is None):
            raise DomainError("cannot mix exact and complex series; promote explicitly")
        a, b = self, other
        if a.prec is not None and a.prec != b.prec:
            p = min(a.prec, b.prec)
            a = a if a.prec == p else a.promote(p)
            b = b if b.prec == p else b.promote(p)
        n = math.lcm(a.denom, b.denom)
        return a.regrid(n), b.regrid(n)

    def _scalar(self, c):
        if self.prec is None:
            if not is_exact_scalar(c):
                raise DomainError("complex scalar applied to an exact series; promote first")
            return to_mpq(c)
        return to_complex(c, self.prec)

    # -- ring operations ------------------------------------------------------

    def __neg__(self):
        return PuiseuxSeries._raw({k: -v for k, v in self._c.items()}, self.trunc, self.denom, self.prec)

    def __add__(self, other):
        if not isinstance(other, PuiseuxSeries):
            c = self._scalar(other)
            out = dict(self._c)
            if 0 < self.trunc:
                out[0] = out.get(0, self._zero()) + c
            return PuiseuxSeries._raw(out, self.trunc, self.denom, self.prec)
        a, b = self._align(other)
        out = dict(a._c)
        for k, v in b._c.items():
            out[k] = out[k] + v if k in out else v
        return PuiseuxSeries._raw(out, min(a.trunc, b.trunc), a.denom, a.prec)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PuiseuxSeries):
            c = self._scalar(other)
            return PuiseuxSeries._raw({k: v * c for k, v in self._c.items()}, self.trunc, self.denom, self.prec)
        a, b = self._align(other)
        trunc = min(a.trunc + b.lo, b.trunc + a.lo)
        out = {}
        bi = sorted(b._c.items())
        for ka, va in a._c.items():
            for kb, vb in bi:
                k = ka + kb
                if k >= trunc:
                    break
                if k in out:
                    out[k] += va * vb
                else:
                    out[k] = va * vb
        return PuiseuxSeries._raw(out, trunc, a.denom, a.prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PuiseuxSeries):
            return self * other.reciprocal()
        c = self._scalar(other)
        if c == 0:
            raise ZeroDivisionError("division of a series by zero")
        return self * (1 / c)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, m):
        return self.pow_int(m)

    def _normalized(self):
        """Split ``f = c * u^l * (1 + sum a_i v^i)`` with ``v = u^d``.

        Returns ``(l, c, d, a, n)`` where ``a`` is a dense list of length ``n``
        holding the relative coefficients (``a[0] == 1``).
        """
        if not self._c:
            raise ZeroDivisionError("zero series has no reciprocal")
        l = self.lo
        c = self._c[l]
        span = self.trunc - l
        d = 0
        for k in self._c:
            d = math.gcd(d, k - l)
        if d == 0:
            d = span
        n = -(-span // d)
        a = [self._zero()] * n
        inv = 1 / c
        for k, v in self._c.items():
            a[(k - l) // d] = v * inv
        return l, c, d, a, n

    def reciprocal(self) -> "PuiseuxSeries":
        l, c, d, a, n = self._normalized()
        nz = [(j, a[j]) for j in range(1, n) if a[j] != 0]
        b = [self._zero()] * n
        b[0] = self._one()
        for i in range(1, n):
            s = self._zero()
            for j, aj in nz:
                if j > i:
                    break
                bij = b[i - j]
                if bij != 0:
                    s += aj * bij
            b[i] = -s
        inv = 1 / c
        span = self.trunc - l
        out = {-l + i * d: b[i] * inv for i in range(n) if b[i] != 0}
        return PuiseuxSeries._raw(out, -l + span, self.denom, self.prec)

    def pow_int(self, m: int) -> "PuiseuxSeries":
        m = int(m)
        if m < 0:
            return self.reciprocal().pow_int(-m)
        if m == 0:
            l, c, d, a, n = self._normalized()
            return PuiseuxSeries._raw({0: self._one()}, self.trunc - l, self.denom, self.prec)
        result = None
        base = self
        while m:
            if m & 1:
                result = base if result is None else result * base
            m >>= 1
            if m:
                base = base * base
        return result

    def sqrt(self) -> "PuiseuxSeries":
        """Square root with principal branch on the leading coefficient.

        Requires an even leading exponent numerator; exact series additionally
        need a perfect rational square as leading coefficient.
        """
        l, c, d, a, n = self._normalized()
        if l % 2:
            raise SeriesError("odd leading exponent numerator; regrid to a finer grid first")
        if self.prec is None:
            if c < 0:
                raise DomainError("negative exact leading coefficient; promote to complex first")
            num, den = gmpy2.isqrt_rem(c.numerator), gmpy2.isqrt_rem(c.denominator)
            if num[1] or den[1]:
                raise DomainError("leading coefficient is not a rational square; promote first")
            root = gmpy2.mpq(num[0], den[0])
        else:
            root = context(self.prec).sqrt(c)
        b = [self._zero()] * n
        b[0] = self._one()
        half = gmpy2.mpq(1, 2) if self.prec is None else context(self.prec).mpf(0.5)
        for i in range(1, n):
            s = a[i]
            for j in range(1, i):
                s -= b[j] * b[i - j]
            b[i] = s * half
        span = self.trunc - l
        out = {l // 2 + i * d: b[i] * root for i in range(n) if b[i] != 0}
        return PuiseuxSeries._raw(out, l // 2 + span, self.denom, self.prec)

    def D(self) -> "PuiseuxSeries":
        """The derivation ``q d/dq = (1/2 pi i) d/dtau``."""
        if self.prec is None:
            out = {k: v * gmpy2.mpq(k, self.denom) for k, v in self._c.items()}
        else:
            ctx = context(self.prec)
            out = {k: v * (ctx.mpf(k) / self.denom) for k, v in self._c.items()}
        return PuiseuxSeries._raw(out, self.trunc, self.denom, self.prec)

    def scale_exponents(self, r) -> "PuiseuxSeries":
        """Substitute ``tau -> r*tau``: ``c q^e -> c q^(r e)`` for rational ``r > 0``."""
        r = Fraction(r)
        if r <= 0:
            raise SeriesError("exponent scale must be positive")
        p, s = r.numerator, r.denominator
        denom = self.denom * s
        coeffs = {k * p: v for k, v in self._c.items()}
        trunc = self.trunc * p
        # fold back onto the original grid when every exponent allows it
        g = math.gcd(s, trunc, *coeffs.keys()) if coeffs else math.gcd(s, trunc)
        if g > 1:
            coeffs = {k // g: v for k, v in coeffs.items()}
            trunc //= g
            denom //= g
        return PuiseuxSeries._raw(coeffs, trunc, denom, self.prec)

    # -- comparison -------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        if (self.prec is None) != (other.prec is None):
            return False
        return self.order == other.order and self.terms() == other.terms()

    __hash__ = None

    def deviation(self, other, order) -> object:
        """Max absolute coefficient difference over exponents below ``order``.

        Exact series return a ``Fraction``; complex ones an ``mpf``.
        """
        order = Fraction(order)
        for s in (self, other):
            if s.order < order:
                raise SeriesError(f"series only known to order {s.order} < {order}")
        diff = (self - other).truncate(order)
        if diff.prec is None:
            return max((abs(to_fraction(v)) for v in diff._c.values()), default=Fraction(0))
        ctx = context(diff.prec)
        return max((ctx.mpf(abs(v)) for v in diff._c.values()), default=ctx.mpf(0))


def add(f, g):
    return f + g


def mul(f, g):
    return f * g


def reciprocal(f):
    return f.reciprocal()


def pow_int(f, m):
    return f.pow_int(m)


def sqrt(f):
    return f.sqrt()


def D(f):
    return f.D()


def scale_exponents(f, r):
    return f.scale_exponents(r)


def coeff(f, e):
    return f.coeff(e)


def leading(f):
    return f.leading()

"""Exact polynomials and rational functions over the rationals in one variable."""

from __future__ import annotations

from fractions import Fraction


def _trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


class Poly:
    """Dense polynomial, coefficients stored lowest degree first."""

    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        self.c = tuple(_trim(Fraction(v) for v in coeffs))

    @classmethod
    def from_high(cls, coeffs):
        return cls(list(reversed(list(coeffs))))

    @classmethod
    def from_roots(cls, roots):
        p = cls([1])
        for r in roots:
            p = p * cls([-Fraction(r), 1])
        return p

    @property
    def degree(self):
        return len(self.c) - 1

    def is_zero(self):
        return not self.c

    def lead(self):
        return self.c[-1] if self.c else Fraction(0)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = Poly([other])
        return self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __repr__(self):
        return f"Poly({[str(v) for v in self.c]})"

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly([other])
        n = max(len(self.c), len(other.c))
        a = list(self.c) + [0] * (n - len(self.c))
        b = list(other.c) + [0] * (n - len(other.c))
        return Poly([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return Poly([-x for x in self.c])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly([x * other for x in self.c])
        if not self.c or not other.c:
            return Poly()
        out = [Fraction(0)] * (len(self.c) + len(other.c) - 1)
        for i, x in enumerate(self.c):
            if x:
                for j, y in enumerate(other.c):
                    out[i + j] += x * y
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, m: int):
        out = Poly([1])
        for _ in range(m):
            out = out * self
        return out

    def divmod(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.c)
        q = [Fraction(0)] * max(len(r) - len(other.c) + 1, 0)
        lead = other.lead()
        while len(r) >= len(other.c) and r:
            k = len(r) - len(other.c)
            f = r[-1] / lead
            q[k] = f
            for i, y in enumerate(other.c):
                r[k + i] -= f * y
            r = _trim(r)
        return Poly(q), Poly(r)

    def monic(self):
        return self * (1 / self.lead()) if self.c else self

    def derivative(self):
        return Poly([i * x for i, x in enumerate(self.c)][1:])

    def __call__(self, t):
        acc = 0
        for x in reversed(self.c):
            acc = acc * t + x
        return acc


def poly_gcd(p: Poly, q: Poly) -> Poly:
    """Monic greatest common divisor (Euclid)."""
    while not q.is_zero():
        p, q = q, p.divmod(q)[1]
    return p.monic() if not p.is_zero() else p


class RationalFunction:
    """Reduced quotient ``num/den`` with monic ``den``."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = num if isinstance(num, Poly) else Poly([num])
        den = Poly([1]) if den is None else (den if isinstance(den, Poly) else Poly([den]))
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        g = poly_gcd(num, den)
        if not g.is_zero() and g.degree > 0:
            num, den = num.divmod(g)[0], den.divmod(g)[0]
        lead = den.lead()
        self.num = num * (1 / lead)
        self.den = den * (1 / lead)

    @classmethod
    def variable(cls):
        return cls(Poly([0, 1]))

    def __repr__(self):
        return f"RationalFunction({self.num!r}, {self.den!r})"

    def __eq__(self, other):
        if not isinstance(other, RationalFunction):
            other = RationalFunction(other)
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def is_zero(self):
        return self.num.is_zero()

    def _lift(self, other):
        return other if isinstance(other, RationalFunction) else RationalFunction(other)

    def __add__(self, other):
        other = self._lift(other)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def reciprocal(self):
        if self.is_zero():
            raise ZeroDivisionError("reciprocal of zero rational function")
        return RationalFunction(self.den, self.num)

    def __truediv__(self, other):
        return self * self._lift(other).reciprocal()

    def __rtruediv__(self, other):
        return self._lift(other) * self.reciprocal()

    def __pow__(self, m: int):
        if m < 0:
            return self.reciprocal() ** (-m)
        return RationalFunction(self.num**m, self.den**m)

    def derivative(self):
        """Quotient rule, reduced."""
        return RationalFunction(
            self.num.derivative() * self.den - self.num * self.den.derivative(), self.den * self.den
        )

    def __call__(self, t):
        return self.num(t) / self.den(t)

    def limit_at_infinity(self):
        """Finite limit as ``t -> oo``; ``None`` if the function grows."""
        if self.num.degree > self.den.degree:
            return None
        if self.num.degree < self.den.degree or self.num.is_zero():
            return Fraction(0)
        return self.num.lead() / self.den.lead()


T = RationalFunction.variable()

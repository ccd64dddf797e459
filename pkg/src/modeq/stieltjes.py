"""The residue systems ``a/x_i + b/(x_i - 1) + sum_{j != i} c/(x_j - x_i) = 0``.

Solutions are certified by their residual at working precision. The monic
polynomial ``P`` with the solution as its roots satisfies

    (c/2) x (x-1) P'' - ((a+b) x - a) P' - mu P = 0,
    mu = (c/2) n (n-1) - (a+b) n,

and, conversely, any such ``P`` with simple roots away from ``{0, 1}`` gives a
solution. :func:`stieltjes_polynomials` builds that polynomial from the
coefficient recurrence and serves as an independent oracle for the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .report import VerificationReport, decimal_string
from .series import context, is_exact_scalar, to_complex, to_fraction

DEDUPE_TOL = 1e-12


class SolverError(ArithmeticError):
    pass


@dataclass(frozen=True)
class AlgebraicSystem:
    a: object
    b: object
    c: object
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 0:
            raise ValueError("n must be a nonnegative integer")
        if self.a == 0 and self.b == 0 and self.c == 0:
            raise ValueError("(a, b, c) must not all vanish")

    def scaled(self, alpha) -> "AlgebraicSystem":
        return AlgebraicSystem(self.a * alpha, self.b * alpha, self.c * alpha, self.n)

    @property
    def is_exact(self):
        return all(is_exact_scalar(v) for v in (self.a, self.b, self.c))

    @property
    def is_positive(self):
        try:
            return all(v > 0 for v in (self.a, self.b, self.c))
        except TypeError:
            return False

    @property
    def has_positive_endpoints(self):
        try:
            return self.a > 0 and self.b > 0 and self.c != 0 and (self.c > 0 or self.c < 0)
        except TypeError:
            return False

    @property
    def is_electrostatic(self):
        """``a, b > 0`` and ``c < 0``: the configuration with a unique ordered solution in ``(0,1)^n``."""
        try:
            return self.a > 0 and self.b > 0 and self.c < 0
        except TypeError:
            return False

    def label(self):
        return f"E^{self.n}_{{{self.a},{self.b},{self.c}}}"


@dataclass
class SolutionSet:
    system: AlgebraicSystem
    points: tuple
    residual_norm: object
    domain_tag: str = "complex"
    prec: int | None = None
    nullity: int = 0
    details: dict = field(default_factory=dict)

    @property
    def is_exact(self):
        return self.prec is None

    def complex_points(self, prec=256):
        return [to_complex(p, prec) for p in self.points]

    def same_as(self, other: "SolutionSet", tol=DEDUPE_TOL) -> bool:
        return _same_points(self.complex_points(), other.complex_points(), tol)

    def to_dict(self, digits: int | None = None) -> dict:
        digits = digits or max(20, int((self.prec or 256) * math.log10(2)))
        pts = []
        for p in self.points:
            if isinstance(p, Fraction):
                pts.append({"re": decimal_string(p, digits), "im": "0", "exact": str(p)})
            else:
                z = to_complex(p, self.prec or 256)
                pts.append({"re": decimal_string(z.real, digits), "im": decimal_string(z.imag, digits)})
        return {
            "a": _param_str(self.system.a),
            "b": _param_str(self.system.b),
            "c": _param_str(self.system.c),
            "n": self.system.n,
            "points": pts,
            "residual": decimal_string(self.residual_norm, digits),
            "domain": self.domain_tag,
            "nullity": self.nullity,
        }


def _param_str(v):
    if is_exact_scalar(v):
        return str(to_fraction(v))
    return decimal_string(v)


def _same_points(xs, ys, tol):
    if len(xs) != len(ys):
        return False
    free = list(ys)
    for x in xs:
        k = min(range(len(free)), key=lambda i: abs(free[i] - x))
        if abs(free[k] - x) > tol:
            return False
        free.pop(k)
    return True


# ---------------------------------------------------------------------------
# residual and Jacobian


def _check_points(x):
    for i, xi in enumerate(x):
        if xi == 0 or xi == 1:
            raise ValueError(f"point x_{i} lies on a singular value (0 or 1)")
        for xj in x[:i]:
            if xi == xj:
                raise ValueError("points must be pairwise distinct")


def residual(sys: AlgebraicSystem, x):
    """The vector ``F_i(x)``; exact when the system and points are exact."""
    x = list(x)
    _check_points(x)
    a, b, c = sys.a, sys.b, sys.c
    out = []
    for i, xi in enumerate(x):
        s = a / xi + b / (xi - 1)
        for j, xj in enumerate(x):
            if j != i:
                s += c / (xj - xi)
        out.append(s)
    return out


def jacobian(sys: AlgebraicSystem, x):
    """``dF_i/dx_i = -a/x_i^2 - b/(x_i-1)^2 + sum c/(x_j-x_i)^2`` and ``dF_i/dx_j = -c/(x_j-x_i)^2``."""
    x = list(x)
    _check_points(x)
    a, b, c = sys.a, sys.b, sys.c
    n = len(x)
    J = [[0] * n for _ in range(n)]
    for i, xi in enumerate(x):
        d = -a / xi**2 - b / (xi - 1) ** 2
        for j, xj in enumerate(x):
            if j != i:
                t = c / (xj - xi) ** 2
                d += t
                J[i][j] = -t
        J[i][i] = d
    return J


def _norm(v):
    return max((abs(t) for t in v), default=0)


def _mp_params(sys, ctx):
    return [ctx.convert(to_complex(v, ctx.prec)) for v in (sys.a, sys.b, sys.c)]


def _mp_system(sys, ctx):
    a, b, c = _mp_params(sys, ctx)
    return AlgebraicSystem(a, b, c, sys.n)


def default_tol(prec):
    return context(prec).mpf(2) ** (-int(prec * 0.85))


# ---------------------------------------------------------------------------
# positive case


def solve_positive(sys: AlgebraicSystem, prec: int = 256, tol=None, max_restarts: int = 8,
                   rng_seed: int = 0) -> SolutionSet:
    """Ordered solution in ``(0,1)^n`` for real ``a, b > 0`` by damped Newton.

    In the orientation of :func:`residual` an ordered solution in the box is
    the electrostatic equilibrium when ``c < 0``. With ``c > 0`` and ``n >= 2``
    the box usually holds no solution and this raises :class:`SolverError`.
    """
    if not sys.has_positive_endpoints:
        raise ValueError("solve_positive needs real a, b > 0 and real c != 0")
    n = sys.n
    if n == 0:
        return SolutionSet(sys, (), 0, "real-unit-interval", None if sys.is_exact else prec)
    if n == 1:
        if sys.is_exact:
            a, b = to_fraction(sys.a), to_fraction(sys.b)
            x = a / (a + b)
            return SolutionSet(sys, (x,), Fraction(0), "real-unit-interval", None)
    ctx = context(prec)
    tol = default_tol(prec) if tol is None else ctx.convert(tol)
    a, b, c = (ctx.convert(to_fraction(v) if is_exact_scalar(v) else v) for v in (sys.a, sys.b, sys.c))
    msys = AlgebraicSystem(a, b, c, n)
    rng = np.random.default_rng(np.random.SeedSequence([rng_seed, n]))
    for attempt in range(max_restarts + 1):
        x0 = [ctx.mpf(i) / (n + 1) for i in range(1, n + 1)]
        if attempt:
            jitter = np.sort(rng.uniform(0.02, 0.98, size=n))
            x0 = [ctx.mpf(float(v)) for v in jitter]
        x = _damped_newton_box(msys, x0, ctx, tol)
        if x is not None:
            r = _norm(residual(msys, x))
            return SolutionSet(sys, tuple(x), r, "real-unit-interval", prec,
                               details={"restarts": attempt})
    raise SolverError(f"no certified solution of {sys.label()} after {max_restarts} restarts")


def _in_box_ordered(x):
    return all(0 < v < 1 for v in x) and all(u < v for u, v in zip(x, x[1:]))


def _damped_newton_box(sys, x, ctx, tol, maxiter=80):
    F = residual(sys, x)
    r = _norm(F)
    for _ in range(maxiter):
        if r <= tol:
            return x
        J = ctx.matrix(jacobian(sys, x))
        try:
            step = ctx.lu_solve(J, ctx.matrix(F))
        except ZeroDivisionError:
            return None
        lam = ctx.mpf(1)
        for _ in range(40):
            new = [x[i] - lam * step[i] for i in range(len(x))]
            if _in_box_ordered(new):
                Fn = residual(sys, new)
                rn = _norm(Fn)
                if rn < r:
                    break
            lam /= 2
        else:
            return None
        x, F, r = new, Fn, rn
    return x if r <= tol else None


# ---------------------------------------------------------------------------
# complex multistart


def _np_residual(a, b, c, x):
    d = x[None, :] - x[:, None]
    np.fill_diagonal(d, 1.0)
    inv = c / d
    np.fill_diagonal(inv, 0.0)
    return a / x + b / (x - 1) + inv.sum(axis=1)


def _np_jacobian(a, b, c, x):
    d = x[None, :] - x[:, None]
    np.fill_diagonal(d, 1.0)
    t = c / d**2
    np.fill_diagonal(t, 0.0)
    J = -t
    J[np.diag_indices_from(J)] = -a / x**2 - b / (x - 1) ** 2 + t.sum(axis=1)
    return J


def _pinv_step(ctx, J, F, n):
    """Minimum-norm Newton step; handles rank-deficient Jacobians on solution curves."""
    U, S, V = ctx.svd_c(ctx.matrix(J))
    smax = max(abs(S[i]) for i in range(n))
    cut = smax * ctx.mpf(2) ** (-ctx.prec // 2)
    Fm = ctx.matrix(F)
    step = ctx.matrix(n, 1)
    for k in range(n):
        if abs(S[k]) > cut:
            coef = sum(ctx.conj(U[i, k]) * Fm[i] for i in range(n)) / S[k]
            for i in range(n):
                step[i] += ctx.conj(V[k, i]) * coef
    return step


def _nullity(ctx, J, n):
    S = ctx.svd_c(ctx.matrix(J), compute_uv=False)
    smax = max(abs(S[i]) for i in range(n))
    return sum(1 for i in range(n) if abs(S[i]) <= smax * ctx.mpf(2) ** (-ctx.prec // 3))


def _np_cleared(a, b, c, x):
    """``G_i = x_i (x_i - 1) F_i``: same finite zeros as ``F`` but no spurious zero at infinity."""
    F = _np_residual(a, b, c, x)
    w = x * (x - 1)
    J = w[:, None] * _np_jacobian(a, b, c, x)
    J[np.diag_indices_from(J)] += (2 * x - 1) * F
    return w * F, J


def _newton_complex(sys, x0, ctx, tol, a, b, c, escape=1e4):
    n = sys.n
    x = np.array(x0, dtype=complex)
    with np.errstate(all="ignore"):
        for _ in range(150):
            G, J = _np_cleared(a, b, c, x)
            r = np.max(np.abs(G))
            if not np.isfinite(r) or np.max(np.abs(x)) > escape:
                return None
            if r < 1e-12 * max(1.0, np.max(np.abs(x)) ** 2):
                break
            step = np.linalg.lstsq(J, G, rcond=1e-12)[0]
            lam = 1.0
            for _ in range(30):
                new = x - lam * step
                Gn = _np_cleared(a, b, c, new)[0]
                if np.all(np.isfinite(Gn)) and np.max(np.abs(Gn)) < r:
                    break
                lam /= 2
            else:
                return None
            x = new
        else:
            return None
    if np.min(np.abs(x)) < 1e-6 or np.min(np.abs(x - 1)) < 1e-6:
        return None
    if n > 1:
        d = np.abs(x[None, :] - x[:, None]) + np.eye(n)
        if np.min(d) < 1e-6:
            return None
    msys = _mp_system(sys, ctx)
    xs = [ctx.mpc(complex(v)) for v in x]
    try:
        for _ in range(12):
            F = residual(msys, xs)
            if _norm(F) <= tol:
                break
            step = _pinv_step(ctx, jacobian(msys, xs), F, n)
            xs = [xs[i] - step[i] for i in range(n)]
        F = residual(msys, xs)
    except (ValueError, ZeroDivisionError):
        return None
    if _norm(F) > tol:
        return None
    return xs, _norm(F), _nullity(ctx, jacobian(msys, xs), n)


def solve_complex_multistart(sys: AlgebraicSystem, tries: int = 64, rng_seed: int = 0,
                             prec: int = 256, tol=None, radius: float = 3.0,
                             dedupe_tol: float = DEDUPE_TOL) -> list[SolutionSet]:
    """All distinct certified solutions reached from random seeds in ``|x| < radius``.

    Seed ``k`` is drawn from ``SeedSequence([rng_seed, k])`` so results do not
    depend on the order tries are run in. A nonzero ``nullity`` marks a point
    on a positive-dimensional solution set (rank-deficient Jacobian).
    """
    ctx = context(prec)
    tol = default_tol(prec) if tol is None else ctx.convert(tol)
    n = sys.n
    if n == 0:
        return [SolutionSet(sys, (), 0, "complex", prec)]
    a, b, c = (complex(to_complex(v, 64)) for v in (sys.a, sys.b, sys.c))
    found: list[SolutionSet] = []
    for k in range(tries):
        rng = np.random.default_rng(np.random.SeedSequence([rng_seed, k]))
        rad = radius * np.sqrt(rng.uniform(0, 1, n))
        ang = rng.uniform(0, 2 * np.pi, n)
        out = _newton_complex(sys, rad * np.exp(1j * ang), ctx, tol, a, b, c)
        if out is None:
            continue
        xs, r, nullity = out
        xs = sorted(xs, key=lambda z: (float(z.real), float(z.imag)))
        cand = SolutionSet(sys, tuple(xs), r, _tag(xs, ctx), prec, nullity, {"try": k})
        if not any(cand.same_as(s, dedupe_tol) for s in found):
            found.append(cand)
    if not found:
        raise SolverError(f"no solution of {sys.label()} found in {tries} tries")
    return found


def _tag(xs, ctx):
    eps = ctx.mpf(2) ** (-ctx.prec // 2)
    if all(abs(z.imag) <= eps and 0 < z.real < 1 for z in xs):
        return "real-unit-interval"
    return "complex"


def solve(sys: AlgebraicSystem, prec: int = 256, tries: int = 64, rng_seed: int = 0) -> list[SolutionSet]:
    """Positive systems go through :func:`solve_positive`, everything else through multistart.

    Exact ``n = 1`` systems with ``a + b != 0`` are solved in closed form.
    """
    if sys.is_electrostatic or (sys.is_positive and sys.n <= 1):
        return [solve_positive(sys, prec, rng_seed=rng_seed)]
    if sys.n == 1 and sys.is_exact:
        a, b = to_fraction(sys.a), to_fraction(sys.b)
        if a + b != 0:
            x = a / (a + b)
            if x not in (0, 1):
                return [SolutionSet(sys, (x,), Fraction(0), "real-unit-interval" if 0 < x < 1 else "complex")]
    return solve_complex_multistart(sys, tries, rng_seed, prec)


# ---------------------------------------------------------------------------
# polynomials


def to_polynomial(sol: SolutionSet) -> list:
    """Monic coefficients, highest degree first, of ``prod (x - x_i)``."""
    coeffs = [Fraction(1) if sol.is_exact else 1]
    for p in sol.points:
        nxt = coeffs + [0]
        for i, c in enumerate(coeffs):
            nxt[i + 1] -= c * p
        coeffs = nxt
    return coeffs


def stieltjes_polynomials(sys: AlgebraicSystem):
    """Monic degree-``n`` solutions of the second-order equation in the module docstring.

    Returns ``(particular, kernel)``: coefficient lists (highest degree first)
    of one solution and a basis of the homogeneous directions. The kernel is
    nonempty exactly when the recurrence degenerates, in which case the
    residue system has a continuum of solutions. Exact input only.
    """
    a, b, c = (to_fraction(v) for v in (sys.a, sys.b, sys.c))
    n = sys.n
    half = c / 2
    mu = half * n * (n - 1) - (a + b) * n
    # unknowns p_0..p_{n-1} with p_n = 1; row k: p_k*den_k - (k+1)*num_k*p_{k+1} = 0
    rows = []
    for k in range(n):
        row = [Fraction(0)] * (n + 1)
        row[k] = half * k * (k - 1) - (a + b) * k - mu
        coef = -(k + 1) * (half * k - a)
        if k + 1 < n:
            row[k + 1] = coef
        else:
            row[n] = -coef
        rows.append(row)
    sol, kernel = _solve_rational(rows, n)
    if sol is None:
        return None, []
    to_list = lambda v, lead: [lead] + [v[k] for k in range(n - 1, -1, -1)]
    return to_list(sol, Fraction(1)), [to_list(v, Fraction(0)) for v in kernel]


def _solve_rational(rows, n):
    """Gauss-Jordan over Fractions for an augmented ``n x (n+1)`` system."""
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, n) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][col]
        m[r] = [v / p for v in m[r]]
        for i in range(n):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [vi - f * vr for vi, vr in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    for i in range(r, n):
        if m[i][n] != 0:
            return None, []
    sol = [Fraction(0)] * n
    for i, col in enumerate(pivots):
        sol[col] = m[i][n]
    kernel = []
    for free in (c for c in range(n) if c not in pivots):
        v = [Fraction(0)] * n
        v[free] = Fraction(1)
        for i, col in enumerate(pivots):
            v[col] = -m[i][free]
        kernel.append(v)
    return sol, kernel


def ode_defect(sys: AlgebraicSystem, coeffs, prec: int = 256):
    """Max coefficient of the second-order operator applied to ``P`` (highest degree first)."""
    ctx = context(prec)
    a, b, c = _mp_params(sys, ctx)
    n = len(coeffs) - 1
    mu = c / 2 * n * (n - 1) - (a + b) * n
    p = [to_complex(v, prec) for v in reversed(coeffs)]  # p[k] = coeff of x^k
    out = []
    for k in range(n + 1):
        nxt = p[k + 1] if k + 1 <= n else 0
        val = (c / 2) * (k * (k - 1) * p[k] - (k + 1) * k * nxt) - (a + b) * k * p[k] \
            + a * (k + 1) * nxt - mu * p[k]
        out.append(abs(val))
    return max(out)


# ---------------------------------------------------------------------------
# scaling


def scale_equivalence_check(sol: SolutionSet, alpha, tol=None) -> VerificationReport:
    """The points of ``sol`` also solve the system scaled by ``alpha``."""
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    sys = sol.system
    scaled = sys.scaled(alpha)
    if sol.is_exact and scaled.is_exact:
        r = _norm(residual(scaled, sol.points))
        bound = abs(alpha) * sol.residual_norm
        tol_used = bound
    else:
        prec = sol.prec or 256
        ctx = context(prec)
        r = _norm(residual(_mp_system(scaled, ctx), sol.complex_points(prec)))
        base = default_tol(prec) if tol is None else ctx.convert(tol)
        tol_used = abs(to_complex(alpha, prec)) * max(base, sol.residual_norm)
        bound = tol_used
    return VerificationReport(
        f"scale equivalence {sys.label()} -> {scaled.label()}", 0, r, bool(r <= bound),
        tolerance=tol_used, tolerance_source="|alpha| x certification tolerance",
        details={"alpha": alpha if is_exact_scalar(alpha) else to_complex(alpha, 64)},
    )

"""Verification reports shared by every check in the package."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath


def decimal_string(x, digits: int = 30) -> str:
    """Render a real/rational/complex magnitude as a decimal string without binary floats."""
    if isinstance(x, Fraction) or isinstance(x, int):
        if Fraction(x).denominator == 1:
            return str(int(x))
        x = Fraction(x)
        v = mpmath.libmp.mpf_div(mpmath.libmp.from_int(x.numerator), mpmath.libmp.from_int(x.denominator), 4 * digits)
        return mpmath.libmp.to_str(v, digits)
    if hasattr(x, "_mpc_") or isinstance(x, complex):
        x = abs(x)
    if hasattr(x, "_mpf_"):
        return mpmath.libmp.to_str(x._mpf_, digits)
    return repr(x)


@dataclass
class VerificationReport:
    """Outcome of one named check.

    ``max_deviation`` is exact (``Fraction``) for rational checks and an
    mpmath real otherwise. ``details`` must stay JSON-serializable after
    :func:`_jsonable` conversion.
    """

    check: str
    order: int
    max_deviation: object
    passed: bool
    tolerance: object = 0
    tolerance_source: str = "exact equality"
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        details = dict(self.details)
        details.setdefault("tolerance", decimal_string(self.tolerance))
        details.setdefault("tolerance_source", self.tolerance_source)
        return {
            "check": self.check,
            "order": int(self.order),
            "max_deviation": decimal_string(self.max_deviation),
            "pass": bool(self.passed),
            "details": _jsonable(details),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    def __bool__(self):
        return bool(self.passed)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if hasattr(obj, "_mpc_") or isinstance(obj, complex):
        return {"re": decimal_string(obj.real), "im": decimal_string(obj.imag)}
    if isinstance(obj, VerificationReport):
        return obj.to_dict()
    return decimal_string(obj)

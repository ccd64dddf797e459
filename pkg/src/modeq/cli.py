"""Batch command line: every suite prints a JSON document.

Exit codes: 0 all checks pass, 1 a check failed (or no solution was found),
2 invalid configuration or parameters.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from . import constructions, evaluate, stieltjes
from .report import decimal_string

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    precision_bits: int = 256
    order: int = 60
    tol: str = "1e-20"
    rng_seed: int = 0
    output: str | None = None

    def __post_init__(self):
        if self.precision_bits < 128:
            raise ConfigError("--prec-bits must be at least 128")
        if self.order < 1:
            raise ConfigError("--order must be positive")
        if self.rng_seed < 0:
            raise ConfigError("--seed must be nonnegative")
        try:
            v = Decimal(self.tol)
        except InvalidOperation:
            raise ConfigError(f"--tol {self.tol!r} is not a decimal number") from None
        if not v.is_finite() or v <= 0:
            raise ConfigError("--tol must be a positive number")

    @property
    def tol_value(self):
        return evaluate.context(self.precision_bits).mpf(self.tol)


def _number(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{s!r} is not a rational number") from None


def _bundle(command: str, reports) -> dict:
    reports = list(reports)
    return {
        "command": command,
        "pass": all(r.passed for r in reports),
        "failed": [r.check for r in reports if not r.passed],
        "reports": [r.to_dict() for r in reports],
    }


def cmd_special_values(cfg: RunConfig):
    rep = evaluate.special_value_report(cfg.precision_bits, cfg.order, cfg.tol_value)
    return _bundle("special-values", [rep])


def cmd_solve(a, b, c, n, cfg: RunConfig):
    try:
        system = stieltjes.AlgebraicSystem(a, b, c, n)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    doc = {"command": "solve", "system": system.label()}
    try:
        sols = stieltjes.solve(system, cfg.precision_bits, rng_seed=cfg.rng_seed)
    except stieltjes.SolverError as e:
        doc.update({"pass": False, "error": str(e), "solutions": []})
        return doc
    digits = int(cfg.precision_bits * 0.30103)
    doc.update({"pass": True, "solutions": [s.to_dict(digits) for s in sols]})
    return doc


def cmd_verify(alpha, n, cfg: RunConfig):
    try:
        constructions.class_r(alpha, n)
        constructions.class_system(alpha, n)
    except constructions.ConstructionError as e:
        raise ConfigError(str(e)) from None
    if n < 0:
        raise ConfigError("n must be nonnegative")
    reports = constructions.verify_class(alpha, n, cfg.precision_bits, cfg.order, cfg.tol_value,
                                         rng_seed=cfg.rng_seed)
    return _bundle(f"verify alpha={alpha} n={n}", reports)


def cmd_level2(n, variant, cfg: RunConfig):
    if n < 1 or n % 2 == 0:
        raise ConfigError("level-2 constructions need odd positive n")
    reports = constructions.verify_level2(n, variant, cfg.precision_bits, cfg.order, cfg.tol_value,
                                          rng_seed=cfg.rng_seed)
    return _bundle(f"level2 n={n} variant={variant}", reports)


def cmd_enumerate(m, n):
    try:
        data = constructions.enumerate_ab(m, n)
    except constructions.ConstructionError as e:
        raise ConfigError(str(e)) from None
    doc = data.to_dict()
    doc["command"] = "enumerate"
    doc["pass"] = all(a + n * b == data.degree and 2 * data.degree - 2 == (n - 1) * data.nu_inf
                      for a, b in data.pairs)
    return doc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prec-bits", type=int, default=256, dest="prec_bits")
    common.add_argument("--order", type=int, default=60)
    common.add_argument("--tol", default="1e-20")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="write JSON here instead of stdout")
    common.add_argument("--json", action=argparse.BooleanOptionalAction, default=True,
                        help="JSON output (the only format)")

    p = argparse.ArgumentParser(prog="modeq", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("special-values", parents=[common])
    s = sub.add_parser("solve", parents=[common])
    for name in "abc":
        s.add_argument(name)
    s.add_argument("n", type=int)
    v = sub.add_parser("verify", parents=[common])
    v.add_argument("--class", dest="alpha", type=int, required=True, choices=[1, 5, 7, 11])
    v.add_argument("--n", type=int, required=True)
    l2 = sub.add_parser("level2", parents=[common])
    l2.add_argument("--n", type=int, required=True)
    l2.add_argument("--variant", required=True, choices=list(constructions.LEVEL2_VARIANTS))
    e = sub.add_parser("enumerate", parents=[common])
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--n", type=int, required=True)
    return p


def _emit(doc, out):
    text = json.dumps(doc, sort_keys=True, indent=2, default=decimal_string) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    try:
        if not args.json:
            raise ConfigError("only JSON output is supported")
        cfg = RunConfig(args.prec_bits, args.order, args.tol, args.seed, args.out)
        if args.command == "special-values":
            doc = cmd_special_values(cfg)
        elif args.command == "solve":
            doc = cmd_solve(_number(args.a), _number(args.b), _number(args.c), args.n, cfg)
        elif args.command == "verify":
            doc = cmd_verify(args.alpha, args.n, cfg)
        elif args.command == "level2":
            doc = cmd_level2(args.n, args.variant, cfg)
        else:
            doc = cmd_enumerate(args.m, args.n)
    except ConfigError as e:
        sys.stderr.write(json.dumps({"error": str(e)}) + "\n")
        return EXIT_CONFIG
    _emit(doc, args.out)
    return EXIT_OK if doc["pass"] else EXIT_FAIL


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()

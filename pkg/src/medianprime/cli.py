"""Command-line front end: ``medianprime <command> ...``.

Exit codes: 0 success, 1 failed self-check or sieve failure, 2 usage or
domain error, 3 numeric budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings

import numpy as np

from . import exact as ex
from . import products as pr
from . import saddle as sd
from . import series as se
from . import specfun as sf
from .primes import ENV_TABLE, PrimeTableError

EXACT_CEILING = 10**10

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _real(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _grid(text: str) -> list[float]:
    vals = [_real(t) for t in text.split(",") if t.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("empty grid")
    return vals


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _csv(rows: list[dict]) -> str:
    return sd.comparison_csv(rows)


# --------------------------------------------------------------------------
# commands


def cmd_exact(a) -> int:
    if a.x < 2:
        raise UsageError("exact needs x >= 2")
    if a.x > EXACT_CEILING:
        raise UsageError(f"x above the enumeration ceiling {EXACT_CEILING:g}")
    rep = ex.exact_sum(a.x, a.mode, workers=a.threads)
    if a.out == "json":
        _emit(rep.to_json(), a.output)
    else:
        row = {"x": rep.x, "mode": rep.mode.value, "total": rep.total, "odd_part": rep.odd_part, "even_part": rep.even_part}
        _emit(_csv([row]), a.output)
    return EXIT_OK


def _compare_rows(a) -> list[dict]:
    rows = []
    mode = ex.MiddleMode.parse(a.mode)
    for x in a.grid:
        if not 16 <= x <= EXACT_CEILING:
            raise UsageError(f"grid value {x:g} outside [16, {EXACT_CEILING:g}]")
        exact = ex.exact_sum(x, mode, workers=a.threads).total
        if mode is ex.MiddleMode.BIGOMEGA:
            asym = sd.s_Omega_expansion(x, a.J)
            ratio = exact / asym
            rows.append(
                {
                    "x": x,
                    "exact": exact,
                    "asymptotic": asym,
                    "J": a.J,
                    "ratio": ratio,
                    "scaled_deviation": (ratio - 1) * math.log(x) ** (1 / 6),
                }
            )
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                main = sd.s_omega_main_term(x)
            xi = math.log(math.log(x))
            st = sd.solve_rho(xi)
            rows.append(
                {"x": x, "xi": xi, "rho": st.rho, "nu": st.nu, "main_term": main, "exact": exact, "ratio": exact / main}
            )
    return rows


def cmd_compare(a) -> int:
    rows = _compare_rows(a)
    _emit(_csv(rows) if a.out == "csv" else json.dumps(rows), a.output)
    return EXIT_OK


def cmd_constants(a) -> int:
    if a.j < 1:
        raise UsageError("j >= 1")
    rep = pr.constant_c(a.j, tol=a.tol, P=a.prime_cutoff)
    if a.out == "json":
        _emit(rep.to_json(), a.output)
    else:
        row = {"j": rep.j, "c_j": rep.value, "abs_tail": rep.abs_tail, "prime_cutoff": rep.prime_cutoff}
        _emit(_csv([row]), a.output)
    return EXIT_OK


def cmd_poly(a) -> int:
    if not 0 <= a.j <= se.J_MAX:
        raise UsageError(f"j must be in [0, {se.J_MAX}]")
    fam = se.cascade_R(se.J_MAX) if a.family == "R" else se.cascade_P(se.J_MAX, corrected=not a.literal)
    _emit(fam.to_json(a.j), a.output)
    return EXIT_OK


def cmd_rho(a) -> int:
    if (a.x is None) == (a.xi is None):
        raise UsageError("give exactly one of --x and --xi")
    xi = a.xi if a.xi is not None else math.log(math.log(a.x))
    if a.x is not None and a.x <= math.e:
        raise UsageError("need x > e")
    st = sd.solve_rho(xi, a.tol)
    if a.out == "json":
        _emit(st.to_json(), a.output)
    else:
        row = {"x": st.x, "xi": st.xi, "rho": st.rho, "nu": st.nu, "mu": st.mu, "psi_at_rho": st.psi_at_rho}
        _emit(_csv([row]), a.output)
    return EXIT_OK


def _specfun_checks() -> list[dict]:
    """Identities that need no outside reference."""
    checks = []

    def add(name, got, want, tol):
        err = abs(got - want) / max(1.0, abs(want))
        checks.append({"check": name, "value": got, "expected": want, "rel_error": err, "ok": bool(err <= tol)})

    add("gamma(1/2)^2 = pi", (sf.gamma_complex(0.5) ** 2).real, math.pi, 1e-13)
    z = complex(3.3, -1.7)
    add("gamma(z+1) = z gamma(z)", abs(sf.gamma_complex(z + 1) - z * sf.gamma_complex(z)), 0.0, 1e-12)
    add("zeta(2) = pi^2/6", sf.zeta_even(2), math.pi**2 / 6, 1e-15)
    add("li(10^6) tabulated", sf.li(1e6), 78627.549159462181919862910747, 1e-13)
    add("li(2) tabulated", sf.li(2.0), 1.0451637801174927848445888891946, 1e-13)
    # one point on each side of the switch from power series to asymptotic expansion
    add("Ei(39) tabulated", float(sf.ei(39.0)), 2280446200301902.59534081671444, 1e-13)
    add("Ei(41) tabulated", float(sf.ei(41.0)), 16006649143245041.1106997054501, 1e-13)
    add("quad of exp on [0, 1]", sf.quad(np.exp, 0.0, 1.0).value, math.e - 1, 1e-14)
    return checks


def cmd_specfun_check(a) -> int:
    checks = _specfun_checks()
    _emit(_csv(checks) if a.out == "csv" else json.dumps(checks), a.output)
    return EXIT_OK if all(c["ok"] for c in checks) else EXIT_FAIL


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="medianprime", description="Sums of reciprocals of middle prime factors.")
    p.add_argument("--prime-table", help=f"prime table file (overrides ${ENV_TABLE})")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt="json"):
        sp.add_argument("--out", choices=("json", "csv"), default=fmt)
        sp.add_argument("--output", help="write here instead of stdout")
        return sp

    s = common(sub.add_parser("exact", help="exact S_nu(x) by sieving"))
    s.add_argument("--x", type=_real, required=True)
    s.add_argument("--mode", choices=("omega", "bigomega"), default="omega")
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_exact)

    s = common(sub.add_parser("compare", help="exact versus asymptotic on a grid of x"), "csv")
    s.add_argument("--grid", type=_grid, required=True, help="comma separated x values")
    s.add_argument("--mode", choices=("omega", "bigomega"), default="bigomega")
    s.add_argument("--J", type=int, default=1)
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_compare)

    s = common(sub.add_parser("constants", help="the constants c_j"))
    s.add_argument("--j", type=int, required=True)
    s.add_argument("--tol", type=_real, default=1e-6)
    s.add_argument("--prime-cutoff", type=int, default=10**8)
    s.set_defaults(func=cmd_constants)

    s = common(sub.add_parser("poly", help="R_j or P_j coefficients"))
    s.add_argument("--family", choices=("R", "P"), required=True)
    s.add_argument("--j", type=int, required=True)
    s.add_argument("--literal", action="store_true", help="P from the literal a_m closed form")
    s.set_defaults(func=cmd_poly)

    s = common(sub.add_parser("rho", help="solve for the saddle parameter"))
    s.add_argument("--x", type=_real)
    s.add_argument("--xi", type=_real)
    s.add_argument("--tol", type=_real, default=1e-12)
    s.set_defaults(func=cmd_rho)

    s = common(sub.add_parser("specfun-check", help="self-checks of the special functions"))
    s.set_defaults(func=cmd_specfun_check)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    if a.prime_table:
        os.environ[ENV_TABLE] = a.prime_table
    if getattr(a, "tol", 1.0) <= 0:
        parser.error("tol must be positive")
    if getattr(a, "threads", 1) < 1:
        parser.error("threads must be at least 1")
    try:
        return a.func(a)
    except (UsageError, ValueError) as e:
        print(f"medianprime: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (pr.BudgetError, ex.TruncationError, PrimeTableError) as e:
        print(f"medianprime: budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (ex.SieveError, sd.SolverError) as e:
        print(f"medianprime: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

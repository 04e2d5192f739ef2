"""Euler products over primes and the constants built from them.

Infinite products are summed in log space up to a prime cutoff P, and the
remaining tail is bounded explicitly.  Prime counting bounds used for the
tails:

* pi(t) < 1.25506 t / log t for t > 1 (Rosser-Schoenfeld),
* pi(t) > t / log t (1 + 1/log t) for t >= 599 (Dusart),
* pi(t) < t / log t (1 + 1/log t + 2.51 / log^2 t) for t >= 355991 (Dusart),
* |sum_{q<=t} 1/q - log log t - B| < 1 / (2 log^2 t) for t > 286.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exact import MiddleMode
from .primes import nth_prime, primes_upto
from .specfun import PoleError, gamma_complex, quad

ProductMode = MiddleMode

# sum over all primes of p^-2
PRIME_ZETA_2 = 0.45224742004106549850654336483224793417323134323989
RS_PI_UPPER = 1.25506
PRIME_BUDGET = 4 * 10**8
_CUTOFFS = (10**3, 10**4, 10**5, 10**6, 10**7, 10**8, PRIME_BUDGET)


class BudgetError(RuntimeError):
    """A requested tolerance needs more primes than the budget allows."""

    def __init__(self, message: str, required_cutoff: float | None = None):
        super().__init__(message)
        self.required_cutoff = required_cutoff


@dataclass(frozen=True)
class TailBound:
    value: complex
    abs_tail: float
    prime_cutoff: int | None = None

    def __post_init__(self):
        if not (self.abs_tail >= 0 and math.isfinite(self.abs_tail)):
            raise ValueError(f"abs_tail must be finite and >= 0, got {self.abs_tail}")


def _is_prime_int(z: complex, y: float) -> int | None:
    z = complex(z)
    if z.imag != 0 or z.real != math.floor(z.real) or not 2 <= z.real <= y:
        return None
    q = int(z.real)
    ps = primes_upto(q)
    return q if ps.size and ps[-1] == q else None


def F_finite(y: float, z: complex, mode: ProductMode | str, exclude: bool = True) -> complex:
    """prod_{q<=y} (1 + z/(q-1)) for omega, prod_{q<=y, q!=z} (1 - z/q) for Omega.

    The Omega exclusion only triggers when z is exactly a prime <= y;
    ``exclude=False`` turns it off (the plain product, which then vanishes).
    """
    mode = ProductMode.parse(mode)
    if y < 2:
        raise ValueError("y >= 2")
    q = primes_upto(y).astype(float)
    z = complex(z)
    if mode is ProductMode.OMEGA:
        fac = 1 + z / (q - 1)
    else:
        skip = _is_prime_int(z, y) if exclude else None
        if skip is not None:
            q = q[q != skip]
        fac = 1 - z / q
    out = complex(np.prod(fac))
    return out


def _log_factor_terms(q: np.ndarray, z: complex, mode: ProductMode) -> np.ndarray:
    if mode is ProductMode.OMEGA:
        return np.log1p(z / (q - 1)) + z * np.log1p(-1 / q)
    return -np.log1p(-z / q) + z * np.log1p(-1 / q)


def _csum(a: np.ndarray) -> complex:
    return complex(math.fsum(a.real.tolist()), math.fsum(np.imag(a).tolist()))


def _sum_q3_tail(P: float) -> float:
    """Upper bound for sum_{q>P} q^-3 by partial summation."""
    return 3 * RS_PI_UPPER / (2 * P**2 * math.log(P))


def _script_F_at(z: complex, mode: ProductMode, P: int) -> TailBound:
    q = primes_upto(P).astype(float)
    terms = _log_factor_terms(q, z, mode)
    # the 1/q^2 part of every factor beyond P is summed exactly through P(2)
    c2 = z * (1 - z) / 2 if mode is ProductMode.OMEGA else z * (z - 1) / 2
    rest_q2 = PRIME_ZETA_2 - math.fsum((1 / q**2).tolist())
    logval = _csum(terms) + c2 * rest_q2
    az = abs(z)
    K = 1.5 * az + 1.2 * az**2 + 0.5 * az**3 if mode is ProductMode.OMEGA else 0.5 * (az + az**3)
    rounding = 8 * 2.0**-52 * (float(np.sum(np.abs(terms))) + abs(c2) * 0.46)
    T = K * _sum_q3_tail(P) + rounding
    val = cmath.exp(logval)
    return TailBound(val, abs(val) * math.expm1(T), P)


def script_F(z: complex, mode: ProductMode | str, tol: float = 1e-12) -> TailBound:
    """The compensated infinite product with certified truncation error."""
    mode = ProductMode.parse(mode)
    z = complex(z)
    if abs(z) >= 2:
        raise ValueError("need |z| < 2")
    if tol <= 0:
        raise ValueError("tol > 0")
    if z == 0 or (mode is ProductMode.OMEGA and z == 1):
        # every factor is exactly 1
        return TailBound(1 + 0j, 0.0, 0)
    return _script_F_cached(z, mode, tol)


@lru_cache(maxsize=256)
def _script_F_cached(z: complex, mode: ProductMode, tol: float) -> TailBound:
    last = None
    for P in _CUTOFFS:
        last = _script_F_at(z, mode, P)
        if last.abs_tail <= tol:
            return last
    raise BudgetError(f"script_F({z}) needs a prime cutoff beyond {PRIME_BUDGET}", PRIME_BUDGET * 10)


def g_small(y: float, z: complex, mode: ProductMode | str, tol: float = 1e-12) -> complex:
    mode = ProductMode.parse(mode)
    z = complex(z)
    frak = script_F(z, mode, tol).value
    if mode is ProductMode.OMEGA:
        den = F_finite(y, z, mode)
        if den == 0:
            raise PoleError(f"F_omega({y}, {z}) vanishes")
        return frak / den
    if z == y:
        raise PoleError(f"g_Omega has a pole at z = y = {y}")
    return frak * F_finite(y, z, mode) / (1 - z / y)


def script_G_Omega(y: float, z: complex, tol: float = 1e-12) -> complex:
    z = complex(z)
    # residues at 1/P_j for j >= 2 sit inside |z| < 1/2, so only 0 < |z| < 2 is required
    if not 0 < abs(z) < 2:
        raise ValueError("need 0 < |z| < 2")
    for p in primes_upto(y):
        if abs(z * int(p) - 1) <= 1e-13:
            raise PoleError(f"script_G_Omega has a pole at z = 1/{int(p)}")
    den = gamma_complex(1 + z) * F_finite(y, 1 / z, ProductMode.BIGOMEGA, exclude=False)
    return g_small(y, z, ProductMode.BIGOMEGA, tol) / den


def residue_G_Omega(p: int, j: int, tol: float = 1e-12) -> float:
    """Residue of script_G_Omega(p, .) at z = 1/P_j (P_j the j-th prime).

    The z-derivative of prod_q (1 - 1/(z q)) is taken by the product rule
    as an explicit sum over factors; only the vanishing factor's term is
    nonzero at the pole.
    """
    pj = nth_prime(j)
    if pj > p:
        raise ValueError(f"the {j}-th prime {pj} exceeds p = {p}: no pole")
    q = primes_upto(p).astype(float)
    f = 1 - pj / q  # factors of F(p, 1/z) at z = 1/pj
    d = pj**2 / q  # their z-derivatives, 1/(z^2 q)
    pre = np.concatenate(([1.0], np.cumprod(f)[:-1]))
    suf = np.concatenate((np.cumprod(f[::-1])[::-1][1:], [1.0]))
    deriv = math.fsum((d * pre * suf).tolist())
    z0 = 1 / pj
    g = g_small(p, z0, ProductMode.BIGOMEGA, tol)
    return (g / (gamma_complex(1 + z0) * deriv)).real


def residue_terms(P: int, j: int, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """(p, residue_G_Omega(p, j)) for every prime P_j <= p <= P in one sweep.

    Uses the running product-rule recurrence D_n = D_{n-1} f_n + d_n F_{n-1}.
    """
    pj = nth_prime(j)
    q = primes_upto(P).astype(float)
    f = 1 - pj / q
    d = pj**2 / q
    F = np.cumprod(f)
    Fprev = np.concatenate(([1.0], F[:-1]))
    D = np.empty_like(q)
    acc = 0.0
    for n in range(q.size):
        acc = acc * f[n] + d[n] * Fprev[n]
        D[n] = acc
    frak = script_F(1 / pj, ProductMode.BIGOMEGA, tol).value.real
    # g_Omega(p, 1/pj) = frak * F_Omega(p, 1/pj) / (1 - 1/(pj p))
    logF = np.cumsum(np.log1p(-1 / (pj * q)))
    g = frak * np.exp(logF) / (1 - 1 / (pj * q))
    res = g / (gamma_complex(1 + 1 / pj).real * D)
    keep = q >= pj
    return q[keep].astype(np.int64), res[keep]


# --------------------------------------------------------------------------
# the constants c_j


def _pi_lower(t: float) -> float:
    L = math.log(t)
    return t / L * (1 + 1 / L) if t >= 599 else t / L


def _pi_upper(t: float) -> float:
    L = math.log(t)
    return t / L * (1 + 1 / L + 2.51 / L**2) if t >= 355991 else RS_PI_UPPER * t / L


def _prime_sum_bounds(P: float, kappa: float) -> tuple[float, float]:
    """Bounds on sum_{q>P} (log q)^kappa / q^2 and on sum_{q>P} 1/q^2 from below.

    Returns (lower bound of sum 1/q^2, upper bound of sum (log q/log P)^kappa / q^2).
    """
    LP = math.log(P)

    def upper_integrand(u):
        t = np.exp(u)
        # -d/dt[(log t)^k t^-2] * pi_upper(t) dt, with dt = t du
        w = (2 * (u / LP) ** kappa - kappa * (u / LP) ** kappa / u) / t**2
        Lu = u
        piu = t / Lu * (1 + 1 / Lu + 2.51 / Lu**2) if P >= 355991 else RS_PI_UPPER * t / Lu
        return w * piu

    def lower_integrand(u):
        t = np.exp(u)
        w = 2 / t**2
        pil = t / u * (1 + 1 / u) if P >= 599 else t / u
        return w * pil

    span = (LP, LP + 60.0)
    hi = quad(upper_integrand, *span, rtol=1e-10).value - _pi_lower(P) / P**2
    lo = quad(lower_integrand, *span, rtol=1e-10).value - _pi_upper(P) / P**2
    return max(lo, 0.0), hi * (1 + 1e-9)


@dataclass(frozen=True)
class ConstantReport:
    j: int
    value: float
    abs_tail: float
    prime_cutoff: int
    confirm_delta: float  # |c(P) - c(P/2)|

    @property
    def bound(self) -> TailBound:
        return TailBound(self.value, self.abs_tail, self.prime_cutoff)

    def to_json(self) -> str:
        return json.dumps(
            {"j": self.j, "c_j": self.value, "abs_tail": self.abs_tail, "prime_cutoff": self.prime_cutoff}
        )


def _c_prefactor(pj: int, tol: float) -> tuple[float, float]:
    fr = script_F(1 / pj, ProductMode.BIGOMEGA, tol)
    g = gamma_complex(1 / pj).real
    return 3 * fr.value.real / g, 3 * fr.abs_tail / g


def c_partial_and_tail(j: int, P: int) -> tuple[float, float, float, float]:
    """(partial sum over P_j <= p <= P, tail lower, tail upper, rounding slack), without the prefactor."""
    pj = nth_prime(j)
    q = primes_upto(P)
    q = q[q >= pj].astype(np.longdouble)
    qf = q.astype(float)
    # F(p, 1/pj) and |F(p, pj)| (q = pj excluded), both over primes <= p
    small = primes_upto(pj - 1).astype(np.longdouble)
    log_a0 = np.sum(np.log1p(-1 / (pj * small))) if small.size else np.longdouble(0)
    log_b0 = np.sum(np.log(np.abs(1 - pj / small))) if small.size else np.longdouble(0)
    sign0 = (-1) ** (j - 1)  # factors 1 - pj/q < 0 exactly for q < pj
    la = np.log1p(-1 / (pj * q))
    with np.errstate(divide="ignore"):
        lb = np.log1p(-pj / q)
    lb[0] = 0  # the excluded factor q = pj
    log_ratio = log_a0 - log_b0 + np.cumsum(la) - np.cumsum(lb)
    terms = np.exp(log_ratio) / (q * (q - np.longdouble(1) / pj))
    partial = sign0 * float(np.sum(terms))
    rounding = 1e-15 * float(np.sum(np.abs(terms))) + float(terms.size) * 2.0**-63 * abs(partial)

    # tail: ratio r(p) grows at most like (log p / log P)^kappa e^eps beyond P
    kappa = pj - 1 / pj
    r_P = float(np.exp(log_ratio[-1]))
    LP = math.log(P)
    eps2 = pj**2 / (2 * (1 - pj / P)) * RS_PI_UPPER / (P * LP)
    eps = kappa / LP**2 + eps2
    lo_q2, hi_k = _prime_sum_bounds(P, kappa)
    tail_hi = r_P * math.exp(eps) * hi_k / (1 - 1 / (pj * P))
    tail_lo = r_P * lo_q2
    return partial, sign0 * tail_lo, sign0 * tail_hi, rounding


def constant_c(j: int, tol: float = 1e-6, P: int = 10**8) -> ConstantReport:
    """c_j with a certified bound; also recomputed at P/2 as a consistency check."""
    if j < 1:
        raise ValueError("j >= 1")
    pj = nth_prime(j)
    if P < max(2 * pj, 10**3):
        raise ValueError("prime cutoff too small")
    pre, pre_err = _c_prefactor(pj, min(tol, 1e-10) / 10)

    def at(cut):
        s, lo, hi, rnd = c_partial_and_tail(j, cut)
        mid = s + (lo + hi) / 2
        half = abs(hi - lo) / 2 + rnd
        return pre * mid, abs(pre) * half + pre_err * abs(mid)

    v, e = at(P)
    v2, e2 = at(P // 2)
    delta = abs(v - v2)
    if delta > e + e2:
        raise BudgetError(f"c_{j}: P and P/2 disagree by {delta:.3g} beyond bounds {e + e2:.3g}")
    if e > tol:
        raise BudgetError(f"c_{j}: certified tail {e:.3g} > tol {tol:g} at P = {P}", P * 10)
    return ConstantReport(j, float(v), float(e), int(P), float(delta))


def residue_sum(j: int, P: int) -> float:
    """3 sum_{P_j <= p <= P} residue(p, j) / p^2."""
    p, res = residue_terms(P, j)
    return 3 * math.fsum((res / p.astype(float) ** 2).tolist())


def c_tail_after(j: int, P: int) -> float:
    """Certified bound on |c_j - (partial sum through P)|, prefactor included."""
    pj = nth_prime(j)
    pre, _ = _c_prefactor(pj, 1e-12)
    _, lo, hi, rnd = c_partial_and_tail(j, P)
    return abs(pre) * (max(abs(lo), abs(hi)) + rnd)


# --------------------------------------------------------------------------


def lambda_omega_coeffs(p: int, k_max: int) -> list[float]:
    """[z^k] prod_{q<=p} (1 + z/(q-1)) for 0 <= k <= k_max."""
    q = primes_upto(p)
    if k_max < 0:
        raise ValueError("k_max >= 0")
    coeffs = np.zeros(k_max + 1)
    coeffs[0] = 1.0
    for qq in q:
        w = 1.0 / (int(qq) - 1)
        coeffs[1:] = coeffs[1:] + w * coeffs[:-1]
    return coeffs.tolist()

"""The saddle parameter rho_x and the asymptotic evaluators built on it.

xi = log log x is the primary parameter: most functions take ``xi``
directly, because the interesting regimes (xi in the hundreds or more) have
no representable x.

Sums over primes q < e^v are exact while e^v stays inside the prime table.
Beyond that, ``psi_hybrid`` and ``log_F_omega`` keep the exact sum up to a
cutoff T and replace the rest by the corresponding logarithmic integral
(prime number theorem density 1/log t).
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .primes import PrimeTableError, primes_upto
from .products import ProductMode, constant_c, g_small
from .series import J_MAX, alpha_coeff, cascade_P, cascade_R, fraka, fraka_corrected
from .specfun import gamma_complex, quad, rgamma

X0 = 1e7
EXACT_PRIME_LIMIT = 10**8
DEFAULT_HYBRID_CUTOFF = 10**7
_LOG2 = math.log(2)


class SolverError(RuntimeError):
    """No sign change found; carries the sampled (v, psi) pairs."""

    def __init__(self, message: str, samples):
        super().__init__(f"{message}; samples: {samples}")
        self.samples = samples


def _xi_of(x: float | None, xi: float | None) -> float:
    if (x is None) == (xi is None):
        raise ValueError("give exactly one of x and xi")
    if xi is not None:
        return float(xi)
    if x <= math.e:
        raise ValueError("need x > e")
    return math.log(math.log(x))


def _x_of(xi: float) -> float:
    try:
        return math.exp(math.exp(xi))
    except OverflowError:
        return math.inf


def _primes_f(limit: float) -> np.ndarray:
    return primes_upto(limit).astype(float)


# --------------------------------------------------------------------------
# Psi and its pieces


def psi(xi: float, v: float) -> float:
    """xi/v^2 - sum_{q < e^v} 1/(q - 1 + v), with the exact prime sum."""
    if v <= 0:
        raise ValueError("v > 0")
    ev = math.exp(v) if v < 700 else math.inf
    if ev > EXACT_PRIME_LIMIT:
        raise PrimeTableError(
            f"psi at v = {v:g} needs all primes below {ev:.4g}; the exact table stops at {EXACT_PRIME_LIMIT:g}"
        )
    q = _primes_f(math.ceil(ev))
    q = q[q < ev]
    return xi / v**2 - float(np.sum(1.0 / (q - 1 + v)))


def _I_from(v: float, lo_u: float) -> float:
    """integral over u in [lo_u, v] of du / (u (1 + (v - 1) e^-u)), i.e. t = e^u."""
    if v <= lo_u:
        return 0.0
    c = math.log(max(v - 1.0, 1.0))
    cut = min(v, c + 50.0)
    out = math.log(v / cut) if cut < v else 0.0

    def f(u):
        # 1/u minus its correction; the correction is what varies quickly
        return 1.0 / u - (v - 1) * np.exp(-u) / (u * (1.0 + (v - 1) * np.exp(-u)))

    bps = [b for b in (c - 10, c - 3, c, c + 3, c + 10, c + 25) if lo_u < b < cut]
    out += quad(f, lo_u, cut, rtol=1e-13, breakpoints=bps).value
    return out


def I_numeric(v: float) -> float:
    """integral_2^{e^v} dt / ((t - 1 + v) log t)."""
    if v < 2:
        raise ValueError("I_numeric needs v >= 2")
    return _I_from(v, _LOG2)


def I_asymptotic(v: float, J: int) -> float:
    if v < 3 or J < 0:
        raise ValueError("need v >= 3, J >= 0")
    L = math.log(v)
    s = math.log(v / L)
    return s + math.fsum(alpha_coeff(2 * j).evaluate() / L ** (2 * j) for j in range(1, J + 1))


def psi_hybrid(xi: float, v: float, cutoff: int = DEFAULT_HYBRID_CUTOFF) -> float:
    """Psi with the prime sum exact below ``cutoff`` and a log-integral above it."""
    if v <= 0:
        raise ValueError("v > 0")
    lim = math.exp(v) if v < math.log(cutoff) else cutoff
    q = _primes_f(math.ceil(lim))
    q = q[q < lim]
    s = float(np.sum(1.0 / (q - 1 + v)))
    if v > math.log(cutoff):
        s += _I_from(v, math.log(cutoff))
    return xi / v**2 - s


def psi_any(xi: float, v: float, cutoff: int = DEFAULT_HYBRID_CUTOFF) -> float:
    """Exact psi when e^v is within the cutoff, the hybrid otherwise (they agree there)."""
    return psi_hybrid(xi, v, cutoff)


# --------------------------------------------------------------------------
# rho and nu


@dataclass(frozen=True)
class SaddleState:
    x: float
    xi: float
    rho: float
    nu: float
    mu: float
    psi_at_rho: float
    bracket: tuple[float, float]
    slack: float  # |Psi'| times the bracket width
    method: str  # "exact" if every prime below e^rho was summed, else "hybrid"
    prime_cutoff: int

    @property
    def window(self) -> tuple[float, float]:
        return rho_window(self.xi)

    def to_json(self) -> str:
        d = asdict(self)
        d["bracket"] = list(self.bracket)
        return json.dumps(d)

    @classmethod
    def from_json(cls, text: str) -> "SaddleState":
        d = json.loads(text)
        d["bracket"] = tuple(d["bracket"])
        return cls(**d)


def rho_window(xi: float) -> tuple[float, float]:
    L = math.log(xi)
    return math.sqrt(xi / L), math.sqrt(5 * xi / L)


def mu_of(xi: float) -> float:
    return math.sqrt(2 * xi / math.log(xi))


def _psi_slope(xi: float, v: float, cutoff: int) -> float:
    lim = min(math.exp(min(v, 700)), cutoff)
    q = _primes_f(math.ceil(lim))
    q = q[q < lim]
    s = float(np.sum(1.0 / (q - 1 + v) ** 2))
    if math.exp(min(v, 700)) > cutoff:
        s += 1.0 / (cutoff * math.log(cutoff))
    return 2 * xi / v**3 + s


def solve_rho(xi: float, tol: float = 1e-12, cutoff: int = DEFAULT_HYBRID_CUTOFF) -> SaddleState:
    """rho = inf{v > 0 : Psi(v) <= 0} by bisection on the sign of Psi.

    A geometric scan from the left end of the window locates the first
    sample with Psi <= 0 (the window is widened if needed); bisection then
    shrinks the bracket to relative width ``tol``.  The left endpoint is
    returned, consistent with rho being an infimum.
    """
    if xi <= 1:
        raise ValueError("solve_rho needs xi > 1")
    if tol <= 0:
        raise ValueError("tol > 0")
    f = lambda v: psi_hybrid(xi, v, cutoff)  # noqa: E731
    lo, hi = rho_window(xi)
    samples = []
    for _ in range(60):
        val = f(lo)
        samples.append((lo, val))
        if val > 0:
            break
        lo /= 2
    else:
        raise SolverError("Psi is not positive anywhere left of the window", samples[-5:])
    a = lo
    b = None
    grid = np.geomspace(lo, hi, 65)[1:]
    for v in list(grid) + [hi * 2.0**k for k in range(1, 40)]:
        val = f(float(v))
        samples.append((float(v), val))
        if val <= 0:
            b = float(v)
            break
        a = float(v)
    if b is None:
        raise SolverError("no sign change of Psi in the widened window", samples[-5:])
    while b - a > tol * b:
        m = 0.5 * (a + b)
        if not a < m < b:
            break
        if f(m) > 0:
            a = m
        else:
            b = m
    psi_a = f(a)
    slack = _psi_slope(xi, a, cutoff) * (b - a)
    method = "exact" if math.exp(min(b, 700)) <= cutoff else "hybrid"
    nu = solve_nu(xi, 1e-12) if xi >= math.log(math.log(5)) else math.nan
    return SaddleState(_x_of(xi), xi, a, nu, mu_of(xi), psi_a, (a, b), slack, method, cutoff)


def solve_nu(xi: float, tol: float = 1e-12) -> float:
    """The root of v^2 I(v) = xi on [1, inf), by monotone bisection."""
    if tol <= 0:
        raise ValueError("tol > 0")
    g = lambda v: v * v * _I_from(v, _LOG2) - xi  # noqa: E731
    a, b = 1.0, 2.0
    while g(b) < 0:
        a, b = b, 2 * b
    if g(a) > 0:
        raise ValueError(f"xi = {xi} is below the range where nu exists")
    while b - a > tol * b:
        m = 0.5 * (a + b)
        if not a < m < b:
            break
        if g(m) < 0:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def rho_expansion(xi: float, J: int) -> float:
    """mu * sum_{j<=J} R_j(log log xi) / (log xi)^j."""
    if not 0 <= J <= J_MAX:
        raise ValueError(f"J must be in [0, {J_MAX}]")
    L = math.log(xi)
    if math.log(L) < 1:
        warnings.warn("rho_expansion is meant for log log xi >= 1", stacklevel=2)
    fam = cascade_R(J_MAX)
    X = math.log(L)
    return mu_of(xi) * math.fsum(fam.evaluate(j, X) / L**j for j in range(J + 1))


# --------------------------------------------------------------------------
# log F_omega(e^v, v)


def log_F_omega(v: float, cutoff: int = DEFAULT_HYBRID_CUTOFF) -> tuple[float, str]:
    """sum_{q < e^v} log(1 + v/(q - 1)) and whether it was 'exact' or 'hybrid'."""
    logT = math.log(cutoff)
    lim = math.exp(v) if v < logT else cutoff
    q = _primes_f(math.ceil(lim))
    q = q[q < lim]
    s = math.fsum(np.log1p(v / (q - 1)).tolist())
    if v <= logT:
        return s, "exact"

    def f(u):
        w = v * np.exp(-u) / -np.expm1(-u)  # v / (e^u - 1) without overflow
        phi = np.where(w > 1e-8, np.log1p(w) / np.where(w > 0, w, 1), 1 - w / 2)
        return (v / u) * (phi / -np.expm1(-u) - 1.0)

    c = math.log(v)
    cut = min(v, c + 60)
    bps = [b for b in (c - 3, c, c + 3, c + 10, c + 25) if logT < b < cut]
    tail = v * math.log(v / logT) + quad(f, logT, cut, rtol=1e-13, breakpoints=bps).value
    return s + tail, "hybrid"


def logF_expansion(v: float, M: int, corrected: bool = True) -> float:
    """v {log(v / log v) + sum_{m<=M} a_m / (log v)^m}.

    The default coefficients are gamma_m + beta_m; ``corrected=False`` uses
    the closed form with its extra m!, which overshoots by about v / log v.
    """
    if v < 3 or M < 0:
        raise ValueError("need v >= 3, M >= 0")
    L = math.log(v)
    coef = fraka_corrected if corrected else fraka
    return v * (math.log(v / L) + math.fsum(coef(m).evaluate() / L**m for m in range(1, M + 1)))


# --------------------------------------------------------------------------
# the S_omega main term and what follows from it


@dataclass(frozen=True)
class MainTerm:
    xi: float
    rho: float
    log_F: float
    log_ratio: float  # log(S * log x / x) predicted by the main term

    def log_value(self) -> float:
        """log of the main term itself: log x + log_ratio - log log x."""
        return math.exp(self.xi) + self.log_ratio - self.xi


@lru_cache(maxsize=256)
def _main(xi: float, cutoff: int) -> MainTerm:
    st = solve_rho(xi, 1e-13, cutoff)
    lf, _ = log_F_omega(st.rho, cutoff)
    # log(F e^-rho (log x)^(1/rho) / sqrt(2 xi)), with (log x)^(1/rho) = e^(xi/rho)
    lr = lf - st.rho + xi / st.rho - 0.5 * math.log(2 * xi)
    return MainTerm(xi, st.rho, lf, lr)


def main_term_parts(x: float | None = None, *, xi: float | None = None, cutoff=DEFAULT_HYBRID_CUTOFF) -> MainTerm:
    xi = _xi_of(x, xi)
    if _x_of(xi) < X0:
        warnings.warn(f"main term is asymptotic; x = {_x_of(xi):.3g} is below x0 = {X0:g}", stacklevel=2)
    return _main(xi, cutoff)


def s_omega_main_term(x: float, cutoff: int = DEFAULT_HYBRID_CUTOFF) -> float:
    """x F(e^rho, rho) e^-rho / ((log x)^(1 - 1/rho) sqrt(2 log log x))."""
    return s_omega_main_term_forms(x, cutoff)[0]


def s_omega_main_term_forms(x: float, cutoff: int = DEFAULT_HYBRID_CUTOFF) -> tuple[float, float]:
    """The main term computed twice: with (log x)^(1 - 1/rho) and with e^(xi/rho) / log x."""
    m = main_term_parts(x, cutoff=cutoff)
    lx = math.log(x)
    F = math.exp(m.log_F)
    a = x * F * math.exp(-m.rho) / (lx ** (1 - 1 / m.rho) * math.sqrt(2 * m.xi))
    b = x / lx * math.exp(m.log_F - m.rho + m.xi / m.rho - 0.5 * math.log(2 * m.xi))
    return a, b


def log_s_omega_expansion(x: float | None = None, J: int = 3, *, xi: float | None = None) -> float:
    """sqrt(2 xi log xi) * sum_{j<=J} P_j(log log xi) / (log xi)^j, the predicted log(S log x / x)."""
    xi = _xi_of(x, xi)
    if not 0 <= J <= J_MAX:
        raise ValueError(f"J must be in [0, {J_MAX}]")
    L = math.log(xi)
    X = math.log(L)
    if X <= 0:
        raise ValueError("need log log xi > 0")
    fam = cascade_P(J_MAX)
    return math.sqrt(2 * xi * L) * math.fsum(fam.evaluate(j, X) / L**j for j in range(J + 1))


@dataclass(frozen=True)
class LocalScaling:
    predicted: float  # x^h * main(x) / (1 + h)
    rho_shift: float  # rho at x^(1+h) minus rho at x
    log_ratio: float  # log of main(x^(1+h)) (1+h) / (x^h main(x))


def local_scaling_predict(
    x: float | None = None, h: float = 0.0, *, xi: float | None = None, cutoff=DEFAULT_HYBRID_CUTOFF
) -> LocalScaling:
    if h <= -1:
        raise ValueError("need h > -1")
    xi = _xi_of(x, xi)
    L3 = math.log(xi)
    if abs(math.log1p(h)) > math.sqrt(xi) / L3**1.5:
        warnings.warn("h is outside the range where the scaling is claimed", stacklevel=2)
    xi2 = xi + math.log1p(h)
    m1 = _main(xi, cutoff)
    m2 = _main(xi2, cutoff) if h else m1
    # main(x) = x / log x * e^{log_ratio}; the x^h and (1+h) factors cancel in the ratio
    log_ratio = m2.log_ratio - m1.log_ratio
    if x is not None:
        predicted = x**h * s_omega_main_term(x, cutoff) / (1 + h)
    else:
        predicted = math.nan
    return LocalScaling(predicted, m2.rho - m1.rho, log_ratio)


# --------------------------------------------------------------------------
# Alladi-type main terms and the S_Omega expansion


def phi_k_asymp(x: float, y: float, k: int) -> float:
    """x g_omega(y, r) xi^(k-1) / (log x Gamma(1 + r) (k-1)!) with r = (k - 1)/xi."""
    if k < 1:
        raise ValueError("k >= 1")
    lx = math.log(x)
    xi = math.log(lx)
    if not 3 <= y <= math.exp(lx**0.4):
        raise ValueError(f"need 3 <= y <= exp((log x)^(2/5)) = {math.exp(lx**0.4):.4g}")
    r = (k - 1) / xi
    if r >= 2:
        raise ValueError(f"r = (k-1)/xi = {r:.3g} must stay below 2")
    g = g_small(y, r, ProductMode.OMEGA).real
    return x * g * xi ** (k - 1) / (lx * gamma_complex(1 + r).real * math.factorial(k - 1))


def rough_power_sum_asymp(x: float, y: float, z: complex) -> complex:
    """x g_Omega(y, z) / (Gamma(z) (log x)^(1 - z))."""
    z = complex(z)
    lx = math.log(x)
    if y > math.exp(lx**0.4):
        raise ValueError(f"need y <= exp((log x)^(2/5)) = {math.exp(lx**0.4):.4g}")
    if abs(z) >= 2:
        raise ValueError("need |z| < 2")
    if z == 0:
        return 0j
    return x * g_small(y, z, ProductMode.BIGOMEGA) * rgamma(z) * lx ** (z - 1)


@lru_cache(maxsize=None)
def _c(j: int):
    return constant_c(j, tol=1e-4)


def s_Omega_expansion(x: float, J: int) -> float:
    """sum_{j<=J} c_j x / (log x)^(1 - 1/P_j)."""
    if x < 3 or J < 1:
        raise ValueError("need x >= 3, J >= 1")
    lx = math.log(x)
    ps = primes_upto(max(64, 8 * J))[:J]
    return math.fsum(_c(j + 1).value * x / lx ** (1 - 1 / int(p)) for j, p in enumerate(ps))


# --------------------------------------------------------------------------
# comparison rows


CSV_FIELDS = ("x", "xi", "rho", "nu", "main_term", "exact", "ratio")


def fmt15(v) -> str:
    return format(float(v), ".15g")


def _cell(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return fmt15(v)
    return str(v)


def comparison_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    fields = list(rows[0].keys()) if rows else list(CSV_FIELDS)
    w.writerow(fields)
    for r in rows:
        w.writerow([_cell(r[k]) for k in fields])
    return buf.getvalue()

"""Special functions used by the asymptotic side.

Everything here is double precision.  Ei switches between its power series
and the divergent expansion at |v| = 40; for v < -1 the series would cancel
badly, so E1 is evaluated from its continued fraction instead.
"""

from __future__ import annotations

import cmath
import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

EULER_GAMMA = 0.57721566490153286061
EI_SWITCH = 40.0


class PoleError(ValueError):
    """Evaluation requested at a pole."""


# --------------------------------------------------------------------------
# adaptive Gauss-Kronrod quadrature (7/15 points), complex-capable

_XGK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WGK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)
_NODES = np.concatenate((-_XGK[:-1], _XGK[::-1]))
_WK = np.concatenate((_WGK[:-1], _WGK[::-1]))
# Gauss nodes are the odd-indexed Kronrod nodes
_WG_FULL = np.zeros(15)
_WG_FULL[1::2] = np.concatenate((_WG[:-1], _WG[::-1]))


def _gk15(f, a: float, b: float):
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    y = f(c + h * _NODES)
    k = h * np.dot(_WK, y)
    g = h * np.dot(_WG_FULL, y)
    return k, abs(k - g)


@dataclass(frozen=True)
class QuadResult:
    value: complex | float
    abs_error: float
    intervals: int


def quad(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rtol: float = 1e-12,
    atol: float = 1e-300,
    max_intervals: int = 4000,
    breakpoints=(),
) -> QuadResult:
    """Globally adaptive GK15 on [a, b]; ``f`` must accept numpy arrays.

    The interval with the largest error estimate is bisected until the
    summed estimate drops below max(atol, rtol * |value|).
    """
    if b < a:
        res = quad(f, b, a, rtol, atol, max_intervals, breakpoints)
        return QuadResult(-res.value, res.abs_error, res.intervals)
    pts = sorted({a, b, *[p for p in breakpoints if a < p < b]})
    heap = []
    total = 0.0
    err = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        v, e = _gk15(f, lo, hi)
        total += v
        err += e
        heapq.heappush(heap, (-e, lo, hi, v))
    n = len(heap)
    while err > max(atol, rtol * abs(total)) and n < max_intervals:
        e0, lo, hi, v0 = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            heapq.heappush(heap, (e0, lo, hi, v0))
            break
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        total += v1 + v2 - v0
        err += e1 + e2 + e0
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        n += 1
    # re-sum to shed the drift of the running updates
    total = sum(item[3] for item in heap)
    err = sum(-item[0] for item in heap)
    return QuadResult(total, err, n)


# --------------------------------------------------------------------------
# exponential and logarithmic integrals


@dataclass(frozen=True)
class PrincipalValueReal:
    value: float
    kind: str  # "ordinary" or "cauchy_pv"

    def __float__(self):
        return self.value


def _ei_series(v: float) -> float:
    s = 0.0
    term = 1.0
    n = 0
    while True:
        n += 1
        term *= v / n
        add = term / n
        s += add
        if abs(add) <= 1e-17 * abs(s):
            break
    return EULER_GAMMA + math.log(abs(v)) + s


def _ei_asymptotic(v: float) -> float:
    # e^v / v * sum k! / v^k, truncated at the smallest term
    s = 1.0
    term = 1.0
    k = 0
    while True:
        k += 1
        nxt = term * k / v
        if abs(nxt) >= abs(term) or abs(nxt) < 1e-17:
            break
        term = nxt
        s += term
    return math.exp(v) / v * s


def _e1_contfrac(x: float) -> float:
    """E1(x) for x > 1 by modified Lentz on the standard continued fraction."""
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -i * i
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-x)


def ei(v: float) -> PrincipalValueReal:
    """Ei(v); a Cauchy principal value for v > 0."""
    v = float(v)
    if v == 0:
        raise PoleError("Ei has a logarithmic singularity at 0")
    if v > 0:
        val = _ei_series(v) if v <= EI_SWITCH else _ei_asymptotic(v)
        return PrincipalValueReal(val, "cauchy_pv")
    if v >= -1.0:
        return PrincipalValueReal(_ei_series(v), "ordinary")
    return PrincipalValueReal(-_e1_contfrac(-v), "ordinary")


def li(v: float) -> float:
    if v <= 1:
        raise ValueError("li needs v > 1")
    return ei(math.log(v)).value


LI2 = 1.04516378011749278484


def li_Li(v: float) -> tuple[float, float]:
    """(li(v), Li(v)) with Li(v) = integral_2^v dt / log t."""
    if v <= 1:
        raise ValueError("li needs v > 1")
    lv = li(v)
    if v < 2:
        return lv, math.nan
    return lv, (0.0 if v == 2 else lv - li(2.0))


def log_integral_tail(v: float, m: int, J: int) -> float:
    """J-term expansion of integral_v^inf dt / (t^m log t)."""
    if v < 3 or m < 2 or J < 1:
        raise ValueError("need v >= 3, m >= 2, J >= 1")
    L = (m - 1) * math.log(v)
    s = math.fsum((-1) ** (j + 1) * math.factorial(j - 1) / L**j for j in range(1, J + 1))
    return s / v ** (m - 1)


def log_integral_tail_exact(v: float, m: int) -> float:
    return -ei((1 - m) * math.log(v)).value


def log_integral_head(v: float, n: int, J: int) -> float:
    """J-term expansion of integral_2^v t^n dt / log t, with its 2^(n+1) correction."""
    if v < 3 or n < 0 or J < 1:
        raise ValueError("need v >= 3, n >= 0, J >= 1")
    L = (n + 1) * math.log(v)
    s = math.fsum(math.factorial(j - 1) / L**j for j in range(1, J + 1))
    return v ** (n + 1) * s - 2 ** (n + 1) / ((n + 1) * math.log(2))


def log_integral_head_exact(v: float, n: int) -> float:
    return ei((n + 1) * math.log(v)).value - ei((n + 1) * math.log(2)).value


# --------------------------------------------------------------------------
# Gamma and zeta

_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_complex(z: complex) -> complex:
    z = complex(z)
    if z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real):
        raise PoleError(f"Gamma has a pole at {z.real:g}")
    if z.real < 0.5:
        return cmath.pi / (cmath.sin(cmath.pi * z) * gamma_complex(1 - z))
    z -= 1
    x = _LANCZOS[0]
    for i in range(1, _LANCZOS_G + 2):
        x += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    # one exponential, so t^(z+1/2) cannot overflow before e^-t is applied
    return math.sqrt(2 * math.pi) * cmath.exp((z + 0.5) * cmath.log(t) - t) * x


def rgamma(z: complex) -> complex:
    """1/Gamma(z), zero at the poles."""
    z = complex(z)
    if z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real):
        return 0j
    return 1 / gamma_complex(z)


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """B_n with B_1 = -1/2."""
    if n == 0:
        return Fraction(1)
    return -sum(math.comb(n + 1, k) * bernoulli(k) for k in range(n)) / (n + 1)


def zeta_even_rational(j: int) -> Fraction:
    """r with zeta(j) = r * pi^j for even j >= 2; zeta(0) = -1/2 gives r = -1/2."""
    if j % 2 or j < 0:
        raise ValueError("only even j")
    if j == 0:
        return Fraction(-1, 2)
    k = j // 2
    return (-1) ** (k + 1) * bernoulli(j) * 2 ** (j - 1) / math.factorial(j)


def zeta_even(j: int) -> float:
    if j % 2 or j < 2 or j > 40:
        raise ValueError("zeta_even needs even 2 <= j <= 40")
    return float(zeta_even_rational(j)) * math.pi**j


# --------------------------------------------------------------------------
# generalized incomplete gamma


def _normalized_inc_gamma(z: complex, a: float, b: float, rtol: float) -> complex:
    """Gamma(z; a, b) * z^-z * e^z, via t = z e^s on a three-leg path.

    In s the integrand is exp(-z (e^s - s - 1)); the endpoints are
    log(a/r) - i theta and log(b/r) - i theta.  The path rises to the real
    axis, runs along it, and comes back down.
    """
    r, theta = abs(z), cmath.phase(z)
    sa, sb = math.log(a / r), math.log(b / r)

    def h(s):
        return np.expm1(s) - s

    def real_leg(s):
        return np.exp(-z * h(s))

    pieces = []
    if theta != 0:
        # s = sa - i*phi, phi from theta down to 0 ; ds = -i dphi
        def up(phi):
            return -1j * np.exp(-z * h(sa - 1j * phi))

        pieces.append(-quad(up, 0.0, theta, rtol).value)
    bps = [0.0] if sa < 0 < sb else []
    width = 1.0 / math.sqrt(max(r * math.cos(theta), 1e-300))
    bps += [p for p in (-4 * width, -width, width, 4 * width) if sa < p < sb]
    pieces.append(quad(real_leg, sa, sb, rtol, breakpoints=bps).value)
    if theta != 0:

        def down(phi):
            return -1j * np.exp(-z * h(sb - 1j * phi))

        pieces.append(quad(down, 0.0, theta, rtol).value)
    return complex(sum(pieces))


def gen_inc_gamma_log(z: complex, a: float, b: float, rtol: float = 1e-12) -> complex:
    """log Gamma(z; a, b) on some branch; safe when the value itself overflows."""
    z = complex(z)
    if not 0 < a < b:
        raise ValueError("need 0 < a < b")
    if z.real <= 0:
        raise ValueError("need Re z > 0")
    g = _normalized_inc_gamma(z, a, b, rtol)
    return z * cmath.log(z) - z + cmath.log(g)


def gen_inc_gamma_numeric(z: complex, a: float, b: float, rtol: float = 1e-12) -> complex:
    """Gamma(z; a, b) = integral_a^b t^(z-1) e^-t dt."""
    return cmath.exp(gen_inc_gamma_log(z, a, b, rtol))


def log_squared(r: float) -> float:
    return math.log(r) ** 2


def gen_inc_gamma_saddle(z: complex, psi: Callable[[float], float] = log_squared) -> complex:
    """Saddle value sqrt(2 pi) z^(z - 1/2) e^-z for Gamma(z; r/psi(r), r psi(r)).

    ``psi`` does not enter the value; it is accepted so callers state which
    window the approximation is meant for.
    """
    z = complex(z)
    return cmath.exp(0.5 * math.log(2 * math.pi) + (z - 0.5) * cmath.log(z) - z)


def saddle_ratio(z: complex, psi: Callable[[float], float] = log_squared, rtol=1e-12) -> complex:
    """Gamma(z; r/psi, r psi) divided by its saddle value, without overflow."""
    z = complex(z)
    r = abs(z)
    p = psi(r)
    g = _normalized_inc_gamma(z, r / p, r * p, rtol)
    return g * cmath.sqrt(z) / math.sqrt(2 * math.pi)

"""Exact truncated power series in (sigma, tau) over Q[Lambda, Pi].

Lambda stands for log 2 and Pi for pi^2.  With

    sigma = 1 / log xi,   tau = log(log(xi) / 2) / log xi,   X = log log xi,

one has tau = sigma (X - Lambda), so a series sum a[m, n] sigma^m tau^n
regroups into polynomials in X: the coefficient of sigma^j collects
sum_n a[j - n, n] (X - Lambda)^n.  That is how R_j and P_j come out of the
series for rho / mu and for log S_omega.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from .specfun import zeta_even_rational

J_MAX = 6

Key = tuple[int, int]


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"exact coefficient expected, got {type(c).__name__}")


class SymPoly:
    """Polynomial in Lambda and Pi with rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Key, object] | None = None):
        self.terms: dict[Key, Fraction] = {}
        for k, v in (terms or {}).items():
            v = _frac(v)
            if v:
                self.terms[(int(k[0]), int(k[1]))] = v

    @classmethod
    def const(cls, c) -> "SymPoly":
        return cls({(0, 0): c})

    @classmethod
    def lam(cls, power: int = 1) -> "SymPoly":
        return cls({(power, 0): 1})

    @classmethod
    def pi2(cls, power: int = 1) -> "SymPoly":
        return cls({(0, power): 1})

    @staticmethod
    def coerce(other) -> "SymPoly":
        return other if isinstance(other, SymPoly) else SymPoly.const(other)

    @staticmethod
    def _foreign(other) -> bool:
        return not isinstance(other, (SymPoly, int, Fraction))

    def is_zero(self) -> bool:
        return not self.terms

    def constant(self) -> Fraction | None:
        """The value if this is a bare rational, else None."""
        if not self.terms:
            return Fraction(0)
        if set(self.terms) == {(0, 0)}:
            return self.terms[(0, 0)]
        return None

    def __add__(self, other):
        if SymPoly._foreign(other):
            return NotImplemented
        other = SymPoly.coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return SymPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return SymPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if SymPoly._foreign(other):
            return NotImplemented
        return self + (-SymPoly.coerce(other))

    def __rsub__(self, other):
        return SymPoly.coerce(other) - self

    def __mul__(self, other):
        if SymPoly._foreign(other):
            return NotImplemented
        if not isinstance(other, SymPoly):
            c = _frac(other)
            return SymPoly({k: v * c for k, v in self.terms.items()})
        out: dict[Key, Fraction] = {}
        for (a, b), u in self.terms.items():
            for (c, d), v in other.terms.items():
                k = (a + c, b + d)
                out[k] = out.get(k, 0) + u * v
        return SymPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = SymPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SymPoly.const(other)
        if not isinstance(other, SymPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def evaluate(self, lam: float = math.log(2), pi2: float = math.pi**2) -> float:
        return math.fsum(float(v) * lam**a * pi2**b for (a, b), v in self.terms.items())

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (a, b), v in sorted(self.terms.items()):
            mono = "*".join(
                s for s in ((f"L^{a}" if a > 1 else "L" if a else ""), (f"Pi^{b}" if b > 1 else "Pi" if b else "")) if s
            )
            parts.append(f"{v}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


class SeriesError(ValueError):
    """An operation needs a constant term the series does not have."""


class BiSeries:
    """Truncated series sum c[m, n] sigma^m tau^n with SymPoly coefficients.

    Coefficients are kept for m <= M and n <= N, and, if ``total`` is set,
    m + n <= total.  Each of these truncations is compatible with
    multiplication, so everything kept is exact.
    """

    __slots__ = ("coeffs", "M", "N", "total")

    def __init__(self, coeffs: Mapping[Key, object] | None, M: int, N: int, total: int | None = None):
        self.M, self.N, self.total = M, N, total
        self.coeffs: dict[Key, SymPoly] = {}
        for k, v in (coeffs or {}).items():
            if self.keeps(*k):
                v = SymPoly.coerce(v)
                if not v.is_zero():
                    self.coeffs[k] = v

    def keeps(self, m: int, n: int) -> bool:
        return 0 <= m <= self.M and 0 <= n <= self.N and (self.total is None or m + n <= self.total)

    # constructors sharing this series' truncation
    def like(self, coeffs) -> "BiSeries":
        return BiSeries(coeffs, self.M, self.N, self.total)

    def scalar(self, c) -> "BiSeries":
        return self.like({(0, 0): c})

    @classmethod
    def sigma(cls, M, N, total=None):
        return cls({(1, 0): 1}, M, N, total)

    @classmethod
    def tau(cls, M, N, total=None):
        return cls({(0, 1): 1}, M, N, total)

    def _check(self, other: "BiSeries"):
        if (self.M, self.N, self.total) != (other.M, other.N, other.total):
            raise SeriesError("incompatible truncations")

    def coeff(self, m: int, n: int) -> SymPoly:
        return self.coeffs.get((m, n), SymPoly())

    def const(self) -> SymPoly:
        return self.coeff(0, 0)

    def __add__(self, other):
        if not isinstance(other, BiSeries):
            other = self.scalar(other)
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return self.like(out)

    __radd__ = __add__

    def __neg__(self):
        return self.like({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, BiSeries):
            return self.like({k: v * other for k, v in self.coeffs.items()})
        self._check(other)
        out: dict[Key, SymPoly] = {}
        for (a, b), u in self.coeffs.items():
            for (c, d), v in other.coeffs.items():
                k = (a + c, b + d)
                if self.keeps(*k):
                    out[k] = out[k] + u * v if k in out else u * v
        return self.like(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = self.scalar(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, BiSeries):
            return NotImplemented
        return (self.M, self.N, self.total) == (other.M, other.N, other.total) and self.coeffs == other.coeffs

    def __repr__(self):
        return f"BiSeries({self.coeffs!r}, M={self.M}, N={self.N}, total={self.total})"

    @property
    def max_power(self) -> int:
        """Beyond this power, s^k vanishes for s without constant term."""
        return self.M + self.N if self.total is None else min(self.M + self.N, self.total)

    def compose(self, coeffs: Iterable) -> "BiSeries":
        """sum_k coeffs[k] * self^k; self must have zero constant term."""
        if not self.const().is_zero():
            raise SeriesError("compose needs a series with zero constant term")
        coeffs = list(coeffs)[: self.max_power + 1]
        out = self.scalar(0)
        for c in reversed(coeffs):  # Horner
            out = out * self + c
        return out

    def exp(self) -> "BiSeries":
        if not self.const().is_zero():
            raise SeriesError("exp needs a zero constant term (e^c is not in the ring)")
        return self.compose(Fraction(1, math.factorial(k)) for k in range(self.max_power + 1))

    def log1p(self) -> "BiSeries":
        if not self.const().is_zero():
            raise SeriesError("log1p needs a zero constant term")
        return self.compose([0] + [Fraction((-1) ** (k + 1), k) for k in range(1, self.max_power + 1)])

    def pow_neg(self, k: int) -> "BiSeries":
        """self^-k; the constant term must be a nonzero rational."""
        c = self.const().constant()
        if c is None or c == 0:
            raise SeriesError("pow_neg needs a nonzero rational constant term")
        t = (self - c) * (1 / c)
        # (1 + t)^-k = sum_i binom(-k, i) t^i
        coeffs = [Fraction((-1) ** i * math.comb(k + i - 1, i)) for i in range(t.max_power + 1)]
        return t.compose(coeffs) * (c**-k)


def series_ops(a: BiSeries, b: BiSeries | None, op: str, arg=None) -> BiSeries:
    """Dispatch by name: add, mul, exp, log1p, pow_neg (arg = k), compose (arg = coefficients)."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "exp":
        return a.exp()
    if op == "log1p":
        return a.log1p()
    if op == "pow_neg":
        return a.pow_neg(arg)
    if op == "compose":
        return a.compose(arg)
    raise ValueError(f"unknown op {op!r}")


# --------------------------------------------------------------------------
# scalar coefficient families


def alpha_coeff(j: int):
    """alpha_j = 2 (j-1)! (1 - 2^(1-j)) zeta(j).

    Exact for j = 1 (2 Lambda) and even j (rational times Pi^(j/2));
    a float from the alternating series otherwise.
    """
    if j < 1:
        raise ValueError("j >= 1")
    if j == 1:
        return SymPoly({(1, 0): 2})
    if j % 2 == 0:
        r = 2 * math.factorial(j - 1) * (1 - Fraction(1, 2 ** (j - 1))) * zeta_even_rational(j)
        return SymPoly({(0, j // 2): r})
    return 2 * math.factorial(j - 1) * alternating_sum(lambda n: 1.0 / n**j)


def alternating_sum(a, terms: int = 40) -> float:
    """sum_{n>=1} (-1)^(n+1) a(n) by the Cohen-Rodriguez Villegas-Zagier scheme.

    Good to ~5.8^-terms for totally monotone a, which covers every series here.
    """
    d = (3 + math.sqrt(8)) ** terms
    d = (d + 1 / d) / 2
    b = -1.0
    c = -d
    s = 0.0
    for k in range(terms):
        c = b - c
        s += c * a(k + 1)
        b = (k + terms) * (k - terms) * b / ((k + 0.5) * (k + 1))
    return s / d


def fraka(m: int) -> SymPoly:
    """m! {1 + (2/m) sum_{0 <= j <= m/2} (1 - 2^(1-2j)) zeta(2j)}, j = 0 term read as 1/2."""
    if m < 1:
        raise ValueError("m >= 1")
    s = SymPoly.const(Fraction(1, 2))
    for j in range(1, m // 2 + 1):
        r = (1 - Fraction(1, 2 ** (2 * j - 1))) * zeta_even_rational(2 * j)
        s = s + SymPoly({(0, j): r})
    return (SymPoly.const(1) + s * Fraction(2, m)) * math.factorial(m)


def fraka_corrected(m: int) -> SymPoly:
    """gamma_m + beta_m, i.e. fraka(m) - m!.

    gamma_m already carries the m! coming from (log v) li(v) - v, so adding
    m! once more double counts it.  This is the coefficient that actually
    matches sum_{q < e^v} log(1 + v/(q-1)).
    """
    return fraka(m) - math.factorial(m)


def beta_gamma_fraka(m: int) -> tuple[float, float, SymPoly]:
    """(beta_m, gamma_m, fraka_m); the first two summed numerically."""
    if m < 1:
        raise ValueError("m >= 1")
    beta = (-1) ** m * math.factorial(m - 1) * alternating_sum(lambda n: 1.0 / (n**m * (n + 1)))
    gamma = math.factorial(m) * (1 + alternating_sum(lambda n: 1.0 / (n * (n + 1) ** m)) / m)
    return beta, gamma, fraka(m)


def lagrange_An(n_max: int) -> list[Fraction]:
    """A_1..A_{n_max} from the recurrence with A_1 = 3/2 (index 0 holds A_0 = 1)."""
    if n_max < 1:
        raise ValueError("n_max >= 1")
    A = [Fraction(1), Fraction(3, 2)]
    for n in range(2, n_max + 1):
        # powers of sum_{1<=d<n} A_d t^d, truncated at t^n
        base = [Fraction(0)] + A[1:n] + [Fraction(0)]
        power = base[:]
        total = Fraction(0)
        for j in range(2, n + 1):
            power = [sum(power[i] * base[k - i] for i in range(k + 1)) for k in range(n + 1)]
            total += (-1) ** j * (j + 1) * power[n]
        A.append(total / 2)
    return A


# --------------------------------------------------------------------------
# the two cascades


@dataclass(frozen=True)
class PolyFamily:
    family: str  # "R" or "P"
    polys: tuple[dict[int, SymPoly], ...]  # polys[j][l] = [X^l] of the j-th polynomial

    def coeff(self, j: int, l: int) -> SymPoly:
        return self.polys[j].get(l, SymPoly())

    def degree(self, j: int) -> int:
        return max((l for l, c in self.polys[j].items() if not c.is_zero()), default=0)

    def evaluate(self, j: int, X: float, lam: float = math.log(2), pi2: float = math.pi**2) -> float:
        return math.fsum(c.evaluate(lam, pi2) * X**l for l, c in self.polys[j].items())

    def to_json_records(self, j: int | None = None) -> list[dict]:
        out = []
        for jj in range(len(self.polys)) if j is None else [j]:
            coeffs = [
                {"degX": l, "degΛ": a, "degΠ": b, "rational": f"{v.numerator}/{v.denominator}"}
                for l, c in sorted(self.polys[jj].items())
                for (a, b), v in sorted(c.terms.items())
            ]
            out.append({"family": self.family, "j": jj, "coefficients": coeffs})
        return out

    def to_json(self, j: int | None = None) -> str:
        return json.dumps(self.to_json_records(j), ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "PolyFamily":
        recs = json.loads(text)
        if isinstance(recs, dict):
            recs = [recs]
        size = max(r["j"] for r in recs) + 1
        polys: list[dict[int, SymPoly]] = [{} for _ in range(size)]
        fam = recs[0]["family"]
        for r in recs:
            for c in r["coefficients"]:
                term = SymPoly({(c["degΛ"], c["degΠ"]): Fraction(c["rational"])})
                polys[r["j"]][c["degX"]] = polys[r["j"]].get(c["degX"], SymPoly()) + term
        return cls(fam, tuple(polys))


def _regroup(s: BiSeries, J: int) -> list[dict[int, SymPoly]]:
    """Turn sum a[m,n] sigma^m tau^n into polynomials in X via tau = sigma (X - Lambda)."""
    polys = []
    for j in range(J + 1):
        poly: dict[int, SymPoly] = {}
        for n in range(j + 1):
            a = s.coeff(j - n, n)
            if a.is_zero():
                continue
            # (X - Lambda)^n = sum_l binom(n, l) X^l (-Lambda)^(n-l)
            for l in range(n + 1):
                term = a * SymPoly({(n - l, 0): math.comb(n, l) * (-1) ** (n - l)})
                poly[l] = poly[l] + term if l in poly else term
        polys.append({l: c for l, c in poly.items() if not c.is_zero()})
    return polys


def _check_depth(J: int):
    if not 0 <= J <= J_MAX:
        raise ValueError(f"cascade depth must be in [0, {J_MAX}], got {J}")


def _alpha_even(j: int) -> SymPoly:
    return alpha_coeff(2 * j)


def w_series(J: int) -> BiSeries:
    """w = 2 sigma I(mu) - 1 as a series in (sigma, tau)."""
    sig, tau = BiSeries.sigma(J, J, J), BiSeries.tau(J, J, J)
    one_m_tau = 1 - tau
    w = -3 * tau - 2 * sig * (-tau).log1p()
    for j in range(1, J // 2 + 1):
        w = w + _alpha_even(j) * (2 * sig) ** (2 * j + 1) * one_m_tau.pow_neg(2 * j)
    return w


def _zpoly_mul(a: list[BiSeries], b: list[BiSeries], deg: int) -> list[BiSeries]:
    out = [a[0].scalar(0) for _ in range(deg + 1)]
    for i, u in enumerate(a):
        for k, v in enumerate(b):
            if i + k <= deg:
                out[i + k] = out[i + k] + u * v
    return out


def h_series_lagrange(J: int) -> BiSeries:
    """frak h = log(nu / mu) by Lagrange inversion of w = h / f(h).

    f(z) = z / (e^(-2z) - 1 - 2 sigma lambda(z)); the apparent singularity
    at z = 0 is removed by dividing the denominator by z term by term.
    """
    sig, tau = BiSeries.sigma(J, J, J), BiSeries.tau(J, J, J)
    u = 2 * sig * (1 - tau).pow_neg(1)  # 2 sigma / (1 - tau)
    zdeg = max(J - 1, 0)
    # lambda(z) = sum_i lam[i] z^i
    lam = [sig.scalar(0)]
    for i in range(1, zdeg + 2):
        c = (1 if i == 1 else 0) - Fraction((-1) ** (i + 1), i) * u**i
        for j in range(1, J // 2 + 1):
            binom = (-1) ** i * math.comb(2 * j + i - 1, i)
            c = c + _alpha_even(j) * binom * u ** (i + 2 * j)
        lam.append(c)
    # g(z) = (e^(-2z) - 1 - 2 sigma lambda(z)) / z
    g = [sig.scalar(Fraction((-2) ** (i + 1), math.factorial(i + 1))) - 2 * sig * lam[i + 1] for i in range(zdeg + 1)]
    f = [g[0].pow_neg(1)]
    for i in range(1, zdeg + 1):
        acc = sig.scalar(0)
        for l in range(1, i + 1):
            acc = acc + g[l] * f[i - l]
        f.append(-f[0] * acc)
    w = w_series(J)
    h = sig.scalar(0)
    fk = [sig.scalar(1)] + [sig.scalar(0)] * zdeg
    wk = sig.scalar(1)
    for k in range(1, J + 1):
        fk = _zpoly_mul(fk, f, zdeg)
        wk = wk * w
        h = h + fk[k - 1] * Fraction(1, k) * wk
    return h


def h_series_fixed_point(J: int) -> BiSeries:
    """Same frak h, by iterating the equation nu^2 I(nu) = xi directly.

    With D = 1 - tau + 2 sigma h the equation reads
    e^(-2h) - 1 - 2 sigma h + 2 sigma log(1 + 2 sigma h / (1 - tau))
        = -3 tau - 2 sigma log(1 - tau) + sum_j alpha_2j (2 sigma)^(2j+1) D^(-2j).
    """
    sig, tau = BiSeries.sigma(J, J, J), BiSeries.tau(J, J, J)
    inv = (1 - tau).pow_neg(1)
    base = -3 * tau - 2 * sig * (-tau).log1p()
    h = sig.scalar(0)
    for _ in range(J + 1):
        D = 1 - tau + 2 * sig * h
        rhs = base
        for j in range(1, J // 2 + 1):
            rhs = rhs + _alpha_even(j) * (2 * sig) ** (2 * j + 1) * D.pow_neg(2 * j)
        E = (-2 * h).exp() - 1 + 2 * h
        h = (E - 2 * sig * h + 2 * sig * (2 * sig * h * inv).log1p() - rhs) * Fraction(1, 2)
    return h


@lru_cache(maxsize=None)
def _h(J: int) -> BiSeries:
    return h_series_lagrange(J)


@lru_cache(maxsize=None)
def cascade_R(J: int = 3) -> PolyFamily:
    """R_0..R_J: rho / mu = sum_j R_j(log log xi) / (log xi)^j."""
    _check_depth(J)
    return PolyFamily("R", tuple(_regroup(_h(J).exp(), J)))


def log_s_series(J: int, corrected: bool = True) -> BiSeries:
    """(log F + xi/rho - rho) / sqrt(2 xi log xi) as a series in (sigma, tau)."""
    coef = fraka_corrected if corrected else fraka
    sig, tau = BiSeries.sigma(J, J, J), BiSeries.tau(J, J, J)
    h = _h(J)
    D = 1 - tau + 2 * sig * h
    logD = (D - 1).log1p()
    bracket = 1 - 3 * tau + 2 * sig * h - 2 * sig * logD - sig
    two_sig_over_D = 2 * sig * D.pow_neg(1)
    for m in range(1, J):
        bracket = bracket + sig * coef(m) * two_sig_over_D**m
    for j in range(1, (J - 1) // 2 + 1):
        bracket = bracket + sig * _alpha_even(j) * two_sig_over_D ** (2 * j)
    return h.exp() * bracket


@lru_cache(maxsize=None)
def cascade_P(J: int = 3, corrected: bool = True) -> PolyFamily:
    """P_0..P_J: log(S_omega / (x / log x)) / sqrt(2 xi log xi) = sum_j P_j(log log xi) / (log xi)^j.

    The log F coefficients are ``fraka_corrected`` by default.  With
    ``corrected=False`` the literal closed form ``fraka`` is used instead and
    the family is named "P_literal"; its P_2 constant is then 4 rather than 2.
    """
    _check_depth(J)
    name = "P" if corrected else "P_literal"
    return PolyFamily(name, tuple(_regroup(log_s_series(J, corrected), J)))


def a_coeffs(J: int = 3) -> dict[tuple[int, int], SymPoly]:
    """a[l, j] = [X^l] R_j."""
    fam = cascade_R(J)
    return {(l, j): fam.coeff(j, l) for j in range(J + 1) for l in range(j + 1)}


def z_coeffs(J: int = 3) -> dict[tuple[int, int], SymPoly]:
    """z[l, j] = [X^l] P_j."""
    fam = cascade_P(J)
    return {(l, j): fam.coeff(j, l) for j in range(J + 1) for l in range(j + 1)}

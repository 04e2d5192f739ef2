"""Exact enumeration by segmented factorization of every n <= x.

Each segment [lo, hi) is fully factored by dividing out the base primes
p <= sqrt(x); whatever cofactor is left is 1 or a single prime.  From one
pass we collect everything the enumerative side needs: the middle prime of
every n in both modes, omega/Omega and the smallest prime factor.

Counts are accumulated as exact integer histograms and only turned into
floating point at the very end, so totals do not depend on segment size or
worker count.
"""

from __future__ import annotations

import enum
import json
import math
from collections.abc import Mapping
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

import numpy as np

from .primes import primes_upto

DEFAULT_SEGMENT = 1 << 22
# spf histograms are kept for smallest prime factors below this cap
DEFAULT_SPF_CAP = 64
_MAX_OMEGA = 64


class MiddleMode(enum.Enum):
    OMEGA = "omega"  # distinct prime factors
    BIGOMEGA = "bigomega"  # counted with multiplicity

    @classmethod
    def parse(cls, value: "MiddleMode | str") -> "MiddleMode":
        if isinstance(value, cls):
            return value
        v = str(value).lower()
        if v in ("omega", "w", "distinct"):
            return cls.OMEGA
        if v in ("bigomega", "omega_big", "w_big", "multiplicity", "big"):
            return cls.BIGOMEGA
        raise ValueError(f"unknown mode {value!r}")


class SieveError(RuntimeError):
    """Segment processing failed; carries the offending bounds."""

    def __init__(self, lo: int, hi: int, cause: BaseException):
        super().__init__(f"sieve failed on segment [{lo}, {hi}): {cause!r}")
        self.lo, self.hi = lo, hi


class TruncationError(RuntimeError):
    """A certified enumeration could not be completed within its budget."""

    def __init__(self, message: str, partial: complex, tail: float):
        super().__init__(message)
        self.partial = partial
        self.tail = tail


# --------------------------------------------------------------------------
# single integers


@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"bad factor list {self.factors}")
            last = p
            prod *= p**e
        if prod != self.n:
            raise ValueError(f"factors multiply to {prod}, not {self.n}")

    @property
    def omega(self) -> int:
        return len(self.factors)

    @property
    def bigomega(self) -> int:
        return sum(e for _, e in self.factors)

    @property
    def smallest(self) -> float:
        """P^-(n); +inf for n = 1."""
        return self.factors[0][0] if self.factors else math.inf

    @property
    def largest(self) -> int:
        """P^+(n); 1 for n = 1."""
        return self.factors[-1][0] if self.factors else 1

    def with_multiplicity(self) -> list[int]:
        return [p for p, e in self.factors for _ in range(e)]


def factorize(n: int) -> Factorization:
    n = int(n)
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    m = n
    out = []
    for p in primes_upto(isqrt(m)):
        p = int(p)
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
    if m > 1:
        out.append((m, 1))
    return Factorization(n, tuple(out))


def middle_prime(f: Factorization, mode: MiddleMode | str) -> int:
    mode = MiddleMode.parse(mode)
    if f.n < 2:
        raise ValueError("n = 1 has no prime factor")
    if mode is MiddleMode.OMEGA:
        return f.factors[(f.omega + 1) // 2 - 1][0]
    return f.with_multiplicity()[(f.bigomega + 1) // 2 - 1]


# --------------------------------------------------------------------------
# segment engine


@dataclass
class SegmentTables:
    lo: int
    hi: int
    omega: np.ndarray  # int8
    bigomega: np.ndarray  # int8
    spf: np.ndarray  # int64, 0 for n = 1
    mid_omega: np.ndarray  # int64, 0 for n = 1
    mid_bigomega: np.ndarray


def factor_segment(lo: int, hi: int, base: np.ndarray) -> SegmentTables:
    """Factor every n in [lo, hi); ``base`` must hold all primes <= sqrt(hi - 1)."""
    if lo < 1 or hi <= lo:
        raise ValueError(f"bad segment [{lo}, {hi})")
    L = hi - lo
    rem = np.arange(lo, hi, dtype=np.int64)
    om = np.zeros(L, dtype=np.int8)
    Om = np.zeros(L, dtype=np.int8)
    spf = np.zeros(L, dtype=np.int64)
    records = []
    for p in base:
        p = int(p)
        if p * p > hi - 1:
            break
        first = (-lo) % p
        if first >= L:
            continue
        pos = np.arange(first, L, p, dtype=np.int64)
        e = np.ones(pos.size, dtype=np.int8)
        pk = p * p
        while pk <= hi - 1:
            fk = (-lo) % pk
            if fk >= L:
                break
            e[(np.arange(fk, L, pk, dtype=np.int64) - first) // p] += 1
            pk *= p
        rem[pos] //= np.power(p, e.astype(np.int64))
        om[pos] += 1
        Om[pos] += e
        fresh = spf[pos] == 0
        spf[pos[fresh]] = p
        records.append((p, pos, e))

    big = rem > 1
    om[big] += 1
    Om[big] += 1
    nospf = big & (spf == 0)
    spf[nospf] = rem[nospf]

    tw = (om.astype(np.int16) + 1) // 2
    tW = (Om.astype(np.int16) + 1) // 2
    cw = np.zeros(L, dtype=np.int16)
    cW = np.zeros(L, dtype=np.int16)
    mid_w = np.zeros(L, dtype=np.int64)
    mid_W = np.zeros(L, dtype=np.int64)
    for p, pos, e in records:
        c = cW[pos]
        t = tW[pos]
        hit = (c < t) & (t <= c + e)
        mid_W[pos[hit]] = p
        cW[pos] = c + e
        c = cw[pos]
        hit = c + 1 == tw[pos]
        mid_w[pos[hit]] = p
        cw[pos] = c + 1
    # the cofactor is the largest prime factor; it is the middle one only
    # when nothing smaller already reached the target index
    left = big & (mid_W == 0)
    mid_W[left] = rem[left]
    left = big & (mid_w == 0)
    mid_w[left] = rem[left]
    return SegmentTables(lo, hi, om, Om, spf, mid_w, mid_W)


def middle_primes(lo: int, hi: int, mode: MiddleMode | str) -> np.ndarray:
    """Middle prime of every n in [lo, hi) (0 for n = 1)."""
    mode = MiddleMode.parse(mode)
    tab = factor_segment(lo, hi, primes_upto(isqrt(hi - 1) + 1))
    return tab.mid_omega if mode is MiddleMode.OMEGA else tab.mid_bigomega


@dataclass
class _Partial:
    # per mode: counts of small middle primes by parity, indexed by prime value
    small_odd: dict
    small_even: dict
    large: list  # middle primes above sqrt(x); each comes from n prime
    spf_hist: dict  # mode -> (cap+1, _MAX_OMEGA) counts by (spf, nu) for spf <= cap
    nu_hist: dict  # mode -> counts by nu over all n in the segment


def _census_segment(args) -> _Partial:
    lo, hi, root, cap, base = args
    try:
        tab = factor_segment(lo, hi, base)
    except MemoryError as exc:  # pragma: no cover - environment dependent
        raise SieveError(lo, hi, exc) from exc
    small_odd, small_even, spf_hist, nu_hist = {}, {}, {}, {}
    large = []
    for mode, nu, mid in (
        (MiddleMode.OMEGA, tab.omega, tab.mid_omega),
        (MiddleMode.BIGOMEGA, tab.bigomega, tab.mid_bigomega),
    ):
        has = mid > 0
        small = has & (mid <= root)
        odd = (nu & 1).astype(bool)
        small_odd[mode] = np.bincount(mid[small & odd], minlength=root + 1)
        small_even[mode] = np.bincount(mid[small & ~odd], minlength=root + 1)
        if mode is MiddleMode.OMEGA:
            large.append(mid[has & (mid > root)])
        idx = tab.spf <= cap
        key = tab.spf[idx] * _MAX_OMEGA + nu[idx]
        spf_hist[mode] = np.bincount(key, minlength=(cap + 1) * _MAX_OMEGA).reshape(
            cap + 1, _MAX_OMEGA
        )
        nu_hist[mode] = np.bincount(nu, minlength=_MAX_OMEGA)
    return _Partial(small_odd, small_even, large, spf_hist, nu_hist)


@dataclass
class Census:
    """Everything one sieve pass over [1, x] yields, as exact integers."""

    x: float
    root: int
    spf_cap: int
    small_odd: dict
    small_even: dict
    large: np.ndarray
    spf_hist: dict
    nu_hist: dict

    def with_spf_above(self, mode: MiddleMode, y: float, strict: bool) -> np.ndarray:
        """Counts by nu of 1 <= n <= x with P^-(n) > y (strict) or >= y.

        n = 1 is included (nu = 0, P^-(1) = +inf).
        """
        y_int = math.floor(y) if strict else math.ceil(y) - 1
        # drop spf <= y_int
        if y_int > self.spf_cap:
            raise ValueError(f"census kept spf histograms only up to {self.spf_cap}")
        total = self.nu_hist[mode].astype(object).copy()
        if y_int >= 2:
            total -= self.spf_hist[mode][2 : y_int + 1].sum(axis=0).astype(object)
        return total


def census(
    x: float,
    segment: int = DEFAULT_SEGMENT,
    workers: int = 1,
    spf_cap: int = DEFAULT_SPF_CAP,
) -> Census:
    n_max = math.floor(x)
    if n_max < 1:
        raise ValueError("census needs x >= 1")
    if segment < 16:
        raise ValueError("segment size too small")
    root = isqrt(n_max)
    base = primes_upto(root + 1)
    bounds = [(lo, min(lo + segment, n_max + 1)) for lo in range(1, n_max + 1, segment)]
    jobs = [(lo, hi, root, spf_cap, base) for lo, hi in bounds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_census_segment, jobs))
    else:
        parts = [_census_segment(j) for j in jobs]

    modes = (MiddleMode.OMEGA, MiddleMode.BIGOMEGA)
    so = {m: sum(p.small_odd[m] for p in parts) for m in modes}
    se = {m: sum(p.small_even[m] for p in parts) for m in modes}
    sh = {m: sum(p.spf_hist[m] for p in parts) for m in modes}
    nh = {m: sum(p.nu_hist[m] for p in parts) for m in modes}
    large = np.concatenate([a for p in parts for a in p.large] or [np.zeros(0, np.int64)])
    return Census(x, root, spf_cap, so, se, large, sh, nh)


# --------------------------------------------------------------------------
# reports


class LocalLaw(Mapping):
    """Read-only map p -> M_nu(x, p) backed by sorted arrays."""

    def __init__(self, primes: np.ndarray, counts: np.ndarray):
        self.primes = np.asarray(primes, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64)

    def __getitem__(self, p):
        i = int(np.searchsorted(self.primes, p))
        if i < self.primes.size and self.primes[i] == p:
            return int(self.counts[i])
        raise KeyError(p)

    def __iter__(self):
        return (int(p) for p in self.primes)

    def __len__(self):
        return int(self.primes.size)

    def __eq__(self, other):
        if isinstance(other, LocalLaw):
            return np.array_equal(self.primes, other.primes) and np.array_equal(
                self.counts, other.counts
            )
        return Mapping.__eq__(self, other)

    def pairs(self) -> list[list[int]]:
        return [[int(p), int(c)] for p, c in zip(self.primes, self.counts)]


@dataclass
class ExactSumReport:
    x: float
    mode: MiddleMode
    total: float
    odd_part: float
    even_part: float
    local_law: LocalLaw = field(repr=False)

    def to_json(self) -> str:
        return json.dumps(
            {
                "x": self.x,
                "mode": self.mode.value,
                "total": self.total,
                "odd_part": self.odd_part,
                "even_part": self.even_part,
                "local_law": self.local_law.pairs(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "ExactSumReport":
        d = json.loads(text)
        law = np.array(d["local_law"], dtype=np.int64).reshape(-1, 2)
        return cls(
            d["x"],
            MiddleMode.parse(d["mode"]),
            d["total"],
            d["odd_part"],
            d["even_part"],
            LocalLaw(law[:, 0], law[:, 1]),
        )


def report_from_census(c: Census, mode: MiddleMode | str) -> ExactSumReport:
    mode = MiddleMode.parse(mode)
    odd = c.small_odd[mode]
    even = c.small_even[mode]
    ps = np.flatnonzero(odd + even)
    large = np.sort(c.large)
    # middle primes above sqrt(x) only come from n prime, where nu(n) = 1
    odd_terms = [int(k) / int(p) for p, k in zip(ps, odd[ps]) if k]
    odd_terms.extend((1.0 / large).tolist())
    even_terms = [int(k) / int(p) for p, k in zip(ps, even[ps]) if k]
    odd_part = math.fsum(odd_terms)
    even_part = math.fsum(even_terms)
    law = LocalLaw(
        np.concatenate((ps, large)),
        np.concatenate(((odd + even)[ps], np.ones(large.size, dtype=np.int64))),
    )
    return ExactSumReport(c.x, mode, odd_part + even_part, odd_part, even_part, law)


def exact_sum(
    x: float, mode: MiddleMode | str, segment: int = DEFAULT_SEGMENT, workers: int = 1
) -> ExactSumReport:
    """S_nu(x): sum over 2 <= n <= x of 1/p_{nu,m}(n), with its parity split."""
    if x < 2:
        raise ValueError("exact_sum needs x >= 2")
    return report_from_census(census(x, segment, workers), mode)


def local_law(x: float, p: int, mode: MiddleMode | str) -> int:
    """M_nu(x, p): how many n <= x have middle prime p."""
    if p > x:
        return 0
    return exact_sum(x, mode).local_law.get(int(p), 0)


def phi_k_exact(x: float, y: float, k: int) -> int:
    """Number of n <= x with P^-(n) > y and exactly k distinct prime factors."""
    if k < 1:
        raise ValueError("k >= 1")
    if x < 2:
        return 0
    c = census(x, spf_cap=max(DEFAULT_SPF_CAP, math.floor(y) + 1))
    counts = c.with_spf_above(MiddleMode.OMEGA, y, strict=True)
    return int(counts[k]) if k < len(counts) else 0


def rough_power_sum_from_counts(counts, z: complex) -> complex:
    """Evaluate sum_k counts[k] z^k (0^0 = 1)."""
    if z == 0:
        return complex(counts[0])
    # exact for rational z; Horner on python complex otherwise
    acc = 0
    for c in reversed(list(counts)):
        acc = acc * z + int(c)
    return complex(acc)


def rough_power_sum_exact(x: float, y: float, z: complex) -> complex:
    """Sum of z^Omega(m) over m <= x with P^-(m) >= y; m = 1 contributes 1."""
    if y < 2:
        raise ValueError("y >= 2")
    c = census(max(x, 1), spf_cap=max(DEFAULT_SPF_CAP, math.ceil(y)))
    counts = c.with_spf_above(MiddleMode.BIGOMEGA, y, strict=False)
    return rough_power_sum_from_counts(counts, z)


# --------------------------------------------------------------------------
# lambda_Omega by enumeration of smooth numbers


@dataclass(frozen=True)
class SmoothSum:
    value: complex
    abs_tail: float  # bound on the terms m > m_cut left out
    terms: int
    omega_cap: int | None


def _rankin_tail(primes, m_cut: float, az: float) -> float:
    """Bound sum_{m > m_cut, P^+(m) <= y} |z|^-Omega(m) / m by Rankin's trick."""
    s_max = 1.0 + math.log2(az)  # need 2^(s-1)/|z| < 1
    best = math.inf
    lp = np.log(np.asarray(primes, dtype=float))
    for s in np.linspace(0.0, s_max, 2001)[1:-1]:
        r = np.exp((s - 1.0) * lp) / az
        if np.any(r >= 1):
            continue
        b = math.exp(-s * math.log(m_cut) - np.sum(np.log1p(-r)))
        best = min(best, b)
    return best


def omega_cap_tail(y: float, z: complex, cap: int) -> float:
    """Bound sum over y-smooth m with Omega(m) > cap of |z|^-Omega(m) / m."""
    az = abs(z)
    primes = primes_upto(y).astype(float)
    best = math.inf
    for v in np.linspace(1.0, 2.0 * az, 2001)[:-1]:
        r = v / (az * primes)
        if np.any(r >= 1):
            continue
        best = min(best, math.exp(-(cap + 1) * math.log(v) - np.sum(np.log1p(-r))))
    return best


def lambda_Omega_exact(
    x: float | None,
    y: float,
    z: complex,
    *,
    xi: float | None = None,
    m_cut: float = 1e12,
    budget: int = 5_000_000,
) -> SmoothSum:
    """Sum of z^-Omega(m)/m over y-smooth m with Omega(m) <= 3 xi / 2.

    ``xi`` (log log x) may be given directly instead of ``x``.  Smooth m are
    enumerated up to ``m_cut``; the left-out tail is bounded by Rankin's
    method and reported as ``abs_tail``.
    """
    if xi is None:
        if x is None:
            raise ValueError("need x or xi")
        xi = math.log(math.log(x))
    if y < 2:
        raise ValueError("y >= 2")
    if abs(z) <= 0.5:
        raise ValueError("need |z| > 1/2")
    cap = math.floor(1.5 * xi + 1e-12)
    primes = [int(p) for p in primes_upto(y)]
    m_cut_int = int(m_cut)

    items = [(1, 0)]
    for q in primes:
        grown = []
        for m, k in items:
            while True:
                grown.append((m, k))
                m *= q
                k += 1
                if m > m_cut_int or k > cap:
                    break
            if len(grown) > budget:
                raise TruncationError(
                    f"more than {budget} smooth numbers below {m_cut:g}",
                    complex("nan"),
                    math.inf,
                )
        items = grown
    items.sort(reverse=True)
    zi = 1 / complex(z)
    terms = [zi**k / m for m, k in items]
    value = complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
    tail = _rankin_tail(primes, m_cut, abs(z))
    return SmoothSum(value, tail, len(items), cap)


def lambda_Omega_limit_rational(y: float) -> Fraction:
    """1/F_Omega(y, 1) = prod_{q <= y} q/(q-1) as an exact rational."""
    out = Fraction(1)
    for q in primes_upto(y):
        out *= Fraction(int(q), int(q) - 1)
    return out

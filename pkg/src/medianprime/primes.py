"""Base prime table shared by the sieve, the Euler products and the saddle sums.

The table is a sorted ``int64`` array of all primes up to some limit.  It can be
cached on disk in a small binary format: the 8-byte magic ``b"MPPRIMES"``
followed by the primes as little-endian unsigned 64-bit integers.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

MAGIC = b"MPPRIMES"
ENV_TABLE = "MEDIANPRIME_PRIME_TABLE"


class PrimeTableError(ValueError):
    """Raised for malformed prime table files or a table that is too short."""


def sieve_primes(limit: int) -> np.ndarray:
    """All primes ``<= limit`` by an odd-only sieve of Eratosthenes."""
    limit = int(limit)
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    if limit < 3:
        return np.array([2], dtype=np.int64)
    # index i stands for 2*i + 1
    size = (limit - 1) // 2 + 1
    is_odd_prime = np.ones(size, dtype=bool)
    is_odd_prime[0] = False
    r = int(limit**0.5) + 1
    for i in range(1, (r - 1) // 2 + 1):
        if is_odd_prime[i]:
            p = 2 * i + 1
            is_odd_prime[(p * p) // 2 :: p] = False
    odd = 2 * np.flatnonzero(is_odd_prime).astype(np.int64) + 1
    return np.concatenate(([2], odd)).astype(np.int64)


def write_prime_table(path: str | os.PathLike, primes: np.ndarray) -> None:
    primes = np.asarray(primes, dtype="<u8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(primes.tobytes())


def read_prime_table(path: str | os.PathLike) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise PrimeTableError(f"{path}: bad magic header {raw[:8]!r}")
    body = raw[8:]
    if len(body) % 8:
        raise PrimeTableError(f"{path}: payload length {len(body)} is not a multiple of 8")
    primes = np.frombuffer(body, dtype="<u8").astype(np.int64)
    if primes.size and (primes[0] != 2 or np.any(np.diff(primes) <= 0)):
        raise PrimeTableError(f"{path}: primes are not a sorted table starting at 2")
    return primes


class PrimeTable:
    """Growable in-memory prime table, optionally seeded from a cache file."""

    def __init__(self, path: str | os.PathLike | None = None):
        self._primes = np.zeros(0, dtype=np.int64)
        self._limit = 1
        if path is None:
            path = os.environ.get(ENV_TABLE)
        if path and Path(path).exists():
            self._primes = read_prime_table(path)
            # a cached table is complete up to its last prime
            self._limit = int(self._primes[-1]) if self._primes.size else 1

    @property
    def limit(self) -> int:
        return self._limit

    def upto(self, n: float) -> np.ndarray:
        """Primes ``<= n``, extending the table if needed."""
        n = int(n)
        if n > self._limit:
            self._primes = sieve_primes(max(n, 2 * self._limit))
            self._limit = max(n, 2 * self._limit)
        return self._primes[: np.searchsorted(self._primes, n, side="right")]

    def below(self, n: float) -> np.ndarray:
        """Primes ``< n`` (strict), for real ``n``."""
        if n <= 2:
            return self._primes[:0]
        ps = self.upto(np.ceil(n))
        if ps.size and ps[-1] >= n:
            ps = ps[:-1]
        return ps

    def nth(self, j: int) -> int:
        """The j-th prime, 1-based (p_1 = 2)."""
        if j < 1:
            raise ValueError("prime index starts at 1")
        while self._primes.size < j:
            self.upto(max(64, 2 * self._limit))
        return int(self._primes[j - 1])


_default: PrimeTable | None = None


def default_table() -> PrimeTable:
    global _default
    if _default is None:
        _default = PrimeTable()
    return _default


def primes_upto(n: float) -> np.ndarray:
    return default_table().upto(n)


def nth_prime(j: int) -> int:
    return default_table().nth(j)

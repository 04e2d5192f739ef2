import math
from collections import Counter
from fractions import Fraction

import pytest

from medianprime.exact import census


def trial_division(n):
    """Prime factors of n with multiplicity, by plain trial division."""
    out, d = [], 2
    while d * d <= n:
        while n % d == 0:
            out.append(d)
            n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def naive_middle(n, mode):
    fs = trial_division(n)
    seq = sorted(set(fs)) if mode == "omega" else fs
    return seq[math.ceil(len(seq) / 2) - 1]


def naive_sum(x, mode):
    """Naive oracle: (local law counts, exact odd part, exact even part) as integers and fractions."""
    law = Counter()
    odd = even = Fraction(0)
    for n in range(2, int(x) + 1):
        fs = trial_division(n)
        k = len(set(fs)) if mode == "omega" else len(fs)
        p = naive_middle(n, mode)
        law[p] += 1
        if k % 2:
            odd += Fraction(1, p)
        else:
            even += Fraction(1, p)
    return dict(law), odd, even


_CENSUS = {}


def get_census(x):
    """One sieve pass per x for the whole session."""
    if x not in _CENSUS:
        _CENSUS[x] = census(x)
    return _CENSUS[x]


@pytest.fixture(scope="session")
def census_at():
    return get_census


# acceptance outcomes, criterion number -> (title, passed, detail)
ACCEPTANCE = {}


def acceptance_lines():
    return [
        f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        for n, (title, ok, detail) in sorted(ACCEPTANCE.items())
    ]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines():
            terminalreporter.write_line(line)

import math
import random
import warnings

import numpy as np
import pytest
from scipy import integrate

from medianprime.exact import phi_k_exact, report_from_census, rough_power_sum_exact
from medianprime.primes import PrimeTableError, primes_upto
from medianprime.saddle import (
    I_asymptotic,
    I_numeric,
    SaddleState,
    local_scaling_predict,
    log_F_omega,
    log_s_omega_expansion,
    logF_expansion,
    main_term_parts,
    mu_of,
    phi_k_asymp,
    psi,
    psi_hybrid,
    rho_expansion,
    rho_window,
    rough_power_sum_asymp,
    s_Omega_expansion,
    s_omega_main_term,
    s_omega_main_term_forms,
    solve_nu,
    solve_rho,
)


def quiet(f, *a, **k):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return f(*a, **k)


# ---------------------------------------------------------------- Psi


def test_psi_examples():
    # no prime below e^0.5; only q = 2 below e^1
    assert psi(2.0, 0.5) == pytest.approx(8.0, rel=1e-15)
    assert psi(10.0, 1.0) == pytest.approx(10.0 - 0.5, rel=1e-15)
    v = math.log(3)
    below, above = psi(5.0, v * (1 - 1e-12)), psi(5.0, v * (1 + 1e-12))
    assert above - below == pytest.approx(-1 / (2 + v), rel=1e-6)


def test_psi_needs_table():
    with pytest.raises(PrimeTableError):
        psi(100.0, 30.0)


def test_psi_hybrid_matches_exact_inside_cutoff():
    for v in (3.0, 7.5, 12.0):
        assert psi_hybrid(500.0, v) == psi(500.0, v)


@pytest.mark.parametrize("xi", [100.0, 1e4])
def test_psi_strictly_decreasing(xi):
    lo, hi = rho_window(xi)
    grid = list(np.linspace(lo, hi, 400))
    # straddle every jump point log q inside the window
    for q in primes_upto(math.exp(min(hi, math.log(1e7)))):
        lq = math.log(int(q))
        if lo < lq < hi:
            grid += [lq * (1 - 1e-12), lq * (1 + 1e-12)]
    grid.sort()
    vals = [psi_hybrid(xi, v) for v in grid]
    assert all(a > b for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------- rho


def test_solve_rho_postconditions_xi_100():
    st = solve_rho(100.0)
    lo, hi = st.window
    assert lo == pytest.approx(4.66, abs=0.01) and hi == pytest.approx(10.42, abs=0.01)
    assert lo <= st.rho <= hi
    assert psi(100.0, st.rho * (1 - 1e-6)) > 0 >= psi(100.0, st.rho * (1 + 1e-6))
    a, b = st.bracket
    assert psi(100.0, a) > 0 >= psi(100.0, b) and b - a <= 1e-12 * b


def test_solve_rho_matches_fine_scan():
    grid = np.linspace(*rho_window(100.0), 20001)
    first = next(v for v in grid if psi(100.0, v) <= 0)
    assert solve_rho(100.0).rho == pytest.approx(first, abs=grid[1] - grid[0])


@pytest.mark.parametrize("xi", [50.0, 100.0, 500.0])
def test_psi_at_rho_small(xi):
    st = solve_rho(xi)
    assert abs(st.psi_at_rho) <= 1 / (math.exp(st.rho) - 1 + st.rho) + st.slack


def test_solve_rho_bracketing_random():
    rng = random.Random(11)
    for _ in range(40):
        xi = 10 ** rng.uniform(1, 10)
        st = solve_rho(xi)
        a, b = st.bracket
        assert psi_hybrid(xi, a) > 0 >= psi_hybrid(xi, b)


def test_solve_rho_domain_and_json():
    with pytest.raises(ValueError):
        solve_rho(1.0)
    st = solve_rho(1e8)
    assert st.method == "hybrid"
    assert SaddleState.from_json(st.to_json()) == st


# ---------------------------------------------------------------- I, nu


def test_I_numeric_oracle():
    want = integrate.quad(lambda t: 1 / ((t - 1 + 5) * math.log(t)), 2, math.exp(5), epsabs=0, epsrel=1e-13)[0]
    assert I_numeric(5.0) == pytest.approx(want, rel=1e-10)
    assert I_numeric(10.0) < I_numeric(20.0)
    with pytest.raises(ValueError):
        I_numeric(1.5)


def test_I_asymptotic():
    v = 1e3
    assert I_asymptotic(v, 0) == pytest.approx(math.log(v / math.log(v)), rel=1e-15)
    assert I_asymptotic(v, 1) - I_asymptotic(v, 0) == pytest.approx(math.pi**2 / 6 / math.log(v) ** 2, rel=1e-14)
    errs = [abs(I_numeric(v) - I_asymptotic(v, J)) for J in (0, 1, 2)]
    assert errs[0] > errs[1] > errs[2]
    # the J=1 error is the J=2 term plus a J=3 term about a quarter its size, hence the 2
    v = 1e4
    assert abs(I_numeric(v) - I_asymptotic(v, 1)) <= 2 * abs(I_asymptotic(v, 2) - I_asymptotic(v, 1))


def test_nu():
    nu = solve_nu(100.0)
    assert abs(nu * nu * I_numeric(nu) - 100.0) <= 1e-9
    d3 = abs(solve_nu(1e3) / mu_of(1e3) - 1)
    d6 = abs(solve_nu(1e6) / mu_of(1e6) - 1)
    assert d6 < d3


@pytest.mark.parametrize("xi", [1e3, 1e4])
def test_rho_close_to_nu(xi):
    st = solve_rho(xi)
    assert abs(st.rho / st.nu - 1) <= math.exp(-0.4 * math.sqrt(math.log(xi)))


@pytest.mark.parametrize("xi", [1e4, 1e6, 1e8])
def test_rho_approximate_equation(xi):
    rho = solve_rho(xi).rho
    assert abs(xi / rho**2 - I_numeric(rho)) <= 5 * math.exp(-math.sqrt(math.log(rho)))


def test_rho_expansion():
    assert rho_expansion(1e8, 0) == mu_of(1e8)
    L = math.log(1e8)
    X = math.log(L)
    assert rho_expansion(1e8, 1) == pytest.approx(mu_of(1e8) * (1 + (1.5 * X - 1.5 * math.log(2)) / L), rel=1e-14)
    with pytest.raises(ValueError):
        rho_expansion(1e8, 99)


# ---------------------------------------------------------------- log F


def test_logF_expansion_examples():
    v = 100.0
    assert logF_expansion(v, 0) == pytest.approx(v * math.log(v / math.log(v)), rel=1e-15)
    assert logF_expansion(v, 1) - logF_expansion(v, 0) == pytest.approx(v / math.log(v), rel=1e-14)
    assert logF_expansion(v, 1, corrected=False) - logF_expansion(v, 0) == pytest.approx(2 * v / math.log(v), rel=1e-14)


def test_log_F_omega_exact_inside_table():
    v = 12.0
    q = primes_upto(math.exp(v)).astype(float)
    want = math.fsum(np.log1p(v / (q - 1)).tolist())
    got, how = log_F_omega(v)
    assert how == "exact" and got == pytest.approx(want, rel=1e-14)


def test_logF_expansion_error_shrinks():
    def scaled(v, corrected):
        exact, _ = log_F_omega(v)
        return abs(exact - logF_expansion(v, 3, corrected)) / (v / math.log(v) ** 3)

    assert scaled(200.0, True) < scaled(50.0, True)
    assert scaled(200.0, False) > scaled(50.0, False)


# ---------------------------------------------------------------- main term


def test_main_term_forms_agree():
    for x in (1e8, 1e12, 1e30):
        a, b = quiet(s_omega_main_term_forms, x)
        assert abs(a - b) <= 1e-12 * abs(b)


def test_main_term_growth_and_warning():
    assert s_omega_main_term(1e12) > s_omega_main_term(1e9) > 0
    with pytest.warns(UserWarning, match="below x0"):
        s_omega_main_term(1e5)


def test_log_expansion_consistency():
    assert log_s_omega_expansion(xi=1e6, J=0) == pytest.approx(math.sqrt(2e6 * math.log(1e6)), rel=1e-15)
    for xi in (1e6, 1e8):
        L = math.log(xi)
        X = math.log(L)
        gap = abs(main_term_parts(xi=xi).log_ratio - log_s_omega_expansion(xi=xi, J=3))
        assert gap <= math.sqrt(xi / L**5) * X**4


def test_local_scaling():
    x = 1e9
    same = local_scaling_predict(x, 0.0)
    assert same.predicted == s_omega_main_term(x) and same.rho_shift == 0
    devs = [abs(local_scaling_predict(xi=xi, h=1e-3).log_ratio) for xi in (1e2, 1e4, 1e6)]
    assert devs[0] > devs[1] > devs[2]
    for xi in (1e2, 1e4, 1e6, 1e8):
        shift = local_scaling_predict(xi=xi, h=1e-3).rho_shift
        assert abs(shift) * math.log(math.log(xi)) ** 2 <= 10
    with pytest.raises(ValueError):
        local_scaling_predict(x, -1.0)


# ---------------------------------------------------------------- Alladi and S_Omega


def test_phi_k_asymp():
    assert phi_k_asymp(1e7, 5, 1) == pytest.approx(1e7 / math.log(1e7), rel=1e-14)
    assert 0.5 <= phi_k_exact(1e7, 5, 2) / phi_k_asymp(1e7, 5, 2) <= 2
    with pytest.raises(ValueError):
        phi_k_asymp(1e7, 2, 2)
    with pytest.raises(ValueError):
        phi_k_asymp(1e7, 1e6, 2)


def test_rough_power_sum_asymp():
    assert rough_power_sum_asymp(1e7, 5, 0) == 0
    ratio = rough_power_sum_exact(1e7, 5, 1) / rough_power_sum_asymp(1e7, 5, 1)
    assert abs(ratio - 1) <= 0.2
    with pytest.raises(ValueError):
        rough_power_sum_asymp(1e7, 5, 2.5)


def test_s_Omega_expansion_terms():
    x = 1e8
    lx = math.log(x)
    j1 = s_Omega_expansion(x, 1)
    assert j1 == pytest.approx(1.380486 * x / math.sqrt(lx), rel=5e-6)
    assert s_Omega_expansion(x, 2) < j1


def test_Omega_parity_trend(census_at):
    ratios = []
    for x in (10**5, 10**6, 10**7):
        r = report_from_census(census_at(x), "bigomega")
        ratios.append(r.even_part / r.odd_part)
    assert all(abs(b - 2) < abs(a - 2) for a, b in zip(ratios, ratios[1:]))


@pytest.mark.slow
def test_omega_parity_tracks_rho(census_at):
    x = 10**8
    r = report_from_census(census_at(x), "omega")
    rho = solve_rho(math.log(math.log(x))).rho
    assert 0.3 <= r.even_part / r.odd_part / rho <= 3

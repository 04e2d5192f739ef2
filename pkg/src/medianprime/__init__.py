"""Sums of reciprocals of the middle prime factor of the integers up to x."""

from .exact import (
    ExactSumReport,
    Factorization,
    MiddleMode,
    census,
    exact_sum,
    factorize,
    lambda_Omega_exact,
    local_law,
    middle_prime,
    phi_k_exact,
    rough_power_sum_exact,
)
from .products import ConstantReport, F_finite, constant_c, residue_G_Omega, script_F, script_G_Omega
from .saddle import (
    SaddleState,
    I_asymptotic,
    I_numeric,
    local_scaling_predict,
    log_s_omega_expansion,
    logF_expansion,
    phi_k_asymp,
    psi,
    rho_expansion,
    rough_power_sum_asymp,
    s_Omega_expansion,
    s_omega_main_term,
    solve_nu,
    solve_rho,
)
from .series import cascade_P, cascade_R, lagrange_An

__all__ = [name for name in dir() if not name.startswith("_")]

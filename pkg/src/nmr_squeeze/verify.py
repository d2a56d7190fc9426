"""Machine-checkable verification suites.

Each suite returns a JSON-ready report: a list of named checks with measured
values and thresholds, plus an overall pass flag.  The CLI serializes the
report and maps failures to exit code 2.
"""

from __future__ import annotations

import math

import numpy as np

from .calibration import (
    CONSTANT_FACTOR_SWEEP,
    diffusion_factor_matching_law,
    sweep_constant_factors,
)
from .constants import HBAR
from .core import make_state
from .device import DerivedCouplings
from .hamiltonians import (
    HamiltonianKind,
    build_effective,
    build_parametric,
    build_rwa,
    build_total,
    conjugate_by_generator,
    excitation_weight_op,
    frohlich_generator,
    frohlich_term_report,
    full_space,
    nmr_space,
    two_mode_space,
)
from .squeezing import (
    SqueezeSpec,
    apply_squeeze,
    bogoliubov_report,
    predicted_variances,
    quadrature_variances,
)


def _check(name: str, measured: float, threshold: float, passed: bool,
           **extra) -> dict:
    out = {"name": name, "measured": measured, "threshold": threshold,
           "passed": bool(passed)}
    out.update(extra)
    return out


def _finish(suite: str, checks: list[dict], **extra) -> dict:
    report = {"suite": suite, "passed": all(c["passed"] for c in checks),
              "checks": checks}
    report.update(extra)
    return report


COEFF_REL_TOL = 1e-10
COEFF_ABS_TOL = 1e-9
SCALING_RANGE = (6.8, 9.2)


def run_frohlich_suite(c: DerivedCouplings, n_small: int = 6,
                       n_report: int = 8) -> dict:
    """Second-order elimination: term-by-term coefficients, residual scaling
    under coupling halving, spectrum preservation of the exact conjugation."""
    checks = []

    space = full_space(n_report, n_report)
    rep = frohlich_term_report(c, space)
    scale = max(abs(t.expected) for t in rep.coefficients)
    for t in rep.coefficients:
        if t.expected != 0.0:
            checks.append(_check(
                f"coefficient[{t.label}]", t.relative_error, COEFF_REL_TOL,
                t.relative_error <= COEFF_REL_TOL,
                measured_value=t.measured, expected_value=t.expected))
        else:
            rel_abs = t.absolute_error / scale
            checks.append(_check(
                f"coefficient[{t.label}] (absent term)", rel_abs, COEFF_ABS_TOL,
                rel_abs <= COEFF_ABS_TOL,
                measured_value=t.measured, expected_value=0.0))

    def residual(scale_g: float) -> float:
        cc = DerivedCouplings.from_rates(
            Omega=c.Omega, omega_a=c.omega_a, omega_b=c.omega_b,
            g_a=c.g_a * scale_g, g_b=c.g_b * scale_g)
        sp = full_space(n_small, n_small)
        h = build_rwa(cc, sp)
        s = frohlich_generator(cc, sp)
        exact = conjugate_by_generator(h, s, "exact").dense()
        bch = conjugate_by_generator(h, s, "bch2").dense()
        return float(np.linalg.norm(exact - bch))

    ratio = residual(1.0) / residual(0.5)
    checks.append(_check("third_order_scaling_ratio", ratio, SCALING_RANGE[1],
                         SCALING_RANGE[0] <= ratio <= SCALING_RANGE[1],
                         expected_range=list(SCALING_RANGE)))

    sp = full_space(n_small, n_small)
    h = build_rwa(c, sp)
    s = frohlich_generator(c, sp)
    exact = conjugate_by_generator(h, s, "exact")
    ev_before = np.sort(np.linalg.eigvalsh(h.dense())) / HBAR
    ev_after = np.sort(np.linalg.eigvalsh(exact.dense())) / HBAR
    spec_err = float(np.max(np.abs(ev_before - ev_after))
                     / max(1.0, np.max(np.abs(ev_before))))
    checks.append(_check("exact_conjugation_preserves_spectrum", spec_err,
                         1e-10, spec_err <= 1e-10))

    return _finish("frohlich", checks,
                   remainder_terms=[dict(t) for t in rep.remainder_terms],
                   remainder_norm=rep.remainder_norm,
                   bch_norm=rep.bch_norm)


def run_rwa_suite(c: DerivedCouplings, n_a: int = 6, n_b: int = 8) -> dict:
    """Structure of the rotating-wave and effective Hamiltonians."""
    checks = []
    space = full_space(n_a, n_b)
    h = build_rwa(c, space)

    checks.append(_check("rwa_hermiticity", h.hermiticity_defect(), 1e-12,
                         h.hermiticity_defect() <= 1e-12))

    m_op = excitation_weight_op(space)
    comm = h.matrix @ m_op.matrix - m_op.matrix @ h.matrix
    comm_max = 0.0 if comm.nnz == 0 else float(np.abs(comm.data).max())
    checks.append(_check("rwa_excitation_weight_conserved", comm_max, 0.0,
                         comm_max == 0.0))

    dense = h.dense()

    def idx(q, na, nb):
        return (q * n_a + na) * n_b + nb

    el = dense[idx(1, 0, 0), idx(0, 1, 0)]
    err = abs(el - HBAR * c.g_a) / (abs(HBAR * c.g_a) or 1.0)
    checks.append(_check("rwa_element_photon_exchange", err, 1e-12, err <= 1e-12))

    el = dense[idx(1, 0, 0), idx(0, 0, 2)]
    target = HBAR * c.g_b * math.sqrt(2.0)
    err = abs(el - target) / abs(target)
    checks.append(_check("rwa_element_two_phonon_exchange", err, 1e-12,
                         err <= 1e-12))

    # decoupled spectrum of the charge-basis total Hamiltonian at lambda = 0
    c0 = DerivedCouplings.from_rates(
        Omega=c.Omega, omega_a=c.omega_a, omega_b=c.omega_b, g_a=0.0, g_b=0.0,
        lambda_a=0.0, lambda_b=0.0, theta=c.theta)
    h0 = build_total(c0, space)
    ev = np.sort(np.linalg.eigvalsh(h0.dense())) / HBAR
    expected = np.sort([
        c.omega_a * na + c.omega_b * nb + s * c.Omega / 2.0
        for na in range(n_a) for nb in range(n_b) for s in (-1.0, 1.0)
    ])
    err = float(np.max(np.abs(ev - expected)) / np.max(np.abs(expected)))
    checks.append(_check("total_decoupled_spectrum", err, 1e-12, err <= 1e-12))

    # parity: conversion and parametric Hamiltonians never mix NMR parity
    pair_space = two_mode_space(n_a, n_b)
    h_pdc = build_effective(c, pair_space, HamiltonianKind.PDC).dense()
    parity = np.array([(nb % 2) for na in range(n_a) for nb in range(n_b)])
    mix = h_pdc[np.ix_(parity == 0, parity == 1)]
    mix_max = float(np.abs(mix).max()) if mix.size else 0.0
    checks.append(_check("pdc_preserves_nmr_parity", mix_max, 0.0, mix_max == 0.0))

    h_par = build_parametric(abs(c.kappa) or 1.0, 1.0, math.pi / 2, nmr_space(n_b))
    hd = h_par.dense()
    par_b = np.arange(n_b) % 2
    mix = hd[np.ix_(par_b == 0, par_b == 1)]
    mix_max = float(np.abs(mix).max()) if mix.size else 0.0
    checks.append(_check("parametric_preserves_nmr_parity", mix_max, 0.0,
                         mix_max == 0.0))

    return _finish("rwa", checks)


def run_bogoliubov_suite(dim: int = 60) -> dict:
    checks = []
    space = nmr_space(dim)
    rep0 = bogoliubov_report(0.0, space)
    checks.append(_check("residual_at_zero", rep0.residual, 1e-14,
                         rep0.residual <= 1e-14))
    rep = bogoliubov_report(0.5, space)
    checks.append(_check("residual_xi_0.5_lower_two_thirds", rep.residual,
                         1e-8, rep.residual <= 1e-8,
                         raw_same_space_residual=rep.raw_residual,
                         guard_dim=rep.guard_dim))
    tops = [bogoliubov_report(x, space).raw_top_residual
            for x in (0.1, 0.3, 0.5)]
    monotone = tops[0] <= tops[1] <= tops[2]
    checks.append(_check("raw_top_residual_grows_with_xi", tops[-1], math.inf,
                         monotone, series=tops))
    return _finish("bogoliubov", checks)


def run_squeeze_law_suite(dim: int = 128) -> dict:
    """Numeric-vs-analytic squeezing laws; dim must carry enough headroom
    for the largest xi (128 keeps the xi = 1.2 truncation error ~1e-8)."""
    checks = []
    space = nmr_space(dim)
    vac = make_state(space, {"b": 0})
    for xi in (0.2, 0.5, 0.8, 1.2):
        st = apply_squeeze(SqueezeSpec(xi=xi, phi=math.pi / 2), vac)
        pair = quadrature_variances(st)
        ideal = predicted_variances(xi, mode="ideal")
        err_x = abs(pair.dx - ideal.dx) / ideal.dx
        err_p = abs(pair.dp - ideal.dp) / ideal.dp
        checks.append(_check(f"dx_law_xi_{xi}", err_x, 1e-6, err_x <= 1e-6))
        checks.append(_check(f"dp_law_xi_{xi}", err_p, 1e-6, err_p <= 1e-6))
        prod_err = abs(pair.dx * pair.dp - 1.0)
        checks.append(_check(f"uncertainty_product_xi_{xi}", prod_err, 1e-6,
                             prod_err <= 1e-6))
    # drive-phase covariance: phi + 2pi is the identity; phi + pi rotates the
    # squeezing axis by pi/2 and swaps the quadratures
    st1 = apply_squeeze(SqueezeSpec(xi=0.6, phi=math.pi / 2), vac)
    st2 = apply_squeeze(SqueezeSpec(xi=0.6, phi=math.pi / 2 + 2 * math.pi), vac)
    st3 = apply_squeeze(SqueezeSpec(xi=0.6, phi=3 * math.pi / 2), vac)
    v1 = quadrature_variances(st1)
    v2 = quadrature_variances(st2)
    v3 = quadrature_variances(st3)
    err = max(abs(v1.dx - v2.dx), abs(v1.dp - v2.dp))
    checks.append(_check("phase_period_two_pi", err, 1e-9, err <= 1e-9))
    err = max(abs(v1.dx - v3.dp), abs(v1.dp - v3.dx))
    checks.append(_check("phase_shift_pi_swaps_quadratures", err, 1e-9,
                         err <= 1e-9))
    return _finish("squeeze-law", checks)


def run_noise_calibration_report(xi: float = 1.0, r: float = 0.01) -> dict:
    """Archive of the diffusion-convention sweep and the matched factor."""
    deep = sweep_constant_factors(3.0, 0.001)
    local = sweep_constant_factors(xi, r)
    return {
        "suite": "noise-calibration",
        "passed": True,
        "constant_factor_sweep": list(CONSTANT_FACTOR_SWEEP),
        "asymptotic_regime": deep,
        "target_regime": local,
        "matched_factor_at_target": diffusion_factor_matching_law(xi),
        "note": ("no constant diffusion factor reproduces the asymptotic law "
                 "at finite xi; calibrated runs use the matched factor"),
    }


SUITES = {
    "frohlich": "couplings",
    "rwa": "couplings",
    "bogoliubov": "plain",
    "squeeze-law": "plain",
}


def run_suite(name: str, couplings: DerivedCouplings | None = None) -> dict:
    if name == "frohlich":
        return run_frohlich_suite(couplings)
    if name == "rwa":
        return run_rwa_suite(couplings)
    if name == "bogoliubov":
        return run_bogoliubov_suite()
    if name == "squeeze-law":
        return run_squeeze_law_suite()
    raise ValueError(f"unknown verify suite {name!r}")

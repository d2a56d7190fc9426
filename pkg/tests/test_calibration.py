import math

import numpy as np

from nmr_squeeze.calibration import (
    asymptotic_law_variance,
    diffusion_factor_matching_law,
    sweep_constant_factors,
    wiener_model_variance,
    wiener_noise_bracket,
)


def test_bracket_asymptotics():
    # converges to the asymptotic law's noise gain as xi grows
    for xi in (4.0, 6.0, 8.0):
        ratio = wiener_noise_bracket(xi) / (0.5 * xi * math.exp(2 * xi))
        assert abs(ratio - 1.0) <= 1.5 / xi
    # and is quadratically small at small xi (the law's linear term is an
    # artifact of its validity domain)
    assert wiener_noise_bracket(1e-3) <= 2e-6


def test_matched_factor_frozen_value():
    assert abs(diffusion_factor_matching_law(1.0) - 2.1685165482230695) <= 1e-12
    assert abs(wiener_model_variance(1.0, 0.01, 1.0) - 0.15237240500768107) <= 1e-15
    assert abs(asymptotic_law_variance(1.0, 0.01) - 0.17228056373126596) <= 1e-15


def test_matched_factor_reproduces_law_exactly_at_target():
    for xi in (0.5, 1.0, 2.0):
        c = diffusion_factor_matching_law(xi)
        assert abs(wiener_model_variance(xi, 0.01, c)
                   - asymptotic_law_variance(xi, 0.01)) <= 1e-14


def test_constant_sweep_archive():
    report = sweep_constant_factors(3.0, 0.001)
    assert [row["diffusion_factor"] for row in report["sweep"]] == [0.5, 1.0, 2.0]
    # deep in the validity regime the correct constant convention is 1
    assert report["best_constant_factor"] == 1.0
    assert report["matched_factor"] > 1.0


def test_wiener_bracket_against_covariance_monte_carlo():
    """Independent oracle: the 2x2 symplectic covariance-matrix MC of the
    phase-diffused squeezer (exact per piecewise-constant phase step)."""
    rng = np.random.default_rng(424242)
    a, r, xi, cd = 1.0, 0.01, 1.0, 1.0
    ntraj, nsteps = 4000, 250
    tau = xi / a
    dt = tau / nsteps
    sig = math.sqrt(2 * cd * (r * a) * dt)
    ch, sh = math.cosh(a * dt), math.sinh(a * dt)
    var = np.empty(ntraj)
    for j in range(ntraj):
        eps = 0.0
        m = np.eye(2)
        incs = rng.standard_normal(nsteps) * sig
        for k in range(nsteps):
            c_, s_ = math.cos(eps), math.sin(eps)
            step = np.array([[ch - sh * c_, sh * s_], [sh * s_, ch + sh * c_]])
            m = step @ m
            eps += incs[k]
        var[j] = m[0, 0] ** 2 + m[0, 1] ** 2
    mean = var.mean()
    se = var.std(ddof=1) / math.sqrt(ntraj)
    assert abs(mean - wiener_model_variance(xi, r, cd)) <= 4.0 * se

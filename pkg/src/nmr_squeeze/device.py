"""Circuit parameters and every derived coupling symbol.

Maps raw device quantities (Josephson energy, gate charge, field, geometry,
mode frequencies) to the mixing angle, qubit splitting, linear and quadratic
couplings, detunings and the down-conversion rate kappa, and validates the
operating-regime inequalities.  Pure functions over frozen records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

from .constants import E_CHARGE, H_PLANCK, HBAR, PHI0, TWO_PI
from .errors import ConfigError, DegenerateMixingAngleError

# JSON field names accepted for a device block (strict mode rejects others).
_DEVICE_FIELDS = {
    "EJ_over_h", "Omega_over_2pi", "Ec_over_h", "n_g", "m", "Cg_over_CSigma",
    "V0", "B", "W", "omega_a_over_2pi", "omega_b_over_2pi", "x0", "M",
    "beta", "phi",
}


@dataclass(frozen=True)
class DeviceParams:
    """Raw circuit quantities, SI units throughout.

    Exactly one of `Omega_over_2pi` / `Ec_over_h` and exactly one of
    `x0` / `M` must be supplied; the missing partner is back-solved.
    """

    EJ_over_h: float                 # Josephson energy / h, Hz
    n_g: float                       # dimensionless gate charge
    Cg_over_CSigma: float            # gate to total capacitance ratio
    V0: float                        # resonator zero-point voltage, V
    B: float                         # magnetic field, T
    W: float                         # SQUID loop width, m
    omega_a_over_2pi: float          # resonator mode frequency, Hz
    omega_b_over_2pi: float          # mechanical mode frequency, Hz
    m: int = 0                       # flux-bias integer, Phi_e^0 = m Phi_0
    Omega_over_2pi: Optional[float] = None   # qubit splitting / 2pi, Hz
    Ec_over_h: Optional[float] = None        # charging energy / h, Hz
    x0: Optional[float] = None       # mechanical zero-point length, m
    M: Optional[float] = None        # mechanical mass, kg
    beta: float = 0.0                # drive amplitude (dimensionless)
    phi: float = 0.0                 # drive phase, rad

    def __post_init__(self):
        for name in ("EJ_over_h", "omega_a_over_2pi", "omega_b_over_2pi"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not 0.0 <= self.n_g <= 1.0:
            raise ConfigError(f"n_g = {self.n_g} outside [0, 1]")
        if (self.Omega_over_2pi is None) == (self.Ec_over_h is None):
            raise ConfigError("supply exactly one of Omega_over_2pi / Ec_over_h")
        if (self.x0 is None) == (self.M is None):
            raise ConfigError("supply exactly one of x0 / M")
        if self.Omega_over_2pi is not None and self.Omega_over_2pi <= 0:
            raise ConfigError("Omega_over_2pi must be positive")
        if self.Ec_over_h is not None and self.Ec_over_h <= 0:
            raise ConfigError("Ec_over_h must be positive")
        if self.beta < 0:
            raise ConfigError("beta must be >= 0")

    @classmethod
    def from_json_dict(cls, raw: dict) -> "DeviceParams":
        """Strict ingestion: unknown keys are rejected to catch typos."""
        unknown = set(raw) - _DEVICE_FIELDS
        if unknown:
            raise ConfigError(f"unknown device fields: {sorted(unknown)}")
        missing = {"EJ_over_h", "n_g", "Cg_over_CSigma", "V0", "B", "W",
                   "omega_a_over_2pi", "omega_b_over_2pi"} - set(raw)
        if missing:
            raise ConfigError(f"missing device fields: {sorted(missing)}")
        kwargs = dict(raw)
        if "m" in kwargs:
            kwargs["m"] = int(kwargs["m"])
        return cls(**kwargs)

    def zero_point_length(self) -> float:
        if self.x0 is not None:
            return self.x0
        omega_b = TWO_PI * self.omega_b_over_2pi
        return math.sqrt(HBAR / (2.0 * self.M * omega_b))

    def mass(self) -> float:
        if self.M is not None:
            return self.M
        omega_b = TWO_PI * self.omega_b_over_2pi
        return HBAR / (2.0 * omega_b * self.x0 ** 2)

    def ec_times_asymmetry(self) -> float:
        """E_c (2 n_g - 1) in joules.

        When only the splitting Omega is given, |E_c(1-2n_g)| is back-solved
        from (hbar Omega)^2 = E_c^2 (1-2n_g)^2 + 4 E_J^2 and the sign taken
        from n_g vs 1/2.  At the degeneracy point n_g = 1/2 the asymmetry is
        identically zero whatever E_c.
        """
        if self.n_g == 0.5:
            return 0.0
        ej = self.EJ_over_h * H_PLANCK
        if self.Ec_over_h is not None:
            return self.Ec_over_h * H_PLANCK * (2.0 * self.n_g - 1.0)
        h_omega = self.Omega_over_2pi * H_PLANCK
        radicand = h_omega ** 2 - (2.0 * ej) ** 2
        if radicand < 0:
            raise ConfigError(
                "Omega_over_2pi is below 2 EJ_over_h; no real charging energy")
        mag = math.sqrt(radicand)
        return mag if self.n_g > 0.5 else -mag


@dataclass(frozen=True)
class DerivedCouplings:
    """Every derived symbol of the coupling chain (angular frequencies, rad/s)."""

    lambda_a: float
    lambda_b: float
    theta: float
    sin_theta: float
    cos_theta: float
    Omega: float
    g_a: float
    g_b: float
    omega_a: float
    omega_b: float
    Delta_a: float
    Delta_b: float
    delta: float
    kappa: float
    x0: float
    p0: float

    @classmethod
    def from_rates(cls, *, Omega: float, omega_a: float, omega_b: float,
                   g_a: float, g_b: float, lambda_a: float = 0.0,
                   lambda_b: float = 0.0, theta: float = 0.0,
                   x0: float = 1.0, p0: float = 1.0) -> "DerivedCouplings":
        """Assemble couplings directly from rates (scaled-units workflows)."""
        Delta_a = Omega - omega_a
        Delta_b = Omega - 2.0 * omega_b
        kappa = _kappa(g_a, g_b, Delta_a, Delta_b)
        return cls(lambda_a=lambda_a, lambda_b=lambda_b, theta=theta,
                   sin_theta=math.sin(theta), cos_theta=math.cos(theta),
                   Omega=Omega, g_a=g_a, g_b=g_b, omega_a=omega_a,
                   omega_b=omega_b, Delta_a=Delta_a, Delta_b=Delta_b,
                   delta=2.0 * omega_b - omega_a, kappa=kappa, x0=x0, p0=p0)


def _kappa(g_a: float, g_b: float, Delta_a: float, Delta_b: float) -> float:
    if Delta_a == 0.0 or Delta_b == 0.0:
        return math.nan
    return -0.5 * g_a * g_b * (1.0 / Delta_a + 1.0 / Delta_b)


def derive_couplings(params: DeviceParams, *,
                     allow_degenerate: bool = False) -> DerivedCouplings:
    """Evaluate the full coupling chain from device parameters.

    The mixing angle is theta = atan2((-1)^m 2 E_J, E_c (2 n_g - 1)); with
    the standard coupling formulas g_a = -lambda_a sin(theta) and
    g_b = lambda_b cos(theta) this phase-reference convention makes kappa
    positive for n_g > 1/2 and negative for n_g < 1/2, which is the sign
    convention used throughout the reports.
    """
    if params.n_g == 0.5 and not allow_degenerate:
        raise DegenerateMixingAngleError(
            "n_g = 1/2 makes cos(theta) = 0 and g_b = 0; pass "
            "allow_degenerate=True (or the --allow-degenerate flag) to proceed")
    ej = params.EJ_over_h * H_PLANCK
    sign_m = -1.0 if params.m % 2 else 1.0
    ec_asym = params.ec_times_asymmetry()

    theta = math.atan2(sign_m * 2.0 * ej, ec_asym)
    h_omega = math.hypot(2.0 * ej, ec_asym)
    Omega = h_omega / HBAR
    # sin/cos from the defining ratios: exact zeros survive (cos(pi/2) via
    # math.cos would leave 6e-17 round-off and a spurious g_b)
    sin_t = sign_m * 2.0 * ej / h_omega
    cos_t = ec_asym / h_omega

    omega_a = TWO_PI * params.omega_a_over_2pi
    omega_b = TWO_PI * params.omega_b_over_2pi
    x0 = params.zero_point_length()
    p0 = HBAR / (2.0 * x0)

    lam_a = E_CHARGE * params.Cg_over_CSigma * params.V0 / HBAR
    lam_b = sign_m * ej * (math.pi * params.B * params.W) ** 2 * x0 ** 2 \
        / (2.0 * HBAR * PHI0 ** 2)

    g_a = -lam_a * sin_t
    g_b = lam_b * cos_t
    Delta_a = Omega - omega_a
    Delta_b = Omega - 2.0 * omega_b

    return DerivedCouplings(
        lambda_a=lam_a, lambda_b=lam_b, theta=theta, sin_theta=sin_t,
        cos_theta=cos_t, Omega=Omega, g_a=g_a, g_b=g_b, omega_a=omega_a,
        omega_b=omega_b, Delta_a=Delta_a, Delta_b=Delta_b,
        delta=2.0 * omega_b - omega_a,
        kappa=_kappa(g_a, g_b, Delta_a, Delta_b), x0=x0, p0=p0)


def josephson_expansion(params: DeviceParams, flux_bias_phi0_units: float,
                        order: int) -> list[float]:
    """Taylor coefficients c_0..c_order (J/m^n) of the flux-modulated
    Josephson energy -E_J cos(pi (Phi_e^0 + B W x)/Phi_0) about x = 0."""
    if order > 6:
        raise ConfigError(f"expansion order {order} exceeds the supported 6")
    if order < 0:
        raise ConfigError("expansion order must be >= 0")
    ej = params.EJ_over_h * H_PLANCK
    q = math.pi * params.B * params.W / PHI0          # 1/m

    # exact trig at integer and half-integer bias so extremum coefficients
    # vanish identically instead of to round-off
    twice = 2.0 * flux_bias_phi0_units
    if twice == round(twice):
        k = int(round(twice))                          # bias = k/2 flux quanta
        table = {0: (1.0, 0.0), 1: (0.0, 1.0), 2: (-1.0, 0.0), 3: (0.0, -1.0)}
        cos0, sin0 = table[k % 4]
    else:
        phase0 = math.pi * flux_bias_phi0_units
        cos0, sin0 = math.cos(phase0), math.sin(phase0)

    # d^n/dx^n cos(phase0 + q x)|_0 = q^n * cycle(cos0, -sin0, -cos0, sin0)
    cycle = (cos0, -sin0, -cos0, sin0)
    coeffs = []
    fact = 1.0
    for n in range(order + 1):
        if n > 0:
            fact *= n
        coeffs.append(-ej * q ** n * cycle[n % 4] / fact)
    return coeffs


@dataclass(frozen=True)
class RegimeCheck:
    name: str
    left: float
    right: float
    ratio: float
    passed: bool


@dataclass(frozen=True)
class RegimeReport:
    checks: tuple[RegimeCheck, ...]
    threshold: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "left": c.left, "right": c.right,
                 "ratio": c.ratio, "passed": c.passed}
                for c in self.checks
            ],
        }


RESONANCE_TOL = 1e-9


def validate_regimes(c: DerivedCouplings, noise=None, tau: Optional[float] = None,
                     threshold: float = 10.0) -> RegimeReport:
    """Check the operating-regime inequalities.

    ">>" conditions pass when |left/right| >= threshold; the two-phonon
    resonance passes when |delta|/omega_b <= 1e-9.  When a noise model and a
    duration are supplied, the noise hierarchy D << 1/tau << 2 kappa beta is
    appended.
    """
    checks = []

    def much_greater(name, left, right):
        ratio = math.inf if right == 0 else abs(left / right)
        checks.append(RegimeCheck(name, left, right, ratio, ratio >= threshold))

    much_greater("large_detuning_a", abs(c.Delta_a), abs(c.g_a))
    much_greater("large_detuning_b", abs(c.Delta_b), abs(c.g_b))

    res_ratio = abs(c.delta) / c.omega_b if c.omega_b else math.inf
    checks.append(RegimeCheck("resonance_delta", abs(c.delta), c.omega_b,
                              res_ratio, res_ratio <= RESONANCE_TOL))

    if c.Delta_a != 0.0:
        much_greater("stark_shift_a", c.omega_a, c.g_a ** 2 / c.Delta_a)
    if c.Delta_b != 0.0:
        much_greater("stark_shift_b", c.omega_b, c.g_b ** 2 / c.Delta_b)

    if noise is not None and tau is not None:
        pump = 2.0 * abs(c.kappa) * noise.beta
        much_greater("noise_D_ll_inv_tau", 1.0 / tau, noise.D)
        much_greater("noise_inv_tau_ll_pump", pump, 1.0 / tau)

    return RegimeReport(tuple(checks), threshold)


def couplings_as_report(c: DerivedCouplings) -> dict:
    """JSON-friendly view; rad/s quantities also reported divided by 2*pi."""
    out = {}
    for f in fields(c):
        out[f.name] = getattr(c, f.name)
    for name in ("lambda_a", "lambda_b", "Omega", "g_a", "g_b",
                 "Delta_a", "Delta_b", "delta", "kappa"):
        out[f"{name}_over_2pi_hz"] = getattr(c, name) / TWO_PI
    return out

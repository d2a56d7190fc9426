"""Deterministic and stochastic time evolution.

Propagators use a dense eigendecomposition below DENSE_DIM_LIMIT and a
sparse action-of-exponential above it; both are cross-validated in tests.
The phase-noise ensemble advances trajectories with a piecewise-constant
drive phase performing a Wiener walk, using the compiled kernel when
available.  Trajectory seeding is derived per index, so results are
bit-identical for a given master seed regardless of the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse.linalg as spla
from scipy.linalg import eigh

from .constants import HBAR
from .core import OperatorMatrix, SpaceDescriptor, StateVector, expectation
from .errors import (
    ConfigError,
    PropagationAccuracyError,
    SpaceMismatchError,
    StepSizeError,
    TruncationError,
)
from .hamiltonians import NMR, build_parametric
from .kernels import get_kernel

DENSE_DIM_LIMIT = 2000
NORM_DRIFT_TOL = 1e-8
LEAKAGE_TOL = 1e-6
TOP_FRACTION = 0.1


def _threads() -> int:
    raw = os.environ.get("NMR_SQUEEZE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"NMR_SQUEEZE_THREADS must be an integer, got {raw!r}")
    return max(1, n)


def splitmix64(seed: int, index: int) -> int:
    """Deterministic per-trajectory seed derivation (splitmix64 mix)."""
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


class Propagator:
    """Reusable e^{-i H t / hbar} for a fixed Hamiltonian.

    Dense eigendecomposition when the dimension allows, otherwise the
    sparse action-of-exponential (Al-Mohy/Higham) is applied per call.
    """

    def __init__(self, h: OperatorMatrix, dense_limit: int = DENSE_DIM_LIMIT):
        if not h.hermitian_hint:
            raise SpaceMismatchError("propagation requires a hermitian Hamiltonian")
        self.space = h.space
        self.dim = h.space.total_dim
        self._sparse = None
        self._eigvals = None
        self._eigvecs = None
        if self.dim <= dense_limit:
            w, v = eigh(h.dense())
            self._eigvals = w / HBAR          # rad/s
            self._eigvecs = v
        else:
            self._sparse = h.matrix / HBAR

    def advance_raw(self, amps: np.ndarray, t: float) -> np.ndarray:
        if self._eigvecs is not None:
            coeff = self._eigvecs.conj().T @ amps
            coeff *= np.exp(-1j * self._eigvals * t)
            return self._eigvecs @ coeff
        return spla.expm_multiply((-1j * t) * self._sparse, amps)

    def advance(self, state: StateVector, t: float, *,
                leakage_tol: float = LEAKAGE_TOL) -> StateVector:
        if state.space != self.space:
            raise SpaceMismatchError("state and Hamiltonian spaces differ")
        amps = self.advance_raw(state.amplitudes, t)
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > NORM_DRIFT_TOL:
            raise PropagationAccuracyError(
                f"propagation norm drift {abs(nrm - 1.0):.3e} exceeds {NORM_DRIFT_TOL}")
        out = StateVector(self.space, amps / nrm)
        _leakage_guard(out, leakage_tol)
        return out


def _leakage_guard(state: StateVector, tol: float) -> None:
    if tol is None:
        return
    for lab, dim in state.space.subsystems:
        if dim == 2:
            continue
        pop = state.top_fraction_population(lab, TOP_FRACTION)
        if pop > tol:
            raise TruncationError(
                f"population {pop:.3e} in the top decile of subsystem {lab!r} "
                f"exceeds {tol:.1e}; increase the truncation")


def propagate(h: OperatorMatrix, state0: StateVector, t: float, *,
              leakage_tol: float = LEAKAGE_TOL) -> StateVector:
    """|psi(t)> = exp(-i H t / hbar) |psi0> with norm and leakage guards."""
    return Propagator(h).advance(state0, t, leakage_tol=leakage_tol)


def evolve_on_grid(h: OperatorMatrix, state0: StateVector, times: Sequence[float], *,
                   leakage_tol: float = LEAKAGE_TOL) -> list[StateVector]:
    prop = Propagator(h)
    return [prop.advance(state0, t, leakage_tol=leakage_tol) for t in times]


@dataclass(frozen=True)
class DeviationReport:
    """Observable-by-observable distance between two evolutions.

    `predicted_scale` is the (coupling/detuning) * max-matrix-element
    heuristic per observable: the size a frame-mismatch deviation is
    expected to have at first order.
    """

    times: np.ndarray
    naive: dict[str, np.ndarray]
    frame_corrected: dict[str, np.ndarray]
    full_values: dict[str, np.ndarray]
    effective_values: dict[str, np.ndarray]
    error_scale: float
    predicted_scale: dict[str, float]

    def max_deviation(self, name: str, corrected: bool = True) -> float:
        table = self.frame_corrected if corrected else self.naive
        return float(np.max(table[name]))


def compare_dynamics(h_full: OperatorMatrix, h_eff: OperatorMatrix,
                     observables: dict[str, tuple[OperatorMatrix, OperatorMatrix]],
                     state0_full: StateVector, state0_eff: StateVector,
                     times: Sequence[float], *,
                     generator: Optional[OperatorMatrix] = None,
                     error_scale: float = 0.0,
                     leakage_tol: float = LEAKAGE_TOL) -> DeviationReport:
    """Evolve the full and effective models and record observable deviations.

    `observables` maps a name to an (operator on the full space, operator on
    the effective space) pair.  When `generator` is given, the full-space
    state is additionally rotated by e^{-S} before measuring, which removes
    the frame mismatch of the eliminated model; both the naive and the
    frame-corrected deviations are reported.
    """
    times = np.asarray(list(times), dtype=float)
    prop_full = Propagator(h_full)
    prop_eff = Propagator(h_eff)

    frame = None
    if generator is not None:
        from scipy.linalg import expm
        frame = expm(-generator.dense())

    naive: dict[str, list[float]] = {k: [] for k in observables}
    corrected: dict[str, list[float]] = {k: [] for k in observables}
    full_vals: dict[str, list[float]] = {k: [] for k in observables}
    eff_vals: dict[str, list[float]] = {k: [] for k in observables}

    for t in times:
        psi_f = prop_full.advance(state0_full, t, leakage_tol=leakage_tol)
        psi_e = prop_eff.advance(state0_eff, t, leakage_tol=leakage_tol)
        psi_fc = None
        if frame is not None:
            amps = frame @ psi_f.amplitudes
            psi_fc = StateVector(psi_f.space, amps / np.linalg.norm(amps))
        for name, (op_f, op_e) in observables.items():
            val_e = np.real(expectation(op_e, psi_e))
            val_f = np.real(expectation(op_f, psi_f))
            naive[name].append(abs(val_f - val_e))
            eff_vals[name].append(val_e)
            full_vals[name].append(val_f)
            if psi_fc is not None:
                val_fc = np.real(expectation(op_f, psi_fc))
                corrected[name].append(abs(val_fc - val_e))
    if frame is None:
        corrected = {k: list(v) for k, v in naive.items()}

    predicted = {
        k: error_scale * float(np.max(np.abs(v)) if len(v) else 0.0)
        for k, v in eff_vals.items()
    }
    return DeviationReport(
        times=times,
        naive={k: np.asarray(v) for k, v in naive.items()},
        frame_corrected={k: np.asarray(v) for k, v in corrected.items()},
        full_values={k: np.asarray(v) for k, v in full_vals.items()},
        effective_values={k: np.asarray(v) for k, v in eff_vals.items()},
        error_scale=error_scale,
        predicted_scale=predicted,
    )


@dataclass(frozen=True)
class NoiseModel:
    """Drive phase-diffusion model.

    The drive phase performs a Wiener walk with increment variance
    2 * diffusion_factor * D * dt; `diffusion_factor` parameterizes the
    underdetermined linewidth convention (see `calibration`).
    """

    D: float                       # angular linewidth, rad/s
    beta: float                    # drive amplitude
    phi0: float                    # initial drive phase, rad
    n_traj: int
    dt: float                      # requested integrator step, s
    master_seed: int
    diffusion_factor: float = 1.0

    def __post_init__(self):
        if self.D < 0:
            raise ConfigError("noise linewidth D must be >= 0")
        if self.dt <= 0:
            raise ConfigError("noise step dt must be > 0")
        if self.n_traj < 1:
            raise ConfigError("n_traj must be >= 1")
        if self.diffusion_factor <= 0:
            raise ConfigError("diffusion_factor must be > 0")


@dataclass(frozen=True)
class EnsembleStats:
    """Trajectory-averaged quadrature statistics on a time grid.

    Quadratures are dimensionless: X = x/x0 = b + b^dag, P = p/p0.
    Standard errors are sample std / sqrt(n_traj).
    """

    times: np.ndarray
    mean_x: np.ndarray
    mean_p: np.ndarray
    mean_xx: np.ndarray
    mean_pp: np.ndarray
    se_x: np.ndarray
    se_p: np.ndarray
    se_xx: np.ndarray
    se_pp: np.ndarray
    leakage_max: float
    n_traj: int
    backend: str

    def dx_over_x0(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.mean_xx - self.mean_x ** 2, 0.0))

    def dp_over_p0(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.mean_pp - self.mean_p ** 2, 0.0))

    def se_dx(self) -> np.ndarray:
        dx = self.dx_over_x0()
        return self.se_xx / np.maximum(2.0 * dx, 1e-300)

    def se_dp(self) -> np.ndarray:
        dp = self.dp_over_p0()
        return self.se_pp / np.maximum(2.0 * dp, 1e-300)


STEP_GUARD = 1e-3
_BLOCK = 256


def phase_noise_ensemble(noise: NoiseModel, kappa: float,
                         space_b: SpaceDescriptor, state0: StateVector,
                         tau: float, grid_points: int = 2, *,
                         backend: Optional[str] = None,
                         leakage_tol: Optional[float] = LEAKAGE_TOL) -> EnsembleStats:
    """Monte-Carlo ensemble of the classically driven squeezer with a
    phase-diffusing drive.

    Within each step the Hamiltonian is held at the current phase and the
    state advanced exactly; the phase then takes a Wiener increment of
    variance 2 * diffusion_factor * D * dt.  Per-trajectory seeds derive
    from (master_seed, index), so the result does not depend on the worker
    count; the reduction order is fixed by trajectory index.
    """
    if state0.space != space_b or space_b.labels != (NMR,):
        raise SpaceMismatchError("ensemble needs an NMR-only initial state")
    if grid_points < 2:
        raise ConfigError("grid_points must be >= 2")
    dim = space_b.dim_of(NMR)

    n_segments = grid_points - 1
    steps_per_seg = max(1, int(math.ceil(tau / (noise.dt * n_segments))))
    dt = tau / (n_segments * steps_per_seg)
    rate = abs(kappa) * noise.beta
    if rate * dt > STEP_GUARD or noise.D * dt > STEP_GUARD:
        raise StepSizeError(
            f"step dt={dt:.3e} violates the guard kappa*beta*dt <= {STEP_GUARD} "
            f"and D*dt <= {STEP_GUARD}; decrease NoiseModel.dt")
    n_steps = n_segments * steps_per_seg

    h0 = build_parametric(kappa, noise.beta, 0.0, space_b)
    w, v = eigh(h0.dense())
    u0 = (v * np.exp(-1j * w / HBAR * dt)) @ v.conj().T

    kernel, backend_name = get_kernel(backend)
    n_cut = dim - max(1, int(math.ceil(TOP_FRACTION * dim)))
    sigma = math.sqrt(2.0 * noise.diffusion_factor * noise.D * dt)

    obs = np.empty((noise.n_traj, grid_points, 4))
    leak = np.empty(noise.n_traj)
    psi0 = np.ascontiguousarray(state0.amplitudes, dtype=np.complex128)

    def run_block(start: int, stop: int) -> None:
        block = stop - start
        phases = np.empty((block, n_steps))
        for j in range(block):
            rng = np.random.default_rng(splitmix64(noise.master_seed, start + j))
            incs = rng.standard_normal(n_steps) * sigma
            # phase at each step start: phi0, then the accumulated walk
            phases[j, 0] = noise.phi0
            np.cumsum(incs[:-1], out=phases[j, 1:])
            phases[j, 1:] += noise.phi0
        o, lk = kernel.evolve_block(u0, phases, psi0, steps_per_seg, n_cut)
        obs[start:stop] = o
        leak[start:stop] = lk

    bounds = [(s, min(s + _BLOCK, noise.n_traj))
              for s in range(0, noise.n_traj, _BLOCK)]
    workers = min(_threads(), len(bounds))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda se: run_block(*se), bounds))
    else:
        for se in bounds:
            run_block(*se)

    max_leak = float(leak.max())
    if leakage_tol is not None and max_leak > leakage_tol:
        raise TruncationError(
            f"ensemble leakage {max_leak:.3e} exceeds {leakage_tol:.1e}; "
            f"increase the NMR truncation")

    times = np.linspace(0.0, tau, grid_points)
    mean = obs.mean(axis=0)
    if noise.n_traj > 1:
        se = obs.std(axis=0, ddof=1) / math.sqrt(noise.n_traj)
    else:
        se = np.zeros_like(mean)
    return EnsembleStats(
        times=times,
        mean_x=mean[:, 0], mean_p=mean[:, 1],
        mean_xx=mean[:, 2], mean_pp=mean[:, 3],
        se_x=se[:, 0], se_p=se[:, 1], se_xx=se[:, 2], se_pp=se[:, 3],
        leakage_max=max_leak,
        n_traj=noise.n_traj,
        backend=backend_name,
    )

import math

import numpy as np
import pytest

from nmr_squeeze.calibration import wiener_model_variance
from nmr_squeeze.constants import HBAR, TWO_PI
from nmr_squeeze.core import (
    expectation,
    make_state,
    number_op,
    embed_operator,
)
from nmr_squeeze.device import DerivedCouplings
from nmr_squeeze.errors import (
    ConfigError,
    SpaceMismatchError,
    StepSizeError,
    TruncationError,
)
from nmr_squeeze.evolve import (
    NoiseModel,
    Propagator,
    compare_dynamics,
    evolve_on_grid,
    phase_noise_ensemble,
    propagate,
    splitmix64,
)
from nmr_squeeze.hamiltonians import (
    HamiltonianKind,
    build_effective,
    build_parametric,
    build_rwa,
    frohlich_generator,
    full_space,
    nmr_space,
    two_mode_space,
)
from nmr_squeeze.kernels import available_backends
from nmr_squeeze.squeezing import SqueezeSpec, apply_squeeze


def test_zero_hamiltonian_is_identity():
    space = nmr_space(6)
    h = build_parametric(1.0, 0.0, 0.0, space)
    vac = make_state(space, {"b": 0})
    out = propagate(h, vac, 3.7)
    assert np.allclose(out.amplitudes, vac.amplitudes)


def test_free_evolution_rotates_coherent_state():
    space = nmr_space(40)
    from nmr_squeeze.core import ladder_ops, OperatorMatrix
    n_op = number_op(40, "b")
    h = OperatorMatrix(space, (HBAR * TWO_PI * 1.5 * n_op.matrix).tocsr(), True)
    st = make_state(space, {"b": ("coherent", 2.0)})
    low, _ = ladder_ops(40, "b")
    prop = Propagator(h)
    for t in (0.1, 0.25, 0.6):
        out = prop.advance(st, t)
        b_mean = expectation(low, out)
        expected = 2.0 * np.exp(-1j * TWO_PI * 1.5 * t)
        assert abs(b_mean - expected) <= 1e-9
        assert abs(abs(b_mean) - 2.0) <= 1e-9


def test_propagated_parametric_matches_squeeze_operator():
    space = nmr_space(80)
    kappa, beta = 1.0, 0.5
    h = build_parametric(kappa, beta, math.pi / 2, space)
    vac = make_state(space, {"b": 0})
    tau = 0.8                          # xi = 2 kappa beta tau = 0.8
    evolved = propagate(h, vac, tau)
    squeezed = apply_squeeze(SqueezeSpec(xi=0.8, phi=math.pi / 2), vac)
    assert evolved.fidelity(squeezed) >= 1.0 - 1e-9


def test_unitarity_reversal():
    space = nmr_space(30)
    h = build_parametric(0.7, 0.9, 0.3, space)
    st = make_state(space, {"b": ("coherent", 1.0)})
    mid = propagate(h, st, 0.4)
    back = propagate(h, mid, -0.4)
    assert back.fidelity(st) >= 1.0 - 1e-9


def test_evolve_on_grid_matches_single_shots():
    space = nmr_space(24)
    h = build_parametric(0.5, 0.8, 0.2, space)
    st = make_state(space, {"b": 0})
    times = [0.0, 0.3, 0.7]
    states = evolve_on_grid(h, st, times)
    for t, out in zip(times, states):
        direct = propagate(h, st, t)
        assert out.fidelity(direct) >= 1.0 - 1e-12


def test_energy_conservation():
    c = DerivedCouplings.from_rates(Omega=TWO_PI * 10.0, omega_a=TWO_PI * 3.0,
                                    omega_b=TWO_PI * 1.5, g_a=TWO_PI * 0.3,
                                    g_b=TWO_PI * 0.2)
    space = full_space(4, 6)
    h = build_rwa(c, space)
    st = make_state(space, {"q": 0, "a": 1, "b": 0})
    e0 = expectation(h, st).real
    prop = Propagator(h)
    for t in (1.0, 5.0, 20.0):
        e = expectation(h, prop.advance(st, t)).real
        assert abs(e - e0) <= 1e-9 * abs(e0)


def test_dense_and_sparse_paths_agree():
    space = nmr_space(64)
    h = build_parametric(1.0, 0.5, math.pi / 2, space)
    st = make_state(space, {"b": 0})
    dense = Propagator(h, dense_limit=2000)
    sparse = Propagator(h, dense_limit=8)      # force the expm_multiply path
    out_d = dense.advance(st, 0.9)
    out_s = sparse.advance(st, 0.9)
    assert np.max(np.abs(out_d.amplitudes - out_s.amplitudes)) <= 1e-9


def test_propagate_rejects_nonhermitian():
    from nmr_squeeze.core import ladder_ops
    space = nmr_space(5)
    low, _ = ladder_ops(5, "b")
    with pytest.raises(SpaceMismatchError):
        propagate(low, make_state(space, {"b": 0}), 1.0)


def test_leakage_guard_trips():
    space = nmr_space(12)
    h = build_parametric(1.0, 1.0, math.pi / 2, space)
    vac = make_state(space, {"b": 0})
    with pytest.raises(TruncationError):
        propagate(h, vac, 1.5)        # xi = 3 on a 12-level space


def test_compare_dynamics_decoupled_is_exact():
    c = DerivedCouplings.from_rates(Omega=TWO_PI * 10.0, omega_a=TWO_PI * 3.0,
                                    omega_b=TWO_PI * 1.5, g_a=0.0, g_b=0.0)
    space_f = full_space(4, 6)
    space_e = two_mode_space(4, 6)
    h_f = build_rwa(c, space_f)
    h_e = build_effective(c, space_e, HamiltonianKind.PDC)
    nb_f = embed_operator(number_op(6, "b"), "b", space_f)
    nb_e = embed_operator(number_op(6, "b"), "b", space_e)
    rep = compare_dynamics(
        h_f, h_e, {"n_b": (nb_f, nb_e)},
        make_state(space_f, {"q": 0, "a": 1, "b": 0}),
        make_state(space_e, {"a": 1, "b": 0}),
        np.linspace(0.0, 10.0, 11))
    assert rep.max_deviation("n_b", corrected=False) <= 1e-10


def _bench_couplings():
    return DerivedCouplings.from_rates(Omega=TWO_PI * 10.0, omega_a=TWO_PI * 3.0,
                                       omega_b=TWO_PI * 1.5, g_a=TWO_PI * 0.30,
                                       g_b=TWO_PI * 0.20)


def test_scaled_benchmark_regressions():
    """Full-RWA vs PDC deviations over one conversion period.

    The bound constants were measured once on this exact benchmark and
    frozen; they are of order (g/Delta)^2 as the elimination predicts.
    """
    c = _bench_couplings()
    space_f = full_space(10, 20)
    space_e = two_mode_space(10, 20)
    h_f = build_rwa(c, space_f)
    h_e = build_effective(c, space_e, HamiltonianKind.PDC)
    s = frohlich_generator(c, space_f)

    nb_f = embed_operator(number_op(20, "b"), "b", space_f)
    nb_e = embed_operator(number_op(20, "b"), "b", space_e)
    na_f = embed_operator(number_op(10, "a"), "a", space_f)
    na_e = embed_operator(number_op(10, "a"), "a", space_e)
    from nmr_squeeze.core import qubit_ops
    ground_f = embed_operator(qubit_ops("q")["p_ground"], "q", space_f)
    from nmr_squeeze.core import identity_op
    ident_e = identity_op(space_e)

    period = math.pi / (math.sqrt(2.0) * abs(c.kappa))
    times = np.linspace(0.0, period, 56)
    rep = compare_dynamics(
        h_f, h_e,
        {"n_b": (nb_f, nb_e), "n_a": (na_f, na_e),
         "ground": (ground_f, ident_e)},
        make_state(space_f, {"q": 0, "a": 1, "b": 0}),
        make_state(space_e, {"a": 1, "b": 0}),
        times, generator=s,
        error_scale=max(abs(c.g_a / c.Delta_a), abs(c.g_b / c.Delta_b)))

    eps2 = (c.g_a / c.Delta_a) ** 2 + (c.g_b / c.Delta_b) ** 2
    # frozen regression bounds: measured 4.47*eps2 (frame-corrected) and
    # 7.92*eps2 (naive) on this benchmark, frozen with margin
    assert rep.max_deviation("n_b", corrected=True) <= 6.0 * eps2
    assert rep.max_deviation("n_b", corrected=False) <= 10.0 * eps2
    assert rep.max_deviation("n_a", corrected=True) <= 2.5 * eps2
    # first-order heuristic scale: eps * max |<n_b>|, with <n_b> reaching ~2
    assert abs(rep.predicted_scale["n_b"] - rep.error_scale
               * np.max(np.abs(rep.effective_values["n_b"]))) <= 1e-12
    # qubit stays dressed-ground to second order
    ground_min = np.min(rep.full_values["ground"])
    assert ground_min >= 1.0 - 4.0 * max(abs(c.g_a / c.Delta_a),
                                         abs(c.g_b / c.Delta_b)) ** 2


# ---------------------------------------------------------------------------
# phase-noise ensemble
# ---------------------------------------------------------------------------

def test_noise_model_validation():
    with pytest.raises(ConfigError):
        NoiseModel(D=-1.0, beta=1.0, phi0=0.0, n_traj=1, dt=1e-3, master_seed=0)
    with pytest.raises(ConfigError):
        NoiseModel(D=0.0, beta=1.0, phi0=0.0, n_traj=0, dt=1e-3, master_seed=0)
    with pytest.raises(ConfigError):
        NoiseModel(D=0.0, beta=1.0, phi0=0.0, n_traj=1, dt=0.0, master_seed=0)


def test_step_guard():
    space = nmr_space(20)
    vac = make_state(space, {"b": 0})
    noise = NoiseModel(D=0.0, beta=600.0, phi0=math.pi / 2, n_traj=1,
                       dt=1e-2, master_seed=1)
    with pytest.raises(StepSizeError):
        phase_noise_ensemble(noise, 1.0, space, vac, tau=0.01, grid_points=2)


def test_noise_free_limit_matches_ideal_law():
    space = nmr_space(80)
    vac = make_state(space, {"b": 0})
    noise = NoiseModel(D=0.0, beta=0.5, phi0=math.pi / 2, n_traj=2,
                       dt=1e-3, master_seed=3)
    stats = phase_noise_ensemble(noise, 1.0, space, vac, tau=1.0, grid_points=5)
    xi = stats.times
    assert np.max(np.abs(stats.dx_over_x0() - np.exp(-xi))) <= 1e-6
    assert np.max(np.abs(stats.dp_over_p0() - np.exp(xi)) / np.exp(xi)) <= 1e-6


def test_frozen_drive_keeps_vacuum():
    space = nmr_space(16)
    vac = make_state(space, {"b": 0})
    noise = NoiseModel(D=0.05, beta=0.5, phi0=math.pi / 2, n_traj=4,
                       dt=1e-3, master_seed=5)
    stats = phase_noise_ensemble(noise, 0.0, space, vac, tau=0.5, grid_points=3)
    assert np.max(np.abs(stats.dx_over_x0() - 1.0)) <= 1e-12
    assert np.max(np.abs(stats.mean_x)) <= 1e-12


def test_mean_x_vanishes_under_noise():
    space = nmr_space(60)
    vac = make_state(space, {"b": 0})
    noise = NoiseModel(D=0.01, beta=0.5, phi0=math.pi / 2, n_traj=128,
                       dt=2e-3, master_seed=11)
    stats = phase_noise_ensemble(noise, 1.0, space, vac, tau=1.0, grid_points=3)
    # parity of the drive Hamiltonian keeps <x> = 0 exactly per trajectory
    assert np.max(np.abs(stats.mean_x)) <= 1e-10


def test_ensemble_matches_second_order_noise_theory():
    """The closed-form second-order noise gain is an independent oracle for
    the trajectory machinery (it was derived analytically and cross-checked
    against a 2x2 covariance-matrix Monte Carlo)."""
    space = nmr_space(60)
    vac = make_state(space, {"b": 0})
    r, xi = 0.01, 1.0
    noise = NoiseModel(D=r, beta=0.5, phi0=math.pi / 2, n_traj=1024,
                       dt=1e-3, master_seed=77)
    stats = phase_noise_ensemble(noise, 1.0, space, vac, tau=xi, grid_points=2)
    var_pred = wiener_model_variance(xi, r, 1.0)
    var_mc = stats.mean_xx[-1] - stats.mean_x[-1] ** 2
    se = stats.se_xx[-1]
    assert abs(var_mc - var_pred) <= 4.0 * se


def test_determinism_across_thread_counts(monkeypatch):
    space = nmr_space(24)
    vac = make_state(space, {"b": 0})
    noise = NoiseModel(D=0.02, beta=0.5, phi0=math.pi / 2, n_traj=300,
                       dt=2e-3, master_seed=123)

    def run():
        st = phase_noise_ensemble(noise, 1.0, space, vac, tau=0.4,
                                  grid_points=3)
        return st.mean_xx.copy(), st.se_xx.copy(), st.leakage_max

    monkeypatch.setenv("NMR_SQUEEZE_THREADS", "1")
    a = run()
    monkeypatch.setenv("NMR_SQUEEZE_THREADS", "4")
    b = run()
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    assert a[2] == b[2]


@pytest.mark.skipif(len(available_backends()) < 2,
                    reason="compiled kernel not built")
def test_backends_agree():
    space = nmr_space(40)
    vac = make_state(space, {"b": 0})
    noise = NoiseModel(D=0.01, beta=0.5, phi0=math.pi / 2, n_traj=64,
                       dt=2e-3, master_seed=9)
    s_cy = phase_noise_ensemble(noise, 1.0, space, vac, tau=0.6,
                                grid_points=4, backend="cython")
    s_py = phase_noise_ensemble(noise, 1.0, space, vac, tau=0.6,
                                grid_points=4, backend="python")
    assert np.max(np.abs(s_cy.mean_xx - s_py.mean_xx)) <= 1e-12
    assert np.max(np.abs(s_cy.mean_pp - s_py.mean_pp)) <= 1e-12


def test_splitmix_is_stable():
    # frozen values pin the per-trajectory seed derivation across releases
    assert splitmix64(0, 0) == 16294208416658607535
    assert splitmix64(12345, 6) == 2262534019502804546
    assert splitmix64(2 ** 63, 1) != splitmix64(2 ** 63, 2)

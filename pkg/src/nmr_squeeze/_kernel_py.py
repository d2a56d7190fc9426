"""Pure-NumPy trajectory-stepping kernel (fallback for the compiled twin).

One step advances every trajectory in a block by the exact propagator of the
phase-rotated parametric Hamiltonian: with R(phi) = diag(exp(i phi n / 2)),

    exp(-i H(phi) dt / hbar) = R(phi)^dag  U0  R(phi),

where U0 is the precomputed dense one-step propagator at phi = 0.  The
quadrature observables are accumulated at snapshot strides.
"""

import numpy as np


def evolve_block(u0, phases, psi0, snap_every, n_cut):
    """Advance a block of trajectories and collect quadrature statistics.

    Parameters
    ----------
    u0 : (d, d) complex128
        One-step propagator of the phase-zero Hamiltonian.
    phases : (B, K) float64
        Drive phase held during each step, per trajectory.
    psi0 : (d,) complex128
        Shared initial state.
    snap_every : int
        Snapshot stride; K must be a multiple of it.
    n_cut : int
        First Fock index counted as leakage.

    Returns
    -------
    obs : (B, K // snap_every + 1, 4) float64
        Per-snapshot [<X>, <P>, <X^2>, <P^2>] with X = b + b^dag,
        P = i(b^dag - b)  (dimensionless quadratures).
    leak : (B,) float64
        Max over snapshots of the population at Fock levels >= n_cut.
    """
    n_block, n_steps = phases.shape
    dim = psi0.shape[0]
    if n_steps % snap_every:
        raise ValueError("number of steps must be a multiple of snap_every")
    n_snap = n_steps // snap_every + 1

    psi = np.tile(psi0, (n_block, 1))
    obs = np.empty((n_block, n_snap, 4))
    leak = np.zeros(n_block)

    half_n = 0.5 * np.arange(dim)
    sq1 = np.sqrt(np.arange(1.0, dim))
    sq2 = np.sqrt(np.arange(1.0, dim - 1) * np.arange(2.0, dim))
    nvec = np.arange(dim, dtype=np.float64)
    u0t = np.ascontiguousarray(u0.T)

    def snapshot(g):
        s1 = np.sum(np.conj(psi[:, :-1]) * psi[:, 1:] * sq1, axis=1)
        s2 = np.sum(np.conj(psi[:, :-2]) * psi[:, 2:] * sq2, axis=1)
        pop = np.abs(psi) ** 2
        nbar = pop @ nvec
        obs[:, g, 0] = 2.0 * s1.real
        obs[:, g, 1] = 2.0 * s1.imag
        obs[:, g, 2] = 2.0 * nbar + 1.0 + 2.0 * s2.real
        obs[:, g, 3] = 2.0 * nbar + 1.0 - 2.0 * s2.real
        np.maximum(leak, pop[:, n_cut:].sum(axis=1), out=leak)

    snapshot(0)
    g = 1
    for k in range(n_steps):
        rot = np.exp(1j * phases[:, k, None] * half_n)
        psi = ((psi * rot) @ u0t)
        psi *= np.conj(rot)
        if (k + 1) % snap_every == 0:
            snapshot(g)
            g += 1
    return obs, leak

# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled trajectory-stepping kernel.

Same contract as `_kernel_py.evolve_block`.  The whole block advances per
step through one BLAS-3 zgemm, with the phase rotations fused into C loops
(phase factors built by a complex recurrence, refreshed by exact sincos
every few dozen levels to keep round-off drift at the 1e-14 level).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt
from scipy.linalg.cython_blas cimport zgemm

cnp.import_array()

DEF REFRESH = 64


def evolve_block(cnp.ndarray[cnp.complex128_t, ndim=2] u0,
                 cnp.ndarray[cnp.float64_t, ndim=2] phases,
                 cnp.ndarray[cnp.complex128_t, ndim=1] psi0,
                 int snap_every,
                 int n_cut):
    cdef int n_block = phases.shape[0]
    cdef int n_steps = phases.shape[1]
    cdef int dim = psi0.shape[0]
    if n_steps % snap_every:
        raise ValueError("number of steps must be a multiple of snap_every")
    cdef int n_snap = n_steps // snap_every + 1

    obs_arr = np.empty((n_block, n_snap, 4), dtype=np.float64)
    leak_arr = np.zeros(n_block, dtype=np.float64)
    psi_arr = np.tile(np.ascontiguousarray(psi0), (n_block, 1))
    tmp_arr = np.empty_like(psi_arr)
    rot_arr = np.empty((n_block, dim), dtype=np.complex128)
    u0_c = np.ascontiguousarray(u0)

    cdef double[:, :, ::1] obs = obs_arr
    cdef double[::1] leak = leak_arr
    cdef double complex[:, ::1] psi = psi_arr
    cdef double complex[:, ::1] tmp = tmp_arr
    cdef double complex[:, ::1] rot = rot_arr
    cdef double complex[:, ::1] a = u0_c
    cdef double[:, ::1] ph = phases

    cdef double complex one = 1.0 + 0j
    cdef double complex zero = 0.0 + 0j
    cdef int j, k, n, g
    cdef double half_phi
    cdef double complex step_factor, cur

    with nogil:
        for j in range(n_block):
            _snapshot(psi[j], dim, n_cut, obs, leak, j, 0)
        g = 1
        for k in range(n_steps):
            # rot[j, n] = exp(i * phases[j, k] * n / 2) via recurrence
            for j in range(n_block):
                half_phi = 0.5 * ph[j, k]
                step_factor = cos(half_phi) + 1j * sin(half_phi)
                cur = 1.0 + 0j
                for n in range(dim):
                    if n % REFRESH == 0:
                        cur = cos(half_phi * n) + 1j * sin(half_phi * n)
                    rot[j, n] = cur
                    cur = cur * step_factor
                for n in range(dim):
                    tmp[j, n] = psi[j, n] * rot[j, n]
            # psi = tmp @ u0^T: in Fortran view psi^F = u0^C^T^T ... one zgemm
            zgemm(b"T", b"N", &dim, &n_block, &dim, &one,
                  &a[0, 0], &dim, &tmp[0, 0], &dim, &zero, &psi[0, 0], &dim)
            for j in range(n_block):
                for n in range(dim):
                    psi[j, n] = psi[j, n] * rot[j, n].conjugate()
            if (k + 1) % snap_every == 0:
                for j in range(n_block):
                    _snapshot(psi[j], dim, n_cut, obs, leak, j, g)
                g += 1
    return obs_arr, leak_arr


cdef void _snapshot(double complex[::1] psi, int dim, int n_cut,
                    double[:, :, ::1] obs, double[::1] leak,
                    int j, int g) noexcept nogil:
    cdef int n
    cdef double s1r = 0.0, s1i = 0.0, s2r = 0.0, nbar = 0.0, lk = 0.0
    cdef double w, p
    cdef double complex z
    for n in range(dim - 1):
        w = sqrt(n + 1.0)
        z = psi[n].conjugate() * psi[n + 1]
        s1r += w * z.real
        s1i += w * z.imag
    for n in range(dim - 2):
        w = sqrt((n + 1.0) * (n + 2.0))
        z = psi[n].conjugate() * psi[n + 2]
        s2r += w * z.real
    for n in range(dim):
        p = psi[n].real * psi[n].real + psi[n].imag * psi[n].imag
        nbar += n * p
        if n >= n_cut:
            lk += p
    obs[j, g, 0] = 2.0 * s1r
    obs[j, g, 1] = 2.0 * s1i
    obs[j, g, 2] = 2.0 * nbar + 1.0 + 2.0 * s2r
    obs[j, g, 3] = 2.0 * nbar + 1.0 - 2.0 * s2r
    if lk > leak[j]:
        leak[j] = lk

"""Hamiltonian construction and the two-level-elimination transformation.

Builds every model Hamiltonian of the simulator (charge-basis total, dressed
rotating-wave, second-order effective forms, resonant bilinear conversion,
classical-drive parametric), the anti-Hermitian elimination generator, and
numerical conjugation by it (exact or second-order BCH).  Energies carry an
explicit factor hbar (joules); propagators divide it back out.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from .constants import HBAR
from .core import (
    OperatorMatrix,
    SpaceDescriptor,
    embed_operator,
    ladder_ops,
    number_op,
    qubit_ops,
    single_space,
)
from .device import DerivedCouplings
from .errors import DetuningZeroError, SpaceMismatchError

QUBIT, STLR, NMR = "q", "a", "b"


class HamiltonianKind(enum.Enum):
    TOTAL = "total"
    RWA = "rwa"
    EFFECTIVE_FULL = "effective-full"
    EFFECTIVE_GROUND = "effective-ground"
    PDC = "pdc"
    BILINEAR_RESONANT = "bilinear-resonant"
    PARAMETRIC = "parametric"

    @property
    def subsystem_labels(self) -> tuple[str, ...]:
        if self in (HamiltonianKind.TOTAL, HamiltonianKind.RWA,
                    HamiltonianKind.EFFECTIVE_FULL):
            return (QUBIT, STLR, NMR)
        if self is HamiltonianKind.PARAMETRIC:
            return (NMR,)
        return (STLR, NMR)


def full_space(n_a: int, n_b: int) -> SpaceDescriptor:
    """Qubit x STLR x NMR, qubit-major ordering."""
    return SpaceDescriptor(((QUBIT, 2), (STLR, n_a), (NMR, n_b)))


def two_mode_space(n_a: int, n_b: int) -> SpaceDescriptor:
    return SpaceDescriptor(((STLR, n_a), (NMR, n_b)))


def nmr_space(n_b: int) -> SpaceDescriptor:
    return single_space(NMR, n_b)


def _require_labels(space: SpaceDescriptor, labels: tuple[str, ...]) -> None:
    if space.labels != labels:
        raise SpaceMismatchError(
            f"expected subsystems {labels}, got {space.labels}")
    if QUBIT in labels and space.dim_of(QUBIT) != 2:
        raise SpaceMismatchError("qubit subsystem must have dimension 2")


@dataclass(frozen=True)
class _ModeOps:
    """Embedded mode operators shared by the builders."""

    lower: sp.csr_matrix
    raise_: sp.csr_matrix
    num: sp.csr_matrix

    @classmethod
    def embedded(cls, space: SpaceDescriptor, label: str) -> "_ModeOps":
        dim = space.dim_of(label)
        low, rai = ladder_ops(dim, label)
        return cls(
            lower=embed_operator(low, label, space).matrix,
            raise_=embed_operator(rai, label, space).matrix,
            num=embed_operator(number_op(dim, label), label, space).matrix,
        )


def _embedded_qubit(space: SpaceDescriptor) -> dict[str, sp.csr_matrix]:
    return {k: embed_operator(v, QUBIT, space).matrix
            for k, v in qubit_ops(QUBIT).items()}


def build_total(c: DerivedCouplings, space: SpaceDescriptor) -> OperatorMatrix:
    """Charge-basis Hamiltonian with the quadratic flux coupling.

    H = hbar w_a a^dag a + hbar w_b b^dag b + (hbar Omega/2)(cos(theta) s_z
    - sin(theta) s_x) + hbar lambda_a (a^dag + a) s_z
    + hbar lambda_b (b^dag + b)^2 s_x, where the qubit part is the charge
    basis expression -E_c(1-2n_g)/2 s_z - (-1)^m E_J s_x rewritten through
    (Omega, theta).
    """
    _require_labels(space, (QUBIT, STLR, NMR))
    a = _ModeOps.embedded(space, STLR)
    b = _ModeOps.embedded(space, NMR)
    q = _embedded_qubit(space)
    s_z, s_x = q["rho_z"], q["rho_x"]   # charge-basis Paulis, same matrices

    xa = a.lower + a.raise_
    xb = b.lower + b.raise_
    h = (HBAR * c.omega_a * a.num + HBAR * c.omega_b * b.num
         + 0.5 * HBAR * c.Omega * (c.cos_theta * s_z - c.sin_theta * s_x)
         + HBAR * c.lambda_a * (xa @ s_z)
         + HBAR * c.lambda_b * ((xb @ xb) @ s_x))
    return OperatorMatrix(space, h.tocsr(), hermitian_hint=True)


def build_rwa(c: DerivedCouplings, space: SpaceDescriptor) -> OperatorMatrix:
    """Dressed-basis rotating-wave Hamiltonian.

    H = hbar w_a a^dag a + hbar w_b b^dag b - (hbar Omega/2) rho_z
    + hbar g_a (a^dag rho_- + a rho_+) + hbar g_b (b^dag^2 rho_- + b^2 rho_+),
    built constructively from exactly these five terms.
    """
    _require_labels(space, (QUBIT, STLR, NMR))
    a = _ModeOps.embedded(space, STLR)
    b = _ModeOps.embedded(space, NMR)
    q = _embedded_qubit(space)
    h = (HBAR * c.omega_a * a.num + HBAR * c.omega_b * b.num
         - 0.5 * HBAR * c.Omega * q["rho_z"]
         + HBAR * c.g_a * (a.raise_ @ q["rho_minus"] + a.lower @ q["rho_plus"])
         + HBAR * c.g_b * ((b.raise_ @ b.raise_) @ q["rho_minus"]
                           + (b.lower @ b.lower) @ q["rho_plus"]))
    return OperatorMatrix(space, h.tocsr(), hermitian_hint=True)


def excitation_weight_op(space: SpaceDescriptor) -> OperatorMatrix:
    """M = 2 a^dag a + b^dag b + 2 |1><1|_q; commutes exactly with build_rwa."""
    _require_labels(space, (QUBIT, STLR, NMR))
    a = _ModeOps.embedded(space, STLR)
    b = _ModeOps.embedded(space, NMR)
    q = _embedded_qubit(space)
    return OperatorMatrix(space, (2.0 * a.num + b.num + 2.0 * q["p_excited"]).tocsr(),
                          hermitian_hint=True)


def frohlich_generator(c: DerivedCouplings, space: SpaceDescriptor) -> OperatorMatrix:
    """Anti-Hermitian generator S = g_a (a^dag rho_- - a rho_+)/Delta_a
    + g_b (b^dag^2 rho_- - b^2 rho_+)/Delta_b."""
    _require_labels(space, (QUBIT, STLR, NMR))
    for name, val in (("Delta_a", c.Delta_a), ("Delta_b", c.Delta_b)):
        if val == 0.0:
            raise DetuningZeroError(f"{name} is zero; generator undefined")
    a = _ModeOps.embedded(space, STLR)
    b = _ModeOps.embedded(space, NMR)
    q = _embedded_qubit(space)
    s = (c.g_a / c.Delta_a * (a.raise_ @ q["rho_minus"] - a.lower @ q["rho_plus"])
         + c.g_b / c.Delta_b * ((b.raise_ @ b.raise_) @ q["rho_minus"]
                                - (b.lower @ b.lower) @ q["rho_plus"]))
    return OperatorMatrix(space, s.tocsr())


ANTIHERM_TOL = 1e-12


def _check_antihermitian(s: OperatorMatrix) -> None:
    d = s.matrix + s.matrix.getH()
    defect = 0.0 if d.nnz == 0 else float(np.abs(d.data).max())
    scale = max(1.0, 0.0 if s.matrix.nnz == 0 else float(np.abs(s.matrix.data).max()))
    if defect > ANTIHERM_TOL * scale:
        raise SpaceMismatchError(
            f"generator is not anti-hermitian (defect {defect:.3e})")


def conjugate_by_generator(h: OperatorMatrix, s: OperatorMatrix,
                           mode: str = "exact") -> OperatorMatrix:
    """Conjugate H by e^S: exp(-S) H exp(S) exactly, or to second order
    H + [H,S] + [[H,S],S]/2 with mode="bch2"."""
    if h.space != s.space:
        raise SpaceMismatchError("H and S live on different spaces")
    _check_antihermitian(s)
    hd = h.dense()
    sd = s.dense()
    if mode == "exact":
        u = expm(sd)                      # unitary since S is anti-hermitian
        out = u.conj().T @ hd @ u
    elif mode == "bch2":
        c1 = hd @ sd - sd @ hd
        c2 = c1 @ sd - sd @ c1
        out = hd + c1 + 0.5 * c2
    else:
        raise ValueError(f"unknown conjugation mode {mode!r}")
    out = 0.5 * (out + out.conj().T)      # symmetrize round-off
    return OperatorMatrix(h.space, sp.csr_matrix(out), hermitian_hint=True)


def _conversion_matrix(a: _ModeOps, b: _ModeOps) -> sp.csr_matrix:
    """b^dag^2 a + a^dag b^2 (the two-phonon/one-photon conversion)."""
    return ((b.raise_ @ b.raise_) @ a.lower + a.raise_ @ (b.lower @ b.lower)).tocsr()


def build_effective(c: DerivedCouplings, space: SpaceDescriptor,
                    kind: HamiltonianKind) -> OperatorMatrix:
    """Closed-form second-order effective Hamiltonians.

    EFFECTIVE_FULL keeps the qubit (Stark terms conditioned on rho_z);
    EFFECTIVE_GROUND is its qubit-ground projection; PDC additionally drops
    the Stark shifts, leaving free evolution plus the conversion term with
    coefficient -hbar g_a g_b (1/Delta_a + 1/Delta_b)/2.
    """
    for name, val in (("Delta_a", c.Delta_a), ("Delta_b", c.Delta_b)):
        if val == 0.0:
            raise DetuningZeroError(f"{name} is zero; effective form undefined")
    conv_coeff = -0.5 * HBAR * c.g_a * c.g_b * (1.0 / c.Delta_a + 1.0 / c.Delta_b)
    chi_a = c.g_a ** 2 / c.Delta_a
    chi_b = c.g_b ** 2 / c.Delta_b

    if kind is HamiltonianKind.EFFECTIVE_FULL:
        _require_labels(space, (QUBIT, STLR, NMR))
        a = _ModeOps.embedded(space, STLR)
        b = _ModeOps.embedded(space, NMR)
        rho_z = _embedded_qubit(space)["rho_z"]
        h = (HBAR * c.omega_a * a.num - HBAR * chi_a * (a.num @ rho_z)
             - 0.5 * HBAR * (c.Omega + 2.0 * chi_b + chi_a) * rho_z
             + HBAR * (c.omega_b + 2.0 * chi_b) * b.num
             - HBAR * chi_b * (b.num @ rho_z)
             - HBAR * chi_b * ((b.num @ b.num) @ rho_z)
             + conv_coeff * (_conversion_matrix(a, b) @ rho_z))
        return OperatorMatrix(space, h.tocsr(), hermitian_hint=True)

    if kind is HamiltonianKind.EFFECTIVE_GROUND:
        _require_labels(space, (STLR, NMR))
        a = _ModeOps.embedded(space, STLR)
        b = _ModeOps.embedded(space, NMR)
        h = (HBAR * (c.omega_a - chi_a) * a.num
             + HBAR * (c.omega_b + chi_b) * b.num
             - HBAR * chi_b * (b.num @ b.num)
             + conv_coeff * _conversion_matrix(a, b))
        return OperatorMatrix(space, h.tocsr(), hermitian_hint=True)

    if kind is HamiltonianKind.PDC:
        _require_labels(space, (STLR, NMR))
        a = _ModeOps.embedded(space, STLR)
        b = _ModeOps.embedded(space, NMR)
        h = (HBAR * c.omega_a * a.num + HBAR * c.omega_b * b.num
             + conv_coeff * _conversion_matrix(a, b))
        return OperatorMatrix(space, h.tocsr(), hermitian_hint=True)

    raise SpaceMismatchError(f"build_effective does not handle kind {kind}")


def build_bilinear_resonant(kappa: float, space: SpaceDescriptor) -> OperatorMatrix:
    """Interaction-picture conversion Hamiltonian at two-phonon resonance:
    hbar kappa (b^dag^2 a + a^dag b^2)."""
    _require_labels(space, (STLR, NMR))
    a = _ModeOps.embedded(space, STLR)
    b = _ModeOps.embedded(space, NMR)
    return OperatorMatrix(space, (HBAR * kappa * _conversion_matrix(a, b)).tocsr(),
                          hermitian_hint=True)


def build_parametric(kappa: float, beta: float, phi: float,
                     space_b: SpaceDescriptor) -> OperatorMatrix:
    """Classical-drive parametric Hamiltonian hbar kappa beta
    (b^dag^2 e^{-i phi} + b^2 e^{i phi}) on the NMR alone."""
    _require_labels(space_b, (NMR,))
    dim = space_b.dim_of(NMR)
    low, rai = ladder_ops(dim, NMR)
    h = HBAR * kappa * beta * (np.exp(-1j * phi) * (rai.matrix @ rai.matrix)
                               + np.exp(1j * phi) * (low.matrix @ low.matrix))
    return OperatorMatrix(space_b, h.tocsr(), hermitian_hint=True)


# ---------------------------------------------------------------------------
# Term-by-term verification of the second-order elimination
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TermCoefficient:
    label: str
    measured: float
    expected: float

    @property
    def absolute_error(self) -> float:
        return abs(self.measured - self.expected)

    @property
    def relative_error(self) -> float:
        """Relative to the expected value; meaningful only when it is nonzero
        (zero-expected terms are judged by absolute_error against a scale)."""
        scale = max(abs(self.expected), 1e-300)
        return abs(self.measured - self.expected) / scale


@dataclass(frozen=True)
class EliminationReport:
    """Hilbert-Schmidt decomposition of the second-order BCH result onto the
    labeled operator dictionary, plus the enumerated remainder."""

    coefficients: tuple[TermCoefficient, ...]
    remainder_terms: tuple[dict, ...]
    remainder_norm: float
    bch_norm: float

    def coefficient(self, label: str) -> TermCoefficient:
        for t in self.coefficients:
            if t.label == label:
                return t
        raise KeyError(label)


def _interior_projector(space: SpaceDescriptor, margin_a: int,
                        margin_b: int) -> np.ndarray:
    """Boolean mask keeping Fock levels far enough from the truncation edge
    that two applications of the (bandwidth <= 2) operators cannot touch it."""
    keep = np.ones(space.total_dim, dtype=bool).reshape(space.dims)
    idx_a = space.axis_of(STLR)
    idx_b = space.axis_of(NMR)
    n_a = space.dims[idx_a]
    n_b = space.dims[idx_b]
    sl = [slice(None)] * len(space.dims)
    sl[idx_a] = slice(n_a - margin_a, n_a)
    keep[tuple(sl)] = False
    sl = [slice(None)] * len(space.dims)
    sl[idx_b] = slice(n_b - margin_b, n_b)
    keep[tuple(sl)] = False
    return keep.reshape(-1)


def frohlich_term_report(c: DerivedCouplings, space: SpaceDescriptor,
                         margin_a: int = 2, margin_b: int = 4) -> EliminationReport:
    """Project bch2(H_RWA, S) onto the labeled second-order operator basis.

    Coefficients are extracted on the truncation-safe interior by solving the
    Hilbert-Schmidt Gram system, then compared with the closed-form values;
    whatever the dictionary cannot represent is enumerated by excitation
    signature (Delta n_a, Delta n_b, qubit sector) instead of being hidden.
    """
    _require_labels(space, (QUBIT, STLR, NMR))
    h_rwa = build_rwa(c, space)
    s = frohlich_generator(c, space)
    bch = conjugate_by_generator(h_rwa, s, mode="bch2").dense()

    a = _ModeOps.embedded(space, STLR)
    b = _ModeOps.embedded(space, NMR)
    rho_z = _embedded_qubit(space)["rho_z"].toarray()
    n_a = a.num.toarray()
    n_b = b.num.toarray()
    conv = _conversion_matrix(a, b).toarray()
    eye = np.eye(space.total_dim)

    chi_a = c.g_a ** 2 / c.Delta_a
    chi_b = c.g_b ** 2 / c.Delta_b
    conv_coeff = -0.5 * c.g_a * c.g_b * (1.0 / c.Delta_a + 1.0 / c.Delta_b)

    # dictionary entries: (label, matrix, expected coefficient in units of hbar)
    dictionary = [
        ("identity", eye, chi_a / 2.0 + chi_b),
        ("rho_z", rho_z, -0.5 * (c.Omega + 2.0 * chi_b + chi_a)),
        ("n_a", n_a, c.omega_a),
        ("n_a rho_z", n_a @ rho_z, -chi_a),
        ("n_b", n_b, c.omega_b + 2.0 * chi_b),
        ("n_b rho_z", n_b @ rho_z, -chi_b),
        ("n_b^2", n_b @ n_b, 0.0),
        ("n_b^2 rho_z", (n_b @ n_b) @ rho_z, -chi_b),
        ("conversion", conv, 0.0),
        ("conversion rho_z", conv @ rho_z, conv_coeff),
    ]

    mask = _interior_projector(space, margin_a, margin_b)
    sel = np.outer(mask, mask)

    def hs(x, y):
        return complex(np.sum(np.conj(x[sel]) * y[sel]))

    mats = [m for _, m, _ in dictionary]
    gram = np.array([[hs(mi, mj) for mj in mats] for mi in mats])
    vec = np.array([hs(mi, bch / HBAR) for mi in mats])
    coeffs = np.linalg.solve(gram, vec)

    terms = tuple(
        TermCoefficient(label, float(np.real(coeffs[k])), expected)
        for k, (label, _, expected) in enumerate(dictionary)
    )

    recon = sum(coeffs[k] * mats[k] for k in range(len(mats)))
    remainder = (bch / HBAR - recon)
    remainder = np.where(sel, remainder, 0.0)

    # enumerate the remainder by (qubit sector, Delta n_a, Delta n_b)
    dims = space.dims
    qi, ai, bi = (space.axis_of(QUBIT), space.axis_of(STLR), space.axis_of(NMR))
    grids = np.meshgrid(*[np.arange(d) for d in dims], indexing="ij")
    q_idx = grids[qi].reshape(-1)
    a_idx = grids[ai].reshape(-1)
    b_idx = grids[bi].reshape(-1)
    buckets: dict[tuple, float] = {}
    rows, cols = np.nonzero(np.abs(remainder) > 0.0)
    for r, col in zip(rows, cols):
        key = (int(q_idx[r] - q_idx[col]), int(a_idx[r] - a_idx[col]),
               int(b_idx[r] - b_idx[col]))
        buckets[key] = buckets.get(key, 0.0) + abs(remainder[r, col]) ** 2
    remainder_terms = tuple(
        {"delta_q": k[0], "delta_n_a": k[1], "delta_n_b": k[2],
         "hs_norm": float(np.sqrt(v))}
        for k, v in sorted(buckets.items(), key=lambda kv: -kv[1])
    )
    return EliminationReport(
        coefficients=terms,
        remainder_terms=remainder_terms,
        remainder_norm=float(np.linalg.norm(remainder)),
        bch_norm=float(np.linalg.norm(np.where(sel, bch / HBAR, 0.0))),
    )

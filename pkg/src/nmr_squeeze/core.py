"""Truncated Fock-space operator algebra.

Spaces are ordered tensor products of a two-level qubit and hard-truncated
bosonic modes.  Operators are stored sparse (CSR), states dense.  All values
are treated as immutable after construction and every operation here is a
pure function, so everything is safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import (
    InvalidDimensionError,
    SimulationError,
    SpaceMismatchError,
    TruncationError,
)

HERMITICITY_TOL = 1e-12
NORM_TOL = 1e-10


@dataclass(frozen=True)
class SpaceDescriptor:
    """Ordered list of (label, dimension) subsystems.

    The first subsystem is the slowest-varying index (qubit-major ordering
    when the qubit comes first).  Labels must be unique, dimensions >= 2.
    """

    subsystems: tuple[tuple[str, int], ...]

    def __post_init__(self):
        labels = [lab for lab, _ in self.subsystems]
        if len(set(labels)) != len(labels):
            raise InvalidDimensionError(f"duplicate subsystem labels: {labels}")
        for lab, dim in self.subsystems:
            if dim < 2:
                raise InvalidDimensionError(
                    f"subsystem {lab!r} has dimension {dim}; minimum is 2")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.subsystems)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def dim_of(self, label: str) -> int:
        for lab, dim in self.subsystems:
            if lab == label:
                return dim
        raise SpaceMismatchError(f"unknown subsystem {label!r} in {self.labels}")

    def axis_of(self, label: str) -> int:
        for k, (lab, _) in enumerate(self.subsystems):
            if lab == label:
                return k
        raise SpaceMismatchError(f"unknown subsystem {label!r} in {self.labels}")


def single_space(label: str, dim: int) -> SpaceDescriptor:
    return SpaceDescriptor(((label, dim),))


@dataclass(frozen=True)
class OperatorMatrix:
    """Sparse complex operator on a SpaceDescriptor."""

    space: SpaceDescriptor
    matrix: sp.csr_matrix
    hermitian_hint: bool = False

    def __post_init__(self):
        n = self.space.total_dim
        if self.matrix.shape != (n, n):
            raise SpaceMismatchError(
                f"matrix shape {self.matrix.shape} does not match space dim {n}")
        if self.hermitian_hint:
            defect = self.hermiticity_defect()
            if defect > HERMITICITY_TOL:
                raise SpaceMismatchError(
                    f"operator marked hermitian but max |A - A^dag| = {defect:.3e}")

    def hermiticity_defect(self) -> float:
        d = self.matrix - self.matrix.getH()
        return 0.0 if d.nnz == 0 else float(np.abs(d.data).max())

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.space, self.matrix.getH().tocsr(),
                              self.hermitian_hint)

    # Small closed algebra; results never inherit the hermitian hint unless
    # hermiticity actually holds (caller re-tags when it knows better).
    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_same_space(other)
        return OperatorMatrix(self.space, (self.matrix + other.matrix).tocsr())

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_same_space(other)
        return OperatorMatrix(self.space, (self.matrix - other.matrix).tocsr())

    def __mul__(self, scalar: complex) -> "OperatorMatrix":
        return OperatorMatrix(self.space, (self.matrix * scalar).tocsr())

    __rmul__ = __mul__

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_same_space(other)
        return OperatorMatrix(self.space, (self.matrix @ other.matrix).tocsr())

    def as_hermitian(self) -> "OperatorMatrix":
        return OperatorMatrix(self.space, self.matrix, hermitian_hint=True)

    def _check_same_space(self, other: "OperatorMatrix") -> None:
        if self.space != other.space:
            raise SpaceMismatchError(
                f"operator spaces differ: {self.space.labels} vs {other.space.labels}")


@dataclass(frozen=True)
class StateVector:
    """Normalized dense state on a SpaceDescriptor."""

    space: SpaceDescriptor
    amplitudes: np.ndarray

    def __post_init__(self):
        n = self.space.total_dim
        if self.amplitudes.shape != (n,):
            raise SpaceMismatchError(
                f"amplitude length {self.amplitudes.shape} does not match dim {n}")
        nrm = np.linalg.norm(self.amplitudes)
        if abs(nrm - 1.0) > NORM_TOL:
            raise SpaceMismatchError(f"state norm {nrm!r} deviates from 1")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "StateVector") -> complex:
        if self.space != other.space:
            raise SpaceMismatchError("states live on different spaces")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "StateVector") -> float:
        return float(abs(self.overlap(other)) ** 2)

    def reshaped(self) -> np.ndarray:
        return self.amplitudes.reshape(self.space.dims)

    def subsystem_populations(self, label: str) -> np.ndarray:
        """Marginal occupation probabilities of one subsystem."""
        axis = self.space.axis_of(label)
        psi = self.reshaped()
        axes = tuple(k for k in range(len(self.space.dims)) if k != axis)
        return np.sum(np.abs(psi) ** 2, axis=axes)

    def top_fraction_population(self, label: str, fraction: float = 0.1) -> float:
        """Population in the top `fraction` of Fock levels (leakage monitor)."""
        pops = self.subsystem_populations(label)
        dim = len(pops)
        n_top = max(1, int(np.ceil(fraction * dim)))
        return float(pops[dim - n_top:].sum())


def normalized_state(space: SpaceDescriptor, amplitudes: np.ndarray) -> StateVector:
    amps = np.asarray(amplitudes, dtype=np.complex128)
    nrm = np.linalg.norm(amps)
    if nrm == 0.0:
        raise SpaceMismatchError("cannot normalize a zero vector")
    return StateVector(space, amps / nrm)


def ladder_ops(dim: int, label: str = "mode") -> tuple[OperatorMatrix, OperatorMatrix]:
    """Truncated annihilation/creation pair on a single bosonic mode.

    lower|n> = sqrt(n)|n-1>; raise = lower^dag annihilates the top level
    (hard truncation).
    """
    if dim < 2:
        raise InvalidDimensionError(f"ladder operators need dim >= 2, got {dim}")
    space = single_space(label, dim)
    amps = np.sqrt(np.arange(1, dim, dtype=np.float64))
    lower = sp.diags(amps, offsets=1, shape=(dim, dim), dtype=np.complex128).tocsr()
    raise_ = sp.diags(amps, offsets=-1, shape=(dim, dim), dtype=np.complex128).tocsr()
    return (OperatorMatrix(space, lower), OperatorMatrix(space, raise_))


def number_op(dim: int, label: str = "mode") -> OperatorMatrix:
    space = single_space(label, dim)
    return OperatorMatrix(
        space,
        sp.diags(np.arange(dim, dtype=np.float64), dtype=np.complex128).tocsr(),
        hermitian_hint=True,
    )


def identity_op(space: SpaceDescriptor) -> OperatorMatrix:
    return OperatorMatrix(space, sp.identity(space.total_dim, dtype=np.complex128,
                                             format="csr"), hermitian_hint=True)


def qubit_ops(label: str = "q") -> dict[str, OperatorMatrix]:
    """Pauli and ladder operators on a two-level subsystem.

    Index 0 is |0> (ground in the dressed basis), index 1 is |1>:
    rho_z = |0><0| - |1><1|, rho_plus = |1><0|.
    """
    space = single_space(label, 2)

    def op(mat, herm):
        return OperatorMatrix(space, sp.csr_matrix(np.array(mat, dtype=np.complex128)),
                              hermitian_hint=herm)

    return {
        "rho_z": op([[1, 0], [0, -1]], True),
        "rho_x": op([[0, 1], [1, 0]], True),
        "rho_plus": op([[0, 0], [1, 0]], False),
        "rho_minus": op([[0, 1], [0, 0]], False),
        "p_ground": op([[1, 0], [0, 0]], True),
        "p_excited": op([[0, 0], [0, 1]], True),
    }


def embed_operator(op: OperatorMatrix, slot: str, space: SpaceDescriptor) -> OperatorMatrix:
    """Lift a single-subsystem operator into the full tensor-product space."""
    axis = space.axis_of(slot)
    target_dim = space.dims[axis]
    if op.space.total_dim != target_dim:
        raise SpaceMismatchError(
            f"operator dim {op.space.total_dim} does not match subsystem "
            f"{slot!r} dim {target_dim}")
    left = int(np.prod(space.dims[:axis], initial=1))
    right = int(np.prod(space.dims[axis + 1:], initial=1))
    mat = op.matrix
    if left > 1:
        mat = sp.kron(sp.identity(left, dtype=np.complex128), mat)
    if right > 1:
        mat = sp.kron(mat, sp.identity(right, dtype=np.complex128))
    return OperatorMatrix(space, mat.tocsr(), op.hermitian_hint)


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Truncated, renormalized coherent-state coefficients."""
    n = np.arange(dim)
    # log-domain to stay finite for large |alpha|^2
    if alpha == 0:
        amps = np.zeros(dim, dtype=np.complex128)
        amps[0] = 1.0
        return amps
    from scipy.special import gammaln

    logmag = -abs(alpha) ** 2 / 2.0 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    phase = np.exp(1j * n * np.angle(alpha))
    amps = np.exp(logmag) * phase
    return amps / np.linalg.norm(amps)


def make_state(space: SpaceDescriptor, spec: dict, *,
               unsafe_amplitude_ok: bool = False) -> StateVector:
    """Build a normalized product state.

    `spec` maps each subsystem label to either an integer (Fock/qubit basis
    index) or a ("coherent", alpha) pair.  Coherent amplitudes are guarded by
    |alpha|^2 <= dim/4 unless `unsafe_amplitude_ok` is set; violations raise
    a TruncationError naming the subsystem.
    """
    missing = set(space.labels) - set(spec)
    extra = set(spec) - set(space.labels)
    if missing or extra:
        raise SpaceMismatchError(
            f"state spec labels mismatch: missing {sorted(missing)}, extra {sorted(extra)}")
    factors = []
    for lab, dim in space.subsystems:
        entry = spec[lab]
        if isinstance(entry, (int, np.integer)):
            if not 0 <= entry < dim:
                raise TruncationError(
                    f"basis index {entry} out of range for subsystem {lab!r} (dim {dim})")
            v = np.zeros(dim, dtype=np.complex128)
            v[entry] = 1.0
        elif isinstance(entry, tuple) and len(entry) == 2 and entry[0] == "coherent":
            alpha = complex(entry[1])
            if abs(alpha) ** 2 > dim / 4.0 and not unsafe_amplitude_ok:
                raise TruncationError(
                    f"coherent |alpha|^2 = {abs(alpha)**2:.3g} exceeds dim/4 = "
                    f"{dim / 4:.3g} for subsystem {lab!r}; increase the truncation")
            v = coherent_amplitudes(alpha, dim)
        else:
            raise SpaceMismatchError(
                f"unrecognized state spec for {lab!r}: {entry!r}")
        factors.append(v)
    amps = factors[0]
    for v in factors[1:]:
        amps = np.kron(amps, v)
    return normalized_state(space, amps)


def expectation(op: OperatorMatrix, state: StateVector) -> complex:
    if op.space != state.space:
        raise SpaceMismatchError("operator and state live on different spaces")
    return complex(np.vdot(state.amplitudes, op.matrix @ state.amplitudes))


def expectation_and_variance(op: OperatorMatrix, state: StateVector) -> tuple[complex, float]:
    """Mean <A> and variance <A^2> - <A>^2 (Hermitian operators only for the
    variance; tiny negative round-off is clamped to 0)."""
    if not op.hermitian_hint:
        raise SpaceMismatchError("variance requested for a non-hermitian operator")
    mean = expectation(op, state)
    vec = op.matrix @ state.amplitudes
    second = float(np.real(np.vdot(vec, vec)))
    var = second - abs(mean) ** 2
    if var < 0.0:
        if var < -1e-12:
            raise SimulationError(
                f"variance {var} is negative beyond round-off tolerance")
        var = 0.0
    return mean, var

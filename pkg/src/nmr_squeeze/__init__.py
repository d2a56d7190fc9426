"""Desk-scale simulator of squeezed-state generation in a driven
qubit/resonator/mechanical-oscillator circuit."""

from .core import (
    OperatorMatrix,
    SpaceDescriptor,
    StateVector,
    embed_operator,
    expectation,
    expectation_and_variance,
    ladder_ops,
    make_state,
)
from .device import (
    DeviceParams,
    DerivedCouplings,
    RegimeReport,
    derive_couplings,
    josephson_expansion,
    validate_regimes,
)
from .evolve import (
    EnsembleStats,
    NoiseModel,
    Propagator,
    compare_dynamics,
    phase_noise_ensemble,
    propagate,
)
from .hamiltonians import (
    HamiltonianKind,
    build_effective,
    build_parametric,
    build_rwa,
    build_total,
    conjugate_by_generator,
    frohlich_generator,
    full_space,
    nmr_space,
    two_mode_space,
)
from .squeezing import (
    SqueezeSpec,
    VariancePair,
    bogoliubov_check,
    fig2_table,
    predicted_variances,
    quadrature_variances,
    squeeze_operator,
)

__version__ = "0.1.0"

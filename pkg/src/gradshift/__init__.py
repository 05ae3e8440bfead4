"""gradshift: bias-free derivative rules for arbitrary Hermitian generators.

Workflow: diagonalize the generator, filter its unique positive spectral
gaps, build a shift rule from the gaps, then evaluate the derivative as a
weighted sum of expectation values at shifted parameters, exactly on the
embedded statevector simulator or from finite-shot samples.
"""
from __future__ import annotations

__version__ = "0.1.0"

from . import errors, gates, rules, sampling, sim, spectral, verify
from .errors import (
    ConvergenceFailure,
    DegenerateStencil,
    DimensionMismatch,
    EmptyGapSet,
    GapMismatchWarning,
    GradshiftError,
    IllConditionedWarning,
    InsufficientStencils,
    InternalConsistencyError,
    InvalidPauliCharacter,
    NonHermitianInput,
    NonUnitaryInput,
    ShiftSelectionFailure,
    SingularShift,
    SingularShiftPair,
    SingularStencil,
    SingularSystem,
)
from .gates import (
    GateDescriptor,
    cross_resonance,
    fsim,
    fsim_matrix,
    pauli_string,
    product_feature_map,
    qutrit_generators,
    resolve_generator,
)
from .rules import (
    ShiftRule,
    SineSystem,
    apply_chain,
    closed_s1,
    closed_s2,
    closed_s3,
    default_shifts,
    real_symmetric_rule,
    symmetric_rule,
    triangulation_general,
    triangulation_s1,
)
from .sampling import (
    DerivativeEstimate,
    VarianceGrid,
    analytic_variance,
    empirical_variance,
    estimate_derivative,
    figure_preset,
    measurement_sigma2,
    sample_expectation,
    variance_grid,
)
from .sim import (
    CircuitSpec,
    StateVector,
    basis_state,
    circuit_from_dict,
    evaluate_rule,
    exact_derivative,
    expectation,
    fd_derivative,
    generator_unitary,
    haar_unitary,
    random_circuit,
    random_hermitian,
    random_orthogonal,
    random_real_circuit,
)
from .spectral import (
    GapSet,
    HermitianOperator,
    Spectrum,
    default_gap_tolerance,
    diagonalize,
    unique_gaps,
)

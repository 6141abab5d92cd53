"""fockbench: a second-quantization circuit simulator with two backends.

One backend evaluates circuits in an explicit truncated occupation-number
representation; the other works purely algebraically from the canonical
(anti)commutation relations and vacuum annihilation.  Detection statistics
from both routes agree, and the package ships a comparator that checks
exactly that on every circuit it runs.
"""

from .algebra import (
    KetExpression,
    LadderPolynomial,
    LadderSymbol,
    SeriesConvergenceError,
    annihilation,
    apply_exponential_series,
    apply_number_diagonal,
    basis_ket,
    commutator,
    creation,
    ket_from_creations,
    ket_inner,
    multiply,
    normal_order,
    reduce_to_ket,
    substitute_modes,
    vacuum_expectation,
    vacuum_ket,
)
from .backends import (
    ComparisonReport,
    MeasurementReport,
    TruncationWarning,
    compare_backends,
    evolve_numeric,
    evolve_symbolic,
    heisenberg_residual,
    ket_to_fock,
    measure,
    polynomial_matrix,
)
from .circuit import (
    AnnihilationVertex,
    BeamSplitter,
    Circuit,
    EXPERIMENTS,
    KerrMedium,
    PhaseShifter,
    QuadraticCustom,
    build_experiment,
    element_generator,
    element_modes,
    generator_from_unitary,
    mode_matrix,
    with_cutoff,
)
from .dsl import CircuitParseError, parse_circuit, render_circuit
from .fock import (
    FockVector,
    SparseOperator,
    annihilation_op,
    apply,
    creation_op,
    identity_op,
    inner_product,
    mode_bipartition_entropy,
    number_op,
    vacuum_state,
)
from .modes import BOSON, DEFAULT_CUTOFF, FERMION, ModeSystem

__version__ = "0.1.0"

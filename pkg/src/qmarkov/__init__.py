"""Quantum marginal families on chordal graphs.

The package decides when a family of overlapping density-operator marginals
extends to a global state that is Markov with respect to a chordal graph,
and builds the extension when it exists.  Supporting machinery: entropic
quantities on labeled systems, chordal graph structure, a maximum-entropy
solver, relative modular calculus with recovery maps, and Pauli-word
constructions used as closed-form test families.
"""

from .core import (
    DensityOperator,
    Operator,
    Spectrum,
    SystemLayout,
    embed,
    fro_dist,
    hermitian_eig,
    identity,
    is_normal,
    matrix_func,
    odot,
    partial_trace,
    star,
)
from .graph import (
    ChordalStructure,
    Graph,
    chordal_structure,
    decompositions,
    mcs,
    separates,
)
from .info import (
    InfoReport,
    cmi,
    divergence,
    entropy,
    gi_divergence_residual,
    global_information,
)
from .markov import (
    MarginalFamily,
    MarkovCheck,
    MarkovCompatibility,
    TraceCriterionReport,
    completion_candidate,
    completion_candidate_pair,
    conditional_density,
    is_quantum_markov,
    markov_compatible,
    one_sided_reconstruction,
    sandwich_operator,
    trace_criterion,
)
from .maxent import (
    DualParameters,
    MaxentResult,
    entropy_gap,
    solve_maxent,
    verify_loglinear,
)
from .modular import (
    IntersectionReport,
    ModularPair,
    PetzEqualityReport,
    divergence_via_integral,
    equality_criterion,
    intersection_check,
    modular_apply,
    petz_equality_check,
    petz_recovery,
    resolvent_solve,
    weighted_inner,
)
from .pauli import (
    BasicQubitClosedForms,
    anticommutes,
    basic_qubit_completion,
    basic_qubit_family,
    pauli_log_closed_form,
    pauli_state,
    word_matrix,
)
from . import errors, sampling, serialize

__all__ = [
    "BasicQubitClosedForms",
    "ChordalStructure",
    "DensityOperator",
    "DualParameters",
    "Graph",
    "InfoReport",
    "IntersectionReport",
    "MarginalFamily",
    "MarkovCheck",
    "MarkovCompatibility",
    "MaxentResult",
    "ModularPair",
    "Operator",
    "PetzEqualityReport",
    "Spectrum",
    "SystemLayout",
    "TraceCriterionReport",
    "anticommutes",
    "basic_qubit_completion",
    "basic_qubit_family",
    "chordal_structure",
    "cmi",
    "completion_candidate",
    "completion_candidate_pair",
    "conditional_density",
    "decompositions",
    "divergence",
    "divergence_via_integral",
    "embed",
    "entropy",
    "entropy_gap",
    "equality_criterion",
    "errors",
    "fro_dist",
    "gi_divergence_residual",
    "global_information",
    "hermitian_eig",
    "identity",
    "intersection_check",
    "is_normal",
    "is_quantum_markov",
    "markov_compatible",
    "matrix_func",
    "mcs",
    "modular_apply",
    "odot",
    "one_sided_reconstruction",
    "partial_trace",
    "pauli_log_closed_form",
    "pauli_state",
    "petz_equality_check",
    "petz_recovery",
    "resolvent_solve",
    "sampling",
    "sandwich_operator",
    "separates",
    "serialize",
    "solve_maxent",
    "star",
    "trace_criterion",
    "verify_loglinear",
    "weighted_inner",
    "word_matrix",
]

__version__ = "0.1.0"

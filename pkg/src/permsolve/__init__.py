"""Frequency-permutation recovery for sparse convolutive filter matrices.

Public surface re-exported here: the filter-matrix model and sparse
generation, unitary spectral tools and Dirac combs, sparsity metrics and
thresholds, bistochastic transversals, the greedy solver with its brute-force
oracle, counterexample generators, and the Monte-Carlo harness.
"""

from .adversarial import (
    CounterexampleBundle,
    embed_counterexample,
    lemma3_counterexample,
    lemma4_counterexample,
    validate_bundle,
)
from .assignment import (
    BistochasticMatrix,
    CountMatrix,
    best_matching_global_perm,
    count_matrix,
    hall_transversal,
    sharp_permutation_sequence,
    sinkhorn_bistochastic,
    sinkhorn_normalize,
)
from .errors import (
    ContractError,
    DimensionMismatchError,
    DocumentError,
    GuardViolationError,
    InternalContradictionError,
    InvalidParameterError,
    PermsolveError,
    UndefinedSNRError,
)
from .experiments import (
    Cell,
    ExperimentConfig,
    TrialRecord,
    run_cell,
    run_experiment,
    runtime_model_fit,
)
from .filters import FilterMatrix, SparseSpec, generate_sparse_matrix, support
from .kernels import available_backends, default_backend_name
from .solver import (
    BruteForceResult,
    SolveResult,
    SolverConfig,
    Theorem2Verdict,
    brute_force_solve,
    greedy_solve,
    verify_theorem2_instance,
)
from .sparsity import (
    DeltaReport,
    WellPosedness,
    alpha,
    alpha_caratheodory,
    alpha_weak,
    check_uncertainty_budget,
    delta,
    is_equivalent,
    lp_norm,
    snr,
)
from .spectral import (
    CombSpec,
    PermutationSequence,
    apply_frequency_permutations,
    detect_comb_difference,
    dft,
    idft,
    make_comb,
    random_permutation_sequence,
)

__version__ = "0.1.0"

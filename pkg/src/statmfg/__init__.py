"""Stationary mean field equilibria of finite-state, finite-action mean field games."""
from .ctmdp import (
    DiscreteMDP,
    OptimalitySummary,
    batch_optimal_q_values,
    discrete_policy_value,
    optimal_action_sets,
    policy_value,
    q_values,
    solve_optimal_value,
    uniformize,
)
from .equilibrium import (
    BestResponseHull,
    EquilibriumCertificate,
    SearchConfig,
    SearchResult,
    best_response_vertices,
    find_mixed_equilibria,
    find_pure_equilibria,
    hull_distance,
    recover_strategy,
    solve,
    verify_equilibrium,
)
from .errors import (
    DegenerateDynamics,
    Infeasible,
    InvalidCut,
    InvalidParams,
    MalformedModel,
    MFGError,
    NonConvergence,
    ReducibleGenerator,
    SingularSystem,
)
from .library import (
    ConsumerParams,
    CorruptionParams,
    consumer_model,
    consumer_reference,
    corruption_model,
    corruption_reference,
)
from .model import (
    ModelSpec,
    Monomial,
    Polynomial,
    PolyTerm,
    RegLogTerm,
    ValidationReport,
    as_distribution,
    as_strategy,
    deterministic_strategy,
    evaluate_rates,
    evaluate_rewards,
    validate_model,
)
from .serialization import load_model, model_from_dict, model_to_dict, save_model
from .stationary import (
    StationaryPoint,
    assemble_generator,
    cofactor_distribution,
    cut_residual,
    is_irreducible,
    minor_sign_check,
    stationary_distribution,
)

__version__ = "0.1.0"

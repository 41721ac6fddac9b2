"""Budgeted influence maximization on sparse Ising models.

Public surface: model types and I/O, graph utilities, exact inference,
influence functionals, the localization solver with its brute-force
reference, Glauber-dynamics estimation, and the marginal-recovery
reduction.
"""

from .errors import CapacityError, ConvergenceError, ModelFormatError
from .model import (
    FamilyCheck,
    FamilyParams,
    IsingModel,
    PartialAssignment,
    SolverConfig,
    VertexSet,
    WeightVector,
    critical_coupling,
    load_model,
    parse_model,
    random_instance,
    random_weights,
    save_model,
    serialize_model,
    validate_family,
)
from .graph import (
    ball,
    components_in_power_graph,
    connected_components,
    enumerate_connected_clusters,
    graph_diameter,
    power_adjacent,
)
from .exact import JointTable, PinnedModel, expectation, log_partition, marginal_plus
from .influence import (
    InfluenceEvaluator,
    InfluenceQuery,
    MonteCarloFallback,
    decompose_local,
    fit_geometric_decay,
    global_influence,
    influence_decay_profile,
    local_influence,
    total_influence_profile,
    total_influence_sum,
)
from .solver import (
    Cluster,
    ClusterGraph,
    Solution,
    brute_force_infmax,
    budgeted_mwis,
    build_cluster_graph,
    calibrate_decay_constant,
    radius_schedule,
    select_radius,
    solve_infmax,
)
from .estimate import ChainState, estimate_influence, glauber_step, make_chain
from .reduction import (
    Direction,
    Gadget,
    build_gadget,
    classify_optimum,
    estimate_marginal,
    make_localization_solver,
    oracle_solver,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "ConvergenceError", "ModelFormatError",
    "FamilyCheck", "FamilyParams", "IsingModel", "PartialAssignment",
    "SolverConfig", "VertexSet", "WeightVector",
    "critical_coupling", "load_model", "parse_model", "random_instance",
    "random_weights", "save_model", "serialize_model", "validate_family",
    "ball", "components_in_power_graph", "connected_components",
    "enumerate_connected_clusters", "graph_diameter", "power_adjacent",
    "JointTable", "PinnedModel", "expectation", "log_partition", "marginal_plus",
    "InfluenceEvaluator", "InfluenceQuery", "MonteCarloFallback",
    "decompose_local", "fit_geometric_decay", "global_influence",
    "influence_decay_profile", "local_influence",
    "total_influence_profile", "total_influence_sum",
    "Cluster", "ClusterGraph", "Solution", "brute_force_infmax",
    "budgeted_mwis", "build_cluster_graph", "calibrate_decay_constant",
    "radius_schedule", "select_radius", "solve_infmax",
    "ChainState", "estimate_influence", "glauber_step", "make_chain",
    "Direction", "Gadget", "build_gadget", "classify_optimum",
    "estimate_marginal", "make_localization_solver", "oracle_solver",
]

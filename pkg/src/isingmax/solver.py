"""The budgeted influence-maximization solver and its brute-force reference.

The solver localizes the objective to radius-r balls and proceeds in four
steps: enumerate candidate clusters (subsets connected in the (2r+1)-power
graph), score each cluster's best local influence exactly, solve a budgeted
maximum-weight independent-set problem over the cluster graph, and combine
the winning clusters into the final pinning.  Because cluster scores are
exact here (enumeration instead of an approximate counting backend) and the
independent-set step is exact, the output maximizes the local influence
exactly; the only gap to the global optimum is the localization radius.

Radii beyond the graph diameter change nothing (balls saturate), so the
solver caps the working radius at the diameter and records both values.
"""

import math
from dataclasses import dataclass, field
from itertools import combinations, product

from . import graph
from .errors import CapacityError
from .exact import DEFAULT_EXACT_BALL_CAP
from .influence import InfluenceEvaluator, total_influence_profile
from .model import (
    FamilyParams,
    IsingModel,
    PartialAssignment,
    SolverConfig,
    VertexSet,
    WeightVector,
    check_weights,
    validate_family,
)

# The assignment loop and pruning sizes assume a small constant budget.
DEFAULT_MAX_BUDGET = 6


@dataclass(frozen=True)
class Cluster:
    """A candidate subset with its cost, best score, and best assignment."""

    T: VertexSet
    cost: int
    weight: float
    best_assignment: PartialAssignment


@dataclass
class ClusterGraph:
    """Clusters plus their power-graph adjacency (pairs of indices, i < j)."""

    clusters: list[Cluster]
    adjacency: list[tuple[int, int]]
    radius: int

    @property
    def n_vertices(self) -> int:
        return len(self.clusters)

    @property
    def max_degree(self) -> int:
        deg = [0] * len(self.clusters)
        for i, j in self.adjacency:
            deg[i] += 1
            deg[j] += 1
        return max(deg, default=0)

    def neighbor_sets(self) -> list[set[int]]:
        ns: list[set[int]] = [set() for _ in self.clusters]
        for i, j in self.adjacency:
            ns[i].add(j)
            ns[j].add(i)
        return ns


@dataclass
class Solution:
    """A chosen pinning with its achieved values and run diagnostics."""

    S_hat: VertexSet
    sigma_hat: PartialAssignment
    local_value: float
    global_value: float | None
    radius_used: int | None
    diagnostics: dict = field(default_factory=dict)


def radius_schedule(cfg: SolverConfig, params: FamilyParams) -> tuple[int, int]:
    """The localization radii (rho, r) for the configured accuracy.

    rho = ceil((1/delta) * ln(6*C*k/epsilon)) and
    r = rho + ceil((1/delta) * (ln(24*C/epsilon) + rho*ln(delta_max))),
    clamped below at rho >= 1 and r >= rho (the derivation assumes a
    positive radius; very large epsilon would otherwise push the ceilings
    negative).
    """
    if params is None or params.delta is None:
        raise ValueError("radius formulas require FamilyParams with the slack delta set")
    d = params.delta
    C = cfg.decay_constant
    rho = math.ceil((1.0 / d) * math.log(6.0 * C * cfg.k / cfg.epsilon))
    rho = max(1, rho)
    step = math.ceil((1.0 / d) * (math.log(24.0 * C / cfg.epsilon) + rho * math.log(params.delta_max)))
    r = rho + max(0, step)
    return rho, r


def select_radius(cfg: SolverConfig, params: FamilyParams | None = None) -> int:
    """The working radius: the override verbatim if present, else the formula."""
    if cfg.radius_override is not None:
        return cfg.radius_override
    return radius_schedule(cfg, params)[1]


def build_cluster_graph(
    model: IsingModel,
    weights: WeightVector,
    cfg: SolverConfig,
    r: int,
    evaluator: InfluenceEvaluator | None = None,
) -> ClusterGraph:
    """Enumerate clusters, score their best local influence, wire adjacency.

    Every cluster T is scored exactly: assignments are enumerated
    lexicographically (+1 before -1 per vertex, smaller ids first), the
    local influence at radius r is computed on the induced ball, and the
    first maximizer is kept, so ties resolve deterministically.
    """
    check_weights(model, weights)
    if evaluator is None:
        evaluator = InfluenceEvaluator(model, weights, ball_cap=cfg.exact_ball_cap)
    clusters: list[Cluster] = []
    reach_balls: list[set[int]] = []
    for T in graph.enumerate_connected_clusters(model, cfg.k, r):
        ball_T = graph.ball(model, T, r)
        if len(ball_T) > cfg.exact_ball_cap:
            raise CapacityError(
                f"cluster {T}: |B(T,{r})| = {len(ball_T)} exceeds "
                f"exact_ball_cap={cfg.exact_ball_cap}"
            )
        best_value = -math.inf
        best_sigma: PartialAssignment = {}
        for spins in product((1, -1), repeat=len(T)):
            sigma = dict(zip(T, spins))
            value = evaluator.local_influence(T, sigma, r)
            if value > best_value:
                best_value = value
                best_sigma = sigma
        clusters.append(Cluster(T=T, cost=len(T), weight=best_value, best_assignment=best_sigma))
        reach_balls.append(set(graph.ball(model, T, 2 * r + 1)))
    adjacency: list[tuple[int, int]] = []
    for i in range(len(clusters)):
        for j in range(i + 1, len(clusters)):
            if any(v in reach_balls[i] for v in clusters[j].T):
                adjacency.append((i, j))
    return ClusterGraph(clusters=clusters, adjacency=adjacency, radius=r)


def budgeted_mwis(H: ClusterGraph, k: int) -> list[int]:
    """Max-weight independent set of H with total cost at most k, exactly.

    Keeps, per cost class, the k*(D+1) heaviest clusters (every vertex
    blocks at most D+1 others, so this pruned pool still contains an
    optimal solution) and searches subsets of the pool.  The empty set is
    always feasible, so clusters with non-positive weight are never forced
    into the answer.
    """
    if k < 1:
        raise ValueError(f"budget must be >= 1, got {k}")
    D = H.max_degree
    keep = k * (D + 1)
    pool: list[int] = []
    for cost in range(1, k + 1):
        cls = [i for i, c in enumerate(H.clusters) if c.cost == cost]
        cls.sort(key=lambda i: (-H.clusters[i].weight, i))
        pool.extend(cls[:keep])
    pool.sort()
    neighbor = H.neighbor_sets()

    best_weight = 0.0
    best_set: tuple[int, ...] = ()

    def search(start: int, chosen: list[int], cost: int, weight: float) -> None:
        nonlocal best_weight, best_set
        if weight > best_weight:
            best_weight = weight
            best_set = tuple(chosen)
        for idx in range(start, len(pool)):
            i = pool[idx]
            c = H.clusters[i]
            if c.weight <= 0.0 or cost + c.cost > k:
                continue
            if any(j in neighbor[i] for j in chosen):
                continue
            chosen.append(i)
            search(idx + 1, chosen, cost + c.cost, weight + c.weight)
            chosen.pop()

    search(0, [], 0, 0.0)
    return list(best_set)


def solve_infmax(
    model: IsingModel,
    weights: WeightVector,
    cfg: SolverConfig,
    params: FamilyParams | None = None,
    best_effort: bool = False,
    compute_global: bool = True,
    max_budget: int = DEFAULT_MAX_BUDGET,
) -> Solution:
    """Run the full localization algorithm and return the chosen pinning.

    ``params`` supplies the family slack for the radius formula; it may be
    omitted when ``cfg.radius_override`` is set.  When the working radius
    makes some ball exceed the exact capacity, the solver fails with the
    largest feasible radius in the message, unless ``best_effort`` is set,
    in which case it shrinks the radius and flags the output as heuristic.
    """
    check_weights(model, weights)
    if cfg.k > max_budget:
        raise ValueError(
            f"budget k={cfg.k} exceeds the supported constant budget {max_budget}; "
            f"raise max_budget explicitly if this is intended"
        )
    warnings: list[str] = []
    if params is not None:
        fc = validate_family(model, params)
        if not fc:
            warnings.append(f"model is outside the high-temperature family: {fc.reason}; "
                            "the approximation guarantee is void")
    if not weights.is_one_bounded():
        warnings.append("weights are not 1-bounded; the guarantee assumes max |a_v| <= 1")

    requested_r = select_radius(cfg, params)
    diam = graph.graph_diameter(model)
    r = min(requested_r, diam)

    evaluator = InfluenceEvaluator(model, weights, ball_cap=cfg.exact_ball_cap)
    H = None
    while True:
        try:
            H = build_cluster_graph(model, weights, cfg, r, evaluator=evaluator)
            break
        except CapacityError as exc:
            if not best_effort:
                feasible = _largest_feasible_radius(model, cfg, r)
                raise CapacityError(
                    f"{exc} (largest feasible radius is {feasible}; "
                    f"rerun with best_effort to proceed heuristically)"
                ) from exc
            if r == 0:
                raise
            r -= 1
    if best_effort and r < min(requested_r, diam):
        warnings.append(
            f"best-effort mode reduced the radius from {min(requested_r, diam)} to {r}; "
            "the output is heuristic and the guarantee is void"
        )

    chosen = budgeted_mwis(H, cfg.k)
    S_hat: list[int] = []
    sigma_hat: PartialAssignment = {}
    local_value = 0.0
    for i in chosen:
        c = H.clusters[i]
        S_hat.extend(c.T)
        sigma_hat.update(c.best_assignment)
        local_value += c.weight
    S = tuple(sorted(S_hat))

    global_value: float | None = None
    if compute_global:
        try:
            global_value = evaluator.global_influence(S, sigma_hat) if S else 0.0
        except CapacityError:
            warnings.append("global value not computed: component exceeds exact capacity")

    diagnostics = {
        "requested_radius": requested_r,
        "effective_radius": r,
        "graph_diameter": diam,
        "cluster_count": H.n_vertices,
        "cluster_graph_max_degree": H.max_degree,
        "chosen_clusters": chosen,
        "best_effort": best_effort,
        "warnings": warnings,
    }
    return Solution(
        S_hat=S,
        sigma_hat=sigma_hat,
        local_value=local_value,
        global_value=global_value,
        radius_used=r,
        diagnostics=diagnostics,
    )


def _largest_feasible_radius(model: IsingModel, cfg: SolverConfig, r_start: int) -> int:
    """Largest radius <= r_start whose cluster balls all fit the exact cap."""
    for r in range(r_start, -1, -1):
        ok = True
        for T in graph.enumerate_connected_clusters(model, cfg.k, r):
            if len(graph.ball(model, T, r)) > cfg.exact_ball_cap:
                ok = False
                break
        if ok:
            return r
    return 0


def brute_force_infmax(
    model: IsingModel,
    weights: WeightVector,
    k: int,
    restrict_exact: bool = True,
    ball_cap: int = DEFAULT_EXACT_BALL_CAP,
) -> Solution:
    """Exhaustive reference solver: maximize the global influence directly.

    Scans every subset of size <= k and every assignment in canonical order
    (subsets by size then lexicographically; +1 before -1 per vertex), so
    ties resolve deterministically to the first maximizer.  The empty
    pinning with value 0 is the starting point.
    """
    check_weights(model, weights)
    if restrict_exact and model.n > 16:
        raise CapacityError(
            f"brute-force reference is limited to n <= 16 (got n={model.n}); "
            f"pass restrict_exact=False to override"
        )
    evaluator = InfluenceEvaluator(model, weights, ball_cap=ball_cap)
    best_value = 0.0
    best_S: VertexSet = ()
    best_sigma: PartialAssignment = {}
    queries = 0
    for size in range(1, min(k, model.n) + 1):
        for S in combinations(range(model.n), size):
            for spins in product((1, -1), repeat=size):
                sigma = dict(zip(S, spins))
                value = evaluator.global_influence(S, sigma)
                queries += 1
                if value > best_value:
                    best_value = value
                    best_S = S
                    best_sigma = sigma
    return Solution(
        S_hat=best_S,
        sigma_hat=best_sigma,
        local_value=best_value,
        global_value=best_value,
        radius_used=None,
        diagnostics={"method": "exhaustive", "queries": queries},
    )


def calibrate_decay_constant(
    model: IsingModel,
    weights: WeightVector,
    cfg: SolverConfig,
    params: FamilyParams,
    samples: int = 8,
) -> float:
    """Fit the smallest constant C' with influence sums <= C' * (1-delta)^L.

    Scans a deterministic sample of source vertices and every distance
    threshold; sums below 1e-12 are treated as zero (pure roundoff noise
    would otherwise be amplified by the (1-delta)^-L factor).  The result
    may be passed back in as ``cfg.decay_constant``.
    """
    if params.delta is None:
        raise ValueError("calibration requires FamilyParams with the slack delta set")
    base = 1.0 - params.delta
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if model.n <= samples:
        sources = list(range(model.n))
    else:
        stride = model.n / samples
        sources = sorted({int(i * stride) for i in range(samples)})
    best = 0.0
    for u in sources:
        profile = total_influence_profile(model, u, ball_cap=cfg.exact_ball_cap)
        for L, s in enumerate(profile, start=1):
            if s < 1e-12:
                continue
            best = max(best, s / base**L)
    return best

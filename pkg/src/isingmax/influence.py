"""Global and local influence functionals.

The influence of pinning a set S to spins sigma_S is the change it causes
in the expected weighted spin sum; the local variant measures the same
change on the induced submodel of the radius-r ball around S.  Both reduce
to per-component conditional expectations, and components that contain no
pinned vertex contribute exactly zero and are skipped.

`InfluenceEvaluator` caches per-component joint tables so that repeated
queries against one model (the solver's cluster scoring, the brute-force
reference search) cost one enumeration per distinct region rather than one
per query.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import exact, graph
from .errors import CapacityError, ModelFormatError
from .exact import DEFAULT_EXACT_BALL_CAP, DEFAULT_TABLE_CAP, JointTable, PinnedModel
from .model import (
    IsingModel,
    PartialAssignment,
    VertexSet,
    WeightVector,
    as_vertex_set,
    check_assignment,
    check_weights,
)


@dataclass(frozen=True)
class InfluenceQuery:
    """A pinning (S, sigma_S) to evaluate, globally or at a finite radius."""

    model: IsingModel
    weights: WeightVector
    S: VertexSet
    sigma_S: PartialAssignment
    radius: int | None = None

    def __post_init__(self):
        check_weights(self.model, self.weights)
        check_assignment(self.sigma_S, self.model.n)
        S = as_vertex_set(self.S)
        if set(self.sigma_S.keys()) != set(S):
            raise ModelFormatError("assignment keys must equal the pinned set exactly")
        object.__setattr__(self, "S", S)


@dataclass(frozen=True)
class MonteCarloFallback:
    """Sampling parameters used when a query exceeds exact capacity."""

    burn_in: int
    samples: int
    thin: int
    seed: int


class InfluenceEvaluator:
    """Exact influence queries against one fixed (model, weights) pair."""

    def __init__(
        self,
        model: IsingModel,
        weights: WeightVector,
        ball_cap: int = DEFAULT_EXACT_BALL_CAP,
        table_cap: int = DEFAULT_TABLE_CAP,
    ):
        check_weights(model, weights)
        self.model = model
        self.weights = weights
        self.ball_cap = ball_cap
        self.table_cap = table_cap
        self._tables: dict[VertexSet, JointTable] = {}
        self._avals: dict[VertexSet, np.ndarray] = {}
        self._base_mean: dict[VertexSet, float] = {}
        self._components: list[VertexSet] | None = None

    def model_components(self) -> list[VertexSet]:
        if self._components is None:
            self._components = graph.connected_components(self.model)
        return self._components

    def global_influence(self, S, sigma_S: PartialAssignment) -> float:
        """Influence of the pinning on the whole model."""
        S = as_vertex_set(S)
        if not S:
            return 0.0
        members = set(S)
        total = 0.0
        for comp in self.model_components():
            if members & set(comp):
                total += self._region_influence(comp, sigma_S)
        return total

    def local_influence(self, S, sigma_S: PartialAssignment, r: int) -> float:
        """Influence of the pinning on the induced submodel of B(S, r)."""
        S = as_vertex_set(S)
        if not S:
            return 0.0
        region = graph.ball(self.model, S, r)
        return self._region_influence(region, sigma_S)

    def _region_influence(self, region: VertexSet, sigma_S: PartialAssignment) -> float:
        total = 0.0
        for comp in graph.induced_components(self.model, region):
            pin = {v: s for v, s in sigma_S.items() if v in set(comp)}
            if not pin:
                continue  # unpinned components cancel exactly
            total += self._component_influence(comp, pin)
        return total

    def _component_influence(self, comp: VertexSet, pin: PartialAssignment) -> float:
        if len(comp) > self.ball_cap:
            raise CapacityError(
                f"component of size {len(comp)} exceeds exact_ball_cap={self.ball_cap}"
            )
        if len(comp) <= self.table_cap:
            table = self._tables.get(comp)
            if table is None:
                table = JointTable(self.model, comp, cap=self.table_cap)
                self._tables[comp] = table
                self._avals[comp] = table.config_values(self.weights.a[list(comp)])
                self._base_mean[comp] = table.mean_of(self._avals[comp])
            vals = self._avals[comp]
            return table.mean_of(vals, pin) - self._base_mean[comp]
        a_slice = self.weights.a[list(comp)]
        base = self._base_mean.get(comp)
        if base is None:
            base = exact.weighted_expectation(
                PinnedModel.make(self.model, comp), a_slice, cap=self.ball_cap
            )
            self._base_mean[comp] = base
        cond = exact.weighted_expectation(
            PinnedModel.make(self.model, comp, pin), a_slice, cap=self.ball_cap
        )
        return cond - base


def global_influence(
    q: InfluenceQuery,
    ball_cap: int = DEFAULT_EXACT_BALL_CAP,
    mc: MonteCarloFallback | None = None,
) -> float:
    """Exact global influence of (S, sigma_S); optional Monte Carlo fallback.

    If a component exceeds the exact capacity and `mc` is provided, the
    value is estimated by Glauber sampling instead of raising.
    """
    if q.radius is not None:
        raise ModelFormatError("global influence takes a query without a radius")
    ev = InfluenceEvaluator(q.model, q.weights, ball_cap=ball_cap)
    try:
        return ev.global_influence(q.S, q.sigma_S)
    except CapacityError:
        if mc is None:
            raise
        from . import estimate

        value, _ = estimate.estimate_influence(
            q.model, q.weights, q.S, q.sigma_S,
            burn_in=mc.burn_in, samples=mc.samples, thin=mc.thin, seed=mc.seed,
        )
        return value


def local_influence(q: InfluenceQuery, ball_cap: int = DEFAULT_EXACT_BALL_CAP) -> float:
    """Exact local influence of (S, sigma_S) at the query's radius."""
    if q.radius is None:
        raise ModelFormatError("local influence requires a radius")
    ev = InfluenceEvaluator(q.model, q.weights, ball_cap=ball_cap)
    return ev.local_influence(q.S, q.sigma_S, q.radius)


def decompose_local(
    q: InfluenceQuery, ball_cap: int = DEFAULT_EXACT_BALL_CAP
) -> list[tuple[VertexSet, float]]:
    """Split a local influence into its power-graph component contributions.

    The parts partition S; the values sum to `local_influence(q)` exactly.
    """
    if q.radius is None:
        raise ModelFormatError("decomposition requires a radius")
    if not q.S:
        return []
    ev = InfluenceEvaluator(q.model, q.weights, ball_cap=ball_cap)
    parts = graph.components_in_power_graph(q.model, q.S, q.radius)
    out = []
    for T in parts:
        sigma_T = {v: q.sigma_S[v] for v in T}
        out.append((T, ev.local_influence(T, sigma_T, q.radius)))
    return out


def influence_decay_profile(
    model: IsingModel,
    weights: WeightVector,
    S,
    sigma_S: PartialAssignment,
    r_max: int,
    ball_cap: int = DEFAULT_EXACT_BALL_CAP,
) -> list[float]:
    """|global - local(r)| for r = 0..r_max; zero once balls saturate."""
    ev = InfluenceEvaluator(model, weights, ball_cap=ball_cap)
    S = as_vertex_set(S)
    g = ev.global_influence(S, sigma_S)
    return [abs(g - ev.local_influence(S, sigma_S, r)) for r in range(r_max + 1)]


def fit_geometric_decay(profile, floor: float = 1e-13) -> tuple[float, float]:
    """Least-squares fit of profile[r] ~ amplitude * ratio**r over entries > floor.

    Returns (amplitude, ratio); (0, 0) when fewer than two entries exceed
    the floor.  Only the decay shape is meaningful, no constant is asserted.
    """
    pts = [(r, math.log(g)) for r, g in enumerate(profile) if g > floor]
    if len(pts) < 2:
        return 0.0, 0.0
    xs = np.array([p[0] for p in pts], dtype=np.float64)
    ys = np.array([p[1] for p in pts], dtype=np.float64)
    slope, intercept = np.polyfit(xs, ys, 1)
    return float(np.exp(intercept)), float(np.exp(slope))


def total_influence_profile(
    model: IsingModel,
    u: int,
    pinning: PartialAssignment | None = None,
    ball_cap: int = DEFAULT_EXACT_BALL_CAP,
) -> list[float]:
    """Summed pairwise influence of u on vertices at distance >= L, for L = 1, 2, ...

    Entry L-1 is sum over free v with dist(u, v) >= L of
    |Pr(X_v = + | X_u = +) - Pr(X_v = + | X_u = -)| under the given pinning.
    The list extends to the eccentricity of u; vertices in other components
    are independent of u and contribute exactly zero.
    """
    pinning = dict(pinning) if pinning else {}
    if u in pinning:
        raise ModelFormatError(f"vertex {u} is pinned; its influence profile is undefined")
    comp = next(c for c in graph.connected_components(model) if u in set(c))
    pin_plus = {v: s for v, s in pinning.items() if v in set(comp)}
    pin_minus = dict(pin_plus)
    pin_plus[u] = +1
    pin_minus[u] = -1
    if len(comp) - len(pin_plus) > ball_cap:
        raise CapacityError(
            f"component of {len(comp)} vertices leaves {len(comp) - len(pin_plus)} "
            f"free, exceeding exact_ball_cap={ball_cap}"
        )
    if len(comp) <= DEFAULT_TABLE_CAP:
        table = JointTable(model, comp)
        means_p = table.vertex_means(pin_plus)
        means_m = table.vertex_means(pin_minus)
        mean_by_id_p = dict(zip(table.ids, means_p))
        mean_by_id_m = dict(zip(table.ids, means_m))
    else:
        mean_by_id_p = exact.vertex_expectations(
            PinnedModel.make(model, comp, pin_plus), cap=ball_cap
        )
        mean_by_id_m = exact.vertex_expectations(
            PinnedModel.make(model, comp, pin_minus), cap=ball_cap
        )
    dist = graph.bfs_distances(model, [u])
    ecc = max((dist[v] for v in comp), default=0)
    sums = [0.0] * max(ecc, 0)
    for v in comp:
        if v == u or v in pinning:
            continue
        gap = abs(mean_by_id_p[v] - mean_by_id_m[v]) / 2.0
        for L in range(1, dist[v] + 1):
            sums[L - 1] += gap
    return sums


def total_influence_sum(
    model: IsingModel,
    u: int,
    L: int,
    pinning: PartialAssignment | None = None,
    ball_cap: int = DEFAULT_EXACT_BALL_CAP,
) -> float:
    """Single entry of `total_influence_profile` at distance threshold L >= 1."""
    if L < 1:
        raise ValueError(f"distance threshold must be >= 1, got {L}")
    profile = total_influence_profile(model, u, pinning, ball_cap)
    return profile[L - 1] if L - 1 < len(profile) else 0.0

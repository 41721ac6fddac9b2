"""Recovering a vertex marginal from an influence-maximization solver.

The construction appends k isolated vertices with a common adjustable
field x to the input model and gives weight 1 to those vertices and to the
target vertex v.  Over that augmented model the best pinning is, up to the
solver's error, either all the isolated vertices (when tanh x beats the
target's marginal) or the target plus all but one of them.  Which of the
two the solver picks therefore brackets E[X_v] against tanh x, and a
binary search over t = tanh x pins the marginal down to the solver error
plus the search tolerance.

The search operates on t in (-1, 1) directly and converts to a field only
when building a gadget, clamping |t| at 1 - 1e-9 to keep arctanh finite.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import ConvergenceError, ModelFormatError
from .graph import graph_diameter
from .model import IsingModel, SolverConfig, VertexSet, WeightVector
from .solver import Solution, brute_force_infmax, solve_infmax

# A solver callable: (model, weights, budget, epsilon) -> Solution.
InfMaxSolver = Callable[[IsingModel, WeightVector, int, float], Solution]

_T_CLAMP = 1.0 - 1e-9


class Direction(Enum):
    """What an optimal-set observation implies about the target marginal."""

    GE = "marginal >= tanh(x) - epsilon"
    LE = "marginal <= tanh(x) + epsilon"


@dataclass(frozen=True)
class Gadget:
    """The augmented model and bookkeeping for one probe field x."""

    augmented: IsingModel
    weights: WeightVector
    x: float
    target: int
    U: VertexSet
    W: VertexSet


@dataclass
class MarginalSearch:
    """Result of the binary search: the estimate plus its probe trace."""

    value: float
    probes: list[tuple[float, Direction]]

    @property
    def probability(self) -> float:
        return (1.0 + self.value) / 2.0


def build_gadget(model: IsingModel, v: int, k: int, x: float) -> Gadget:
    """Append k isolated field-x vertices and set up the probe weights.

    The new vertices get ids n..n+k-1.  Weights are 1 on v and on every
    new vertex, 0 elsewhere (1-bounded by construction); isolated vertices
    have degree zero, so family membership is preserved.
    """
    if not (0 <= v < model.n):
        raise ModelFormatError(f"unknown target vertex {v}")
    if k < 1:
        raise ValueError(f"budget must be >= 1, got {k}")
    if not math.isfinite(x):
        raise ValueError(f"probe field must be finite, got {x}")
    n = model.n
    h = np.concatenate([model.h, np.full(k, float(x))])
    augmented = IsingModel(n=n + k, beta=dict(model.beta), h=h)
    a = np.zeros(n + k)
    a[v] = 1.0
    a[n:] = 1.0
    U = tuple(range(n, n + k))
    W = tuple(sorted((v,) + U[: k - 1]))
    return Gadget(
        augmented=augmented,
        weights=WeightVector(a),
        x=float(x),
        target=v,
        U=U,
        W=W,
    )


def classify_optimum(gadget: Gadget, solver_output: Solution, epsilon: float) -> Direction:
    """Turn an epsilon-optimal solution on the gadget into a marginal bound.

    If the solver chose exactly the isolated set, the target marginal is at
    least tanh(x) - epsilon; any other choice means it is at most
    tanh(x) + epsilon.
    """
    S = set(solver_output.S_hat)
    k = len(gadget.U)
    if len(S) > k:
        raise ModelFormatError(
            f"solution pins {len(S)} vertices, above the budget {k}"
        )
    if any(not (0 <= v < gadget.augmented.n) for v in S):
        raise ModelFormatError("solution names vertices outside the gadget model")
    if set(solver_output.sigma_hat.keys()) != S:
        raise ModelFormatError("solution assignment keys do not match its vertex set")
    return Direction.GE if S == set(gadget.U) else Direction.LE


def oracle_solver(model: IsingModel, weights: WeightVector, k: int, epsilon: float) -> Solution:
    """Adapter running the exhaustive reference solver (epsilon is unused)."""
    return brute_force_infmax(model, weights, k)


def make_localization_solver(
    decay_constant: float = 1.0,
    radius: int | None = None,
    exact_ball_cap: int = 25,
) -> InfMaxSolver:
    """Adapter running the localization solver on each probe gadget.

    If no radius is given, each call uses the gadget's graph diameter,
    which makes the local objective coincide with the global one.
    """

    def run(model: IsingModel, weights: WeightVector, k: int, epsilon: float) -> Solution:
        r = radius if radius is not None else graph_diameter(model)
        cfg = SolverConfig(
            k=k,
            epsilon=epsilon,
            decay_constant=decay_constant,
            radius_override=r,
            exact_ball_cap=exact_ball_cap,
        )
        return solve_infmax(model, weights, cfg, compute_global=False)

    return run


def binary_search_marginal(
    model: IsingModel,
    v: int,
    k: int,
    solver: InfMaxSolver,
    epsilon: float,
    tolerance: float,
) -> MarginalSearch:
    """Bisect t = tanh(x) until the bracket is 2*tolerance wide.

    Each probe builds the gadget at x = arctanh(t) and asks the solver;
    the classification moves one end of the bracket.  The returned value
    is the final bracket midpoint, within epsilon + tolerance of E[X_v].
    """
    if not (epsilon > 0 and tolerance > 0):
        raise ValueError("epsilon and tolerance must be positive")
    lo, hi = -1.0, 1.0
    probes: list[tuple[float, Direction]] = []
    max_iter = math.ceil(math.log2(2.0 / tolerance))
    while hi - lo > 2.0 * tolerance:
        if len(probes) >= max_iter:
            raise ConvergenceError(
                f"marginal search did not converge within {max_iter} probes",
                trace=probes,
            )
        t = (lo + hi) / 2.0
        x = math.atanh(max(-_T_CLAMP, min(_T_CLAMP, t)))
        gadget = build_gadget(model, v, k, x)
        solution = solver(gadget.augmented, gadget.weights, k, epsilon)
        direction = classify_optimum(gadget, solution, epsilon)
        probes.append((t, direction))
        if direction is Direction.GE:
            lo = t
        else:
            hi = t
    return MarginalSearch(value=(lo + hi) / 2.0, probes=probes)


def estimate_marginal(
    model: IsingModel,
    v: int,
    k: int,
    solver: InfMaxSolver,
    epsilon: float,
    tolerance: float,
) -> float:
    """Estimate E[X_v] via the gadget reduction; see `binary_search_marginal`."""
    return binary_search_marginal(model, v, k, solver, epsilon, tolerance).value


def check_probe_trace(
    probes: list[tuple[float, Direction]], epsilon: float
) -> bool:
    """Whether a probe trace is consistent with a single crossing.

    Up to the 2*epsilon ambiguity band, no GE observation may sit above an
    LE observation: every (t_ge, GE) and (t_le, LE) must satisfy
    t_ge <= t_le + 2*epsilon.
    """
    ge = [t for t, d in probes if d is Direction.GE]
    le = [t for t, d in probes if d is Direction.LE]
    if not ge or not le:
        return True
    return max(ge) <= min(le) + 2.0 * epsilon

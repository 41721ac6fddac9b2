"""Exact inference on small Ising models: log partition, marginals, expectations.

All quantities are computed by enumerating spin completions of the free
vertices, with pinned vertices held at their assigned spins inside the
enumeration (never folded into fields, so conditional and unconditional
queries share one code path).  Accumulation happens in log space behind a
max shift; nothing exponentiates an unshifted energy.

Two structural guarantees are arranged deliberately:

* computations decompose over connected components, so the log partition
  of a disconnected model is bit-for-bit the sum of its parts;
* per-configuration weights are summed in sorted order (for components up
  to 2^20 configurations), which makes scalar expectations exactly
  antisymmetric under negating all fields and pinned spins.

Above the sorted-sum limit the code streams over chunks; results are then
accurate to roundoff but carry no bitwise claims.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ModelFormatError
from .model import (
    IsingModel,
    PartialAssignment,
    VertexSet,
    check_assignment,
    induced_submodel,
)
from . import graph

DEFAULT_EXACT_BALL_CAP = 25

# Components with at most this many free vertices are enumerated in one
# pass with canonically ordered (sorted) weight sums; larger ones stream.
_SINGLE_PASS_BITS = 20
_CHUNK_BITS = 16


@dataclass(frozen=True)
class PinnedModel:
    """A model restricted to a vertex subset with some spins pinned.

    ``base`` uses local ids 0..m-1; ``ids[i]`` is the original id of local
    vertex i.  ``pinning`` and ``free`` are in original ids.  The implied
    distribution is the Gibbs measure of ``base`` conditioned on the pinned
    spins.
    """

    base: IsingModel
    ids: VertexSet
    pinning: PartialAssignment
    free: VertexSet

    @classmethod
    def make(
        cls,
        model: IsingModel,
        subset=None,
        pinning: PartialAssignment | None = None,
    ) -> "PinnedModel":
        pinning = dict(pinning) if pinning else {}
        check_assignment(pinning, model.n)
        if subset is None:
            subset = range(model.n)
        base, ids = induced_submodel(model, subset)
        members = set(ids)
        for v in pinning:
            if v not in members:
                raise ModelFormatError(f"pinned vertex {v} is outside the restricted set")
        free = tuple(v for v in ids if v not in pinning)
        return cls(base=base, ids=ids, pinning=pinning, free=free)

    def local_index(self, v: int) -> int:
        try:
            return self.ids.index(v)
        except ValueError:
            raise ModelFormatError(f"vertex {v} is not in the restricted set") from None


def log_partition(pm: PinnedModel, cap: int = DEFAULT_EXACT_BALL_CAP) -> float:
    """Log of the summed weights of all completions consistent with the pinning.

    Decomposes over connected components of the restricted graph; the cap
    applies to the free-vertex count of each component.
    """
    total = 0.0
    for comp in _components(pm):
        total += comp.log_partition(cap)
    return total


def expectation(pm: PinnedModel, v: int, cap: int = DEFAULT_EXACT_BALL_CAP) -> float:
    """Exact conditional expectation of the spin at vertex v, in [-1, 1]."""
    if v in pm.pinning:
        return float(pm.pinning[v])
    pm.local_index(v)
    for comp in _components(pm):
        if v in comp.id_set:
            return comp.expectation(v, cap)
    raise AssertionError("unreachable: vertex not covered by any component")


def marginal_plus(pm: PinnedModel, v: int, cap: int = DEFAULT_EXACT_BALL_CAP) -> float:
    """Conditional probability that the spin at v is +1."""
    return (1.0 + expectation(pm, v, cap)) / 2.0


def weighted_expectation(
    pm: PinnedModel, a: np.ndarray, cap: int = DEFAULT_EXACT_BALL_CAP
) -> float:
    """Exact conditional expectation of sum_i a[i] * X_{ids[i]}.

    ``a`` is aligned with ``pm.ids``.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (len(pm.ids),):
        raise ModelFormatError(
            f"weight slice has shape {a.shape}, expected ({len(pm.ids)},)"
        )
    total = 0.0
    for comp in _components(pm):
        total += comp.weighted_mean(a[list(comp.positions)], cap)
    return total


def vertex_expectations(
    pm: PinnedModel, cap: int = DEFAULT_EXACT_BALL_CAP
) -> dict[int, float]:
    """Conditional expectation of every vertex in the restricted set."""
    out: dict[int, float] = {}
    for comp in _components(pm):
        out.update(comp.vertex_means(cap))
    return {v: out[v] for v in pm.ids}


# ---------------------------------------------------------------------------
# Per-component enumeration
# ---------------------------------------------------------------------------


class _Component:
    """Enumeration workspace for one connected component of a PinnedModel."""

    def __init__(self, pm: PinnedModel, local_ids: tuple[int, ...]):
        self.positions = local_ids  # local indices into pm.base
        self.orig_ids = tuple(pm.ids[i] for i in local_ids)
        self.id_set = set(self.orig_ids)
        pos = {li: j for j, li in enumerate(local_ids)}
        self.m = len(local_ids)
        self.h = pm.base.h[list(local_ids)]
        eu, ev, eb = [], [], []
        members = set(local_ids)
        for (u, v), b in pm.base.beta.items():
            if u in members and v in members:
                eu.append(pos[u])
                ev.append(pos[v])
                eb.append(b)
        self.eu = np.array(eu, dtype=np.int64)
        self.ev = np.array(ev, dtype=np.int64)
        self.eb = np.array(eb, dtype=np.float64)
        self.pinned_cols: list[tuple[int, float]] = []
        free_cols: list[int] = []
        for j, orig in enumerate(self.orig_ids):
            s = pm.pinning.get(orig)
            if s is None:
                free_cols.append(j)
            else:
                self.pinned_cols.append((j, float(s)))
        self.free_cols = free_cols
        self.f = len(free_cols)

    def _check_cap(self, cap: int) -> None:
        if self.f > cap:
            raise CapacityError(
                f"component {self.orig_ids[:4]}... has {self.f} free vertices, "
                f"exceeding the exact enumeration cap of {cap}; "
                f"use Monte Carlo estimation instead"
            )

    def _spin_block(self, idx: np.ndarray) -> np.ndarray:
        """Full spin matrix (len(idx) x m) for the configuration indices idx."""
        S = np.empty((idx.shape[0], self.m), dtype=np.float64)
        for col, spin in self.pinned_cols:
            S[:, col] = spin
        for bit, col in enumerate(self.free_cols):
            S[:, col] = 1.0 - 2.0 * ((idx >> np.uint64(bit)) & np.uint64(1))
        return S

    def _energies(self, S: np.ndarray) -> np.ndarray:
        E = S @ self.h
        if self.eb.size:
            E += (S[:, self.eu] * S[:, self.ev]) @ self.eb
        return E

    def _chunks(self):
        total = 1 << self.f
        step = 1 << _CHUNK_BITS
        for start in range(0, total, step):
            idx = np.arange(start, min(start + step, total), dtype=np.uint64)
            yield idx

    def _full_energy(self) -> np.ndarray:
        total = 1 << self.f
        E = np.empty(total, dtype=np.float64)
        for idx in self._chunks():
            E[int(idx[0]): int(idx[-1]) + 1] = self._energies(self._spin_block(idx))
        return E

    def log_partition(self, cap: int) -> float:
        self._check_cap(cap)
        if self.f <= _SINGLE_PASS_BITS:
            E = self._full_energy()
            shift = float(E.max())
            return shift + float(np.log(np.sort(np.exp(E - shift)).sum()))
        shift, w_sum = -np.inf, 0.0
        for idx in self._chunks():
            E = self._energies(self._spin_block(idx))
            m = float(E.max())
            if m > shift:
                w_sum *= np.exp(shift - m)
                shift = m
            w_sum += float(np.exp(E - shift).sum())
        return shift + float(np.log(w_sum))

    def expectation(self, v: int, cap: int) -> float:
        self._check_cap(cap)
        # Locate the free bit driving vertex v (v is free: pinned vertices
        # are answered before dispatching here).
        col = self.orig_ids.index(v)
        bit = self.free_cols.index(col)
        if self.f <= _SINGLE_PASS_BITS:
            E = self._full_energy()
            shift = float(E.max())
            w = np.exp(E - shift)
            idx = np.arange(1 << self.f, dtype=np.uint64)
            plus = ((idx >> np.uint64(bit)) & np.uint64(1)) == 0
            w_plus = float(np.sort(w[plus]).sum())
            w_minus = float(np.sort(w[~plus]).sum())
            return (w_plus - w_minus) / (w_plus + w_minus)
        shift, w_plus, w_minus = -np.inf, 0.0, 0.0
        for idx in self._chunks():
            E = self._energies(self._spin_block(idx))
            m = float(E.max())
            if m > shift:
                scale = np.exp(shift - m)
                w_plus *= scale
                w_minus *= scale
                shift = m
            w = np.exp(E - shift)
            plus = ((idx >> np.uint64(bit)) & np.uint64(1)) == 0
            w_plus += float(w[plus].sum())
            w_minus += float(w[~plus].sum())
        return (w_plus - w_minus) / (w_plus + w_minus)

    def weighted_mean(self, a_local: np.ndarray, cap: int) -> float:
        self._check_cap(cap)
        shift, w_sum, aw_sum = -np.inf, 0.0, 0.0
        for idx in self._chunks():
            S = self._spin_block(idx)
            E = self._energies(S)
            A = S @ a_local
            m = float(E.max())
            if m > shift:
                scale = np.exp(shift - m)
                w_sum *= scale
                aw_sum *= scale
                shift = m
            w = np.exp(E - shift)
            w_sum += float(w.sum())
            aw_sum += float(w @ A)
        return aw_sum / w_sum

    def vertex_means(self, cap: int) -> dict[int, float]:
        self._check_cap(cap)
        shift, w_sum = -np.inf, 0.0
        sums = np.zeros(self.m)
        for idx in self._chunks():
            S = self._spin_block(idx)
            E = self._energies(S)
            m = float(E.max())
            if m > shift:
                scale = np.exp(shift - m)
                w_sum *= scale
                sums *= scale
                shift = m
            w = np.exp(E - shift)
            w_sum += float(w.sum())
            sums += w @ S
        means = sums / w_sum
        for col, spin in self.pinned_cols:
            means[col] = spin  # pinned spins are exact, not a float ratio
        return {v: float(means[j]) for j, v in enumerate(self.orig_ids)}


def _components(pm: PinnedModel) -> list[_Component]:
    comps = graph.connected_components(pm.base)
    return [_Component(pm, comp) for comp in comps]


# ---------------------------------------------------------------------------
# Joint weight tables: the ratio-form path for repeated conditional queries
# ---------------------------------------------------------------------------

DEFAULT_TABLE_CAP = 20


class JointTable:
    """Precomputed joint weights of a small vertex set, for repeated queries.

    Stores one row per configuration of the whole set; conditioning on a
    pinning selects the consistent rows.  This is an independent route to
    the same conditional quantities as the enumeration above (weights of the
    unpinned joint, then a ratio), and the two are cross-checked in tests.
    """

    def __init__(self, model: IsingModel, vertices, cap: int = DEFAULT_TABLE_CAP):
        sub, ids = induced_submodel(model, vertices)
        if sub.n > cap:
            raise CapacityError(
                f"joint table over {sub.n} vertices exceeds the table cap of {cap}"
            )
        self.ids = ids
        self._pos = {v: i for i, v in enumerate(ids)}
        m = sub.n
        idx = np.arange(1 << m, dtype=np.uint64)
        bits = (idx[:, None] >> np.arange(m, dtype=np.uint64)) & np.uint64(1)
        spins = (1.0 - 2.0 * bits).astype(np.float64)
        E = spins @ sub.h
        eu, ev, eb = sub.edge_arrays()
        if eb.size:
            E += (spins[:, eu] * spins[:, ev]) @ eb
        self.log_shift = float(E.max())
        self.w = np.exp(E - self.log_shift)
        self.spins = spins
        self._w_total = float(self.w.sum())

    def mask(self, pinning: PartialAssignment) -> np.ndarray:
        out = np.ones(self.w.shape[0], dtype=bool)
        for v, s in pinning.items():
            out &= self.spins[:, self._pos[v]] == float(s)
        return out

    def config_values(self, a: np.ndarray) -> np.ndarray:
        """Per-configuration value of sum_i a[i] * spin_i, aligned with ids."""
        return self.spins @ np.asarray(a, dtype=np.float64)

    def log_partition(self, pinning: PartialAssignment | None = None) -> float:
        if not pinning:
            return self.log_shift + float(np.log(self._w_total))
        ws = float(self.w[self.mask(pinning)].sum())
        return self.log_shift + float(np.log(ws))

    def mean_of(self, values: np.ndarray, pinning: PartialAssignment | None = None) -> float:
        if not pinning:
            return float(self.w @ values) / self._w_total
        sel = self.mask(pinning)
        ws = self.w[sel]
        return float(ws @ values[sel]) / float(ws.sum())

    def vertex_means(self, pinning: PartialAssignment | None = None) -> np.ndarray:
        if not pinning:
            return (self.w @ self.spins) / self._w_total
        sel = self.mask(pinning)
        ws = self.w[sel]
        return (ws @ self.spins[sel]) / float(ws.sum())

"""Filtrations, normal derivatives and boundary functionals."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from energy_space.graph_core import (
    GraphError,
    GraphFunction,
    WeightedGraph,
    ball,
    box,
    delta_inner,
    energy_inner,
    sort_neighbors,
    sort_vertices,
    stable_sum,
)

NONCONVERGENCE_GAP = 1e-6


@dataclass(frozen=True)
class Filtration:
    """Strictly nested finite vertex sets, each containing the base point."""

    levels: tuple[frozenset, ...]
    region: str = "all"

    def __post_init__(self):
        levels = tuple(frozenset(L) for L in self.levels)
        object.__setattr__(self, "levels", levels)
        for a, b in zip(levels, levels[1:]):
            if not (a < b):
                raise GraphError("filtration levels must be strictly nested")

    def validate(self, g: WeightedGraph) -> "Filtration":
        for L in self.levels:
            if g.base not in L:
                raise GraphError("every filtration level must contain the base point")
            for x in L:
                g._check(x)
        return self

    def __len__(self):
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)

    def __getitem__(self, i):
        return self.levels[i]

    @classmethod
    def boxes(cls, g: WeightedGraph, kmax: int, kmin: int = 1) -> "Filtration":
        """[-k, k]^d for k = kmin..kmax (chains and lattices)."""
        return cls(tuple(frozenset(box(g, k)) for k in range(kmin, kmax + 1))).validate(g)

    @classmethod
    def balls(cls, g: WeightedGraph, rmax: int) -> "Filtration":
        """Hop-distance balls around the base point; stops once nothing is added."""
        levels = []
        for r in range(0, rmax + 1):
            B = frozenset(ball(g, g.base, r))
            if levels and B == levels[-1]:
                break
            levels.append(B)
        return cls(tuple(levels)).validate(g)

    @classmethod
    def from_json(cls, text: str) -> "Filtration":
        data = json.loads(text)
        return cls(tuple(frozenset(_label(v) for v in level) for level in data))


def _label(v):
    return tuple(v) if isinstance(v, list) else v


def section_boundary(g: WeightedGraph, F: Iterable) -> list:
    """Vertices of F with at least one neighbour outside F."""
    Fs = set(F)
    return [x for x in sort_vertices(Fs) if any(y not in Fs for y in g.neighbors(x))]


def outside_neighbors(g: WeightedGraph, F: Iterable) -> list:
    Fs = set(F)
    return sort_vertices({y for x in Fs for y in g.neighbors(x) if y not in Fs})


def normal_derivative(g: WeightedGraph, psi: GraphFunction, F: Iterable, x) -> float:
    """Σ over outside neighbours y of <δ_x, δ_y>(ψ(x) - ψ(y))."""
    Fs = set(F)
    if x not in Fs:
        raise GraphError(f"vertex {x!r} not in the set")
    terms = []
    for y, _c in sort_neighbors(g, x):
        if y in Fs:
            continue
        if not psi.defined_at(y):
            raise GraphError(f"function not defined at outside neighbour {y!r}")
        terms.append(delta_inner(g, x, y) * (psi(x) - psi(y)))
    return stable_sum(terms)


def boundary_sum_identity(g: WeightedGraph, psi: GraphFunction, F: Iterable) -> tuple[float, float]:
    """(Σ_{x∈F} normal derivative, <χ_F, ψ>_E); the two agree exactly."""
    Fs = sort_vertices(set(F))
    total = stable_sum(normal_derivative(g, psi, Fs, x) for x in section_boundary(g, Fs))
    pairing = energy_inner(g, GraphFunction.indicator(Fs), psi)
    return total, pairing


def weak_null_scan(g: WeightedGraph, filtration: Filtration, tests: Sequence[GraphFunction]) -> dict:
    """Pairings <χ_{F_k}, ψ>_E per level and test function, with tail statistic."""
    rows = []
    for F in filtration:
        chi = GraphFunction.indicator(F)
        rows.append([energy_inner(g, chi, psi) for psi in tests])
    tail = rows[-max(1, len(rows) // 4):]
    max_tail = max((abs(v) for r in tail for v in r), default=0.0)
    return {"pairings": rows, "max_tail": max_tail}


def indicator_energy(g: WeightedGraph, F: Iterable) -> float:
    """||χ_F||²_E: total conductance of edges leaving F."""
    Fs = set(F)
    return math.fsum(c for x in sort_vertices(Fs) for y, c in sort_neighbors(g, x) if y not in Fs)


@dataclass
class LimitEstimate:
    values: list
    limit: float
    tail_gap: float
    convergent: bool


def boundary_point_limit(
    g: WeightedGraph, sequence: Sequence, u: GraphFunction | Callable, gap=NONCONVERGENCE_GAP
) -> LimitEstimate:
    """u(x_n) - u(o) along a vertex sequence, with a Cauchy limit estimate.

    The tail gap is the last successive difference.
    """
    f = u if callable(u) else u
    uo = f(g.base)
    values = [f(x) - uo for x in sequence]
    tail_gap = abs(values[-1] - values[-2]) if len(values) > 1 else math.inf
    return LimitEstimate(values, values[-1], tail_gap, tail_gap <= gap)

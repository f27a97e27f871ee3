"""Dipoles, bipoles, kernel Gram matrices and monopole traces on finite sections.

A dipole v_x solves Δv = δ_x - δ_o with v(o) = 0. On a finite section F two
boundary treatments are available:

``free``
    Neumann at the edge of F: the Laplacian of the induced subgraph. This is
    the default. It reproduces the exact infinite-graph dipole on the integer
    chain and agrees with the pseudo-inverse of the full Laplacian when F is
    a whole finite graph.
``dirichlet``
    Vertices outside F are held at 0 together with o; the solution extends
    by zero. Monopole traces use this mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from energy_space.boundary import Filtration, section_boundary
from energy_space.graph_core import (
    FiniteGraph,
    GeometricChain,
    GraphError,
    GraphFunction,
    Lattice,
    WeightedGraph,
    ZChain,
    box,
    combine,
    delta_inner,
    energy,
    is_connected_subset,
    laplacian_apply,
    section_matrices,
    sort_vertices,
)
from energy_space.numerics import solve_spd

MODES = ("free", "dirichlet")
CAUCHY_GAP = 1e-6


@dataclass(frozen=True)
class FiniteSection:
    vertices: tuple
    mode: str = "free"

    def __post_init__(self):
        if self.mode not in MODES:
            raise GraphError(f"unknown boundary mode {self.mode!r}")
        object.__setattr__(self, "vertices", tuple(sort_vertices(set(self.vertices))))

    @classmethod
    def whole(cls, g: FiniteGraph, mode="free") -> "FiniteSection":
        return cls(g.vertices, mode)

    @classmethod
    def box(cls, g: WeightedGraph, k: int, mode="free") -> "FiniteSection":
        return cls(tuple(box(g, k)), mode)

    @classmethod
    def around(cls, g: WeightedGraph, points: Iterable, margin: int = 2, mode="free") -> "FiniteSection":
        """Smallest box (or the whole graph) holding ``points`` with a margin."""
        if g.is_finite:
            return cls.whole(g, mode)
        pts = list(points) + [g.base]
        if isinstance(g, Lattice):
            k = max(abs(t) for p in pts for t in p)
        elif isinstance(g, (ZChain, GeometricChain)):
            k = max(abs(p) for p in pts)
        else:
            raise GraphError("cannot choose a default section for this graph")
        return cls.box(g, k + margin, mode)

    def interior(self, g: WeightedGraph) -> list:
        F = set(self.vertices)
        return [x for x in self.vertices if all(y in F for y in g.neighbors(x))]

    def boundary(self, g: WeightedGraph) -> list:
        return section_boundary(g, self.vertices)

    def check(self, g: WeightedGraph) -> "FiniteSection":
        if g.base not in self.vertices:
            raise GraphError("section must contain the base point")
        for x in self.vertices:
            g._check(x)
        if not is_connected_subset(g, self.vertices):
            raise GraphError("section is disconnected")
        return self


class _GroundedSystem:
    """Factor-free container for the grounded section matrix (row/col o removed)."""

    def __init__(self, g: WeightedGraph, section: FiniteSection):
        section.check(g)
        self.g = g
        self.section = section
        order, lap, dirac = section_matrices(g, section.vertices)
        self.order = order
        self.index = {x: i for i, x in enumerate(order)}
        self.matrix = lap if section.mode == "free" else dirac
        o = self.index[g.base]
        keep = [i for i in range(len(order)) if i != o]
        self.keep = keep
        self.reduced = self.matrix[np.ix_(keep, keep)]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve with full-length right-hand side(s); returns full-length values (0 at o)."""
        out = np.zeros(rhs.shape)
        if self.keep:
            out[self.keep] = solve_spd(self.reduced, rhs[self.keep])
        return out

    def function(self, values: np.ndarray) -> GraphFunction:
        vals = {x: float(values[i]) for i, x in enumerate(self.order)}
        return GraphFunction(vals, 0.0 if self.section.mode == "dirichlet" else None)

    def unit(self, x) -> np.ndarray:
        e = np.zeros(len(self.order))
        e[self.index[x]] = 1.0
        return e


def _system(g, section) -> _GroundedSystem:
    return _GroundedSystem(g, section)


def dipole(g: WeightedGraph, x, section: FiniteSection | None = None) -> GraphFunction:
    """v_x: <v_x, f>_E = f(x) - f(o) for f supported inside the section."""
    if x == g.base:
        raise GraphError("dipole undefined at base point")
    g._check(x)
    if section is None:
        section = FiniteSection.around(g, [x])
    if x not in section.vertices:
        raise GraphError(f"vertex {x!r} not in section")
    sys = _system(g, section)
    return sys.function(sys.solve(sys.unit(x)))


def dipoles(g: WeightedGraph, xs: Sequence, section: FiniteSection) -> dict:
    """Dipoles for several vertices sharing one factorization."""
    sys = _system(g, section)
    for x in xs:
        if x == g.base:
            raise GraphError("dipole undefined at base point")
        if x not in sys.index:
            raise GraphError(f"vertex {x!r} not in section")
    if not xs:
        return {}
    rhs = np.stack([sys.unit(x) for x in xs], axis=1)
    sol = sys.solve(rhs)
    return {x: sys.function(sol[:, j]) for j, x in enumerate(xs)}


def bipole(g: WeightedGraph, x, y, section: FiniteSection | None = None) -> GraphFunction:
    """w_{x,y} = v_x - v_y with v_o := 0."""
    if x == y:
        raise GraphError("degenerate bipole")
    if section is None:
        section = FiniteSection.around(g, [x, y])
    pts = [p for p in (x, y) if p != g.base]
    vs = dipoles(g, pts, section)
    zero = GraphFunction({v: 0.0 for v in section.vertices}, None)
    return vs.get(x, zero) - vs.get(y, zero)


def dipole_combination(g: WeightedGraph, xi: Mapping, section: FiniteSection) -> GraphFunction:
    """Σ ξ_x v_x over x ≠ o."""
    pts = [x for x in sort_vertices(xi) if x != g.base]
    vs = dipoles(g, pts, section)
    terms = [(xi[x], vs[x]) for x in pts]
    if not terms:
        return GraphFunction({v: 0.0 for v in section.vertices}, None)
    return combine(terms)


@dataclass
class KernelMatrix:
    window: list
    entries: np.ndarray

    def __getitem__(self, pair):
        x, y = pair
        return self.entries[self.window.index(x), self.window.index(y)]

    def min_eigenvalue(self) -> float:
        if not len(self.window):
            return 0.0
        return float(np.linalg.eigvalsh(self.entries).min())


def gram(g: WeightedGraph, window: Sequence, section: FiniteSection | None = None) -> KernelMatrix:
    """k(x, y) = <v_x, v_y>_E over the window."""
    window = list(window)
    if g.base in window:
        raise GraphError("window must exclude the base point")
    if section is None:
        section = FiniteSection.around(g, window)
    sys = _system(g, section)
    for x in window:
        if x not in sys.index:
            raise GraphError(f"vertex {x!r} not in section")
    if not window:
        return KernelMatrix([], np.zeros((0, 0)))
    V = sys.solve(np.stack([sys.unit(x) for x in window], axis=1))
    K = V.T @ sys.matrix @ V
    return KernelMatrix(window, (K + K.T) / 2)


@dataclass
class Reconstruction:
    coefficients: dict
    residual: float


def reconstruct_delta(g: WeightedGraph, x, section: FiniteSection | None = None) -> Reconstruction:
    """δ_x = c(x) v_x - Σ_{y~x} c(xy) v_y, with the v_o term dropped."""
    if section is None:
        section = FiniteSection.around(g, [x])
    F = set(section.vertices)
    if x not in F or any(y not in F for y in g.neighbors(x)):
        raise GraphError("section too small")
    coeffs = {}
    if x != g.base:
        coeffs[x] = delta_inner(g, x, x)
    for y in sort_vertices(g.neighbors(x)):
        if y != g.base:
            coeffs[y] = delta_inner(g, x, y)
    vs = dipoles(g, list(coeffs), section)
    fill = 0.0 if section.mode == "dirichlet" else None
    delta = GraphFunction({v: (1.0 if v == x else 0.0) for v in section.vertices}, fill)
    approx = combine([(a, vs[y]) for y, a in coeffs.items()]) if coeffs else GraphFunction({}, 0.0)
    err = energy(g, delta - approx)
    return Reconstruction(coeffs, math.sqrt(max(err, 0.0)))


def coefficient_readout(g: WeightedGraph, u: GraphFunction, section: FiniteSection | None = None) -> dict:
    """ξ_x = (Δu)(x) for x in X* where Δu is evaluable."""
    if section is not None:
        pts = [x for x in section.interior(g) if x != g.base]
    else:
        pts = [x for x in u.support() if x != g.base]
    return {x: laplacian_apply(g, u, x) for x in pts}


@dataclass
class EnergyTrace:
    levels: list  # (section size, energy)
    verdict: str


def classify_energies(energies: Sequence[float], gap=CAUCHY_GAP) -> str:
    """Verdict on a sequence of level energies.

    convergent: last successive difference below ``gap`` (relative to
    max(1, E)). divergent: over the last quarter the increments are positive
    and k·ΔE_k does not decay (ratio last/first >= 0.9), i.e. the energies
    grow at least logarithmically. Otherwise undecided.
    """
    E = list(energies)
    if abs(E[-1] - E[-2]) <= gap * max(1.0, abs(E[-1])):
        return "convergent"
    n = len(E)
    q = max(2, n // 4)
    ks = range(n - q, n)
    inc = [(k + 1) * (E[k] - E[k - 1]) for k in ks]
    if all(d > 0 for d in inc) and inc[-1] >= 0.9 * inc[0]:
        return "divergent"
    return "undecided"


def monopole_trace(g: WeightedGraph, x, filtration: Filtration) -> EnergyTrace:
    """Energies of Δw = δ_x on each level with w = 0 outside the level."""
    if len(filtration) < 4:
        raise GraphError("insufficient filtration depth")
    levels = []
    for F in filtration:
        if x not in F:
            raise GraphError(f"filtration level does not contain {x!r}")
        order, _lap, A = section_matrices(g, F)
        e = np.zeros(len(order))
        e[order.index(x)] = 1.0
        w = solve_spd(A, e)
        levels.append((len(order), float(w @ A @ w)))
    return EnergyTrace(levels, classify_energies([E for _, E in levels]))


def monopole_function(g: WeightedGraph, x, F: Iterable) -> GraphFunction:
    """The level-F solution of Δw = δ_x, extended by zero."""
    order, _lap, A = section_matrices(g, F)
    e = np.zeros(len(order))
    e[order.index(x)] = 1.0
    w = solve_spd(A, e)
    return GraphFunction({v: float(w[i]) for i, v in enumerate(order)}, 0.0)


def l2c_weight(g: WeightedGraph, x) -> float:
    """max(||δ_x||², Σ_{y≠x} |<δ_x, δ_y>|); both equal c(x) on a graph."""
    off = math.fsum(abs(delta_inner(g, x, y)) for y in sort_vertices(g.neighbors(x)))
    return max(delta_inner(g, x, x), off)


def l2c_embedding_check(g: WeightedGraph, xi: Mapping, u: GraphFunction) -> tuple[float, float]:
    """(Σ_x |ξ_x (Δu)(x)|, ||ξ||_{ℓ²(c)} ||u||_E)."""
    pts = sort_vertices(x for x, a in xi.items() if a != 0)
    lhs = math.fsum(abs(xi[x] * laplacian_apply(g, u, x)) for x in pts)
    norm_xi = math.sqrt(math.fsum(l2c_weight(g, x) * abs(xi[x]) ** 2 for x in pts))
    return lhs, norm_xi * math.sqrt(max(energy(g, u), 0.0))


__all__ = [
    "FiniteSection",
    "KernelMatrix",
    "EnergyTrace",
    "Reconstruction",
    "dipole",
    "dipoles",
    "bipole",
    "gram",
    "reconstruct_delta",
    "coefficient_readout",
    "monopole_trace",
    "l2c_embedding_check",
]

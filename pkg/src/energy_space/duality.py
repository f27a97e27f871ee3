"""Graph <-> kernel duality, Dirac Gram matrices and harmonic-defect search.

A weighted graph determines the Dirac Gram matrix <δ_x, δ_y>_E (degrees on
the diagonal, minus conductances on edges). Conversely a symmetric matrix
with non-positive off-diagonal entries, finitely many nonzeros per row and
vanishing row sums is the Dirac Gram matrix of exactly one weighted graph.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from energy_space.boundary import Filtration, section_boundary
from energy_space.dipole import FiniteSection, KernelMatrix, classify_energies, gram
from energy_space.graph_core import (
    FiniteGraph,
    GraphError,
    GraphFunction,
    WeightedGraph,
    delta_inner,
    energy,
    energy_inner,
    laplacian_apply,
    section_matrices,
    sort_vertices,
)

ROW_SUM_TOL = 1e-9
HARMONIC_TOL = 1e-9


@dataclass
class DiracGram:
    window: list
    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        n = len(self.window)
        if self.entries.shape != (n, n):
            raise GraphError(f"entries must be {n}x{n}")

    def to_json(self) -> str:
        return json.dumps({"window": list(self.window), "entries": self.entries.ravel().tolist()})

    @classmethod
    def from_json(cls, text: str) -> "DiracGram":
        data = json.loads(text)
        window = [tuple(v) if isinstance(v, list) else v for v in data["window"]]
        n = len(window)
        entries = np.asarray(data["entries"], dtype=float)
        return cls(window, entries.reshape(n, n))

    def row_sums(self) -> np.ndarray:
        return self.entries.sum(axis=1)


def dirac_gram(g: WeightedGraph, window: Sequence) -> DiracGram:
    """<δ_x, δ_y>_E over the window."""
    window = list(window)
    G = np.array([[delta_inner(g, x, y) for y in window] for x in window])
    return DiracGram(window, G)


def kernel_to_graph(G: DiracGram, base=None, rows: Iterable | None = None, tol=ROW_SUM_TOL) -> FiniteGraph:
    """Weighted graph with c(xy) = -<δ_x, δ_y> on the nonzero off-diagonal pattern.

    ``rows`` limits the vanishing-row-sum check (all rows by default); a
    section of an infinite graph only satisfies it on interior rows.
    """
    A = G.entries
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if not np.all(np.abs(A - A.T) <= 1e-12 * scale):
        raise GraphError("Dirac Gram matrix not symmetric")
    n = len(G.window)
    off = A - np.diag(np.diag(A))
    if np.any(off > tol * scale):
        raise GraphError("not graph-compatible: positive cross term")
    check = range(n) if rows is None else [G.window.index(x) for x in rows]
    sums = A.sum(axis=1)
    for i in check:
        if abs(sums[i]) > tol * scale:
            raise GraphError("row-sum identity fails: diagonal is not minus the sum of cross terms")
    edges = [
        (G.window[i], G.window[j], -A[i, j]) for i in range(n) for j in range(i + 1, n) if A[i, j] < -tol * scale
    ]
    if base is None:
        base = G.window[0]
    return FiniteGraph(edges, base, vertices=G.window, name="dual")


def dirac_gram_from_kernel(K: KernelMatrix, base) -> DiracGram:
    """Recover the Dirac Gram matrix of a finite graph from its full dipole kernel.

    On a finite graph grounded at o the kernel restricted to X* is the
    inverse of the grounded Laplacian; the o row and column follow from
    the vanishing row sums.
    """
    Ginv = np.linalg.inv(K.entries)
    Ginv = (Ginv + Ginv.T) / 2
    n = len(K.window)
    full = np.zeros((n + 1, n + 1))
    full[1:, 1:] = Ginv
    full[0, 1:] = full[1:, 0] = -Ginv.sum(axis=1)
    full[0, 0] = Ginv.sum()
    return DiracGram([base] + list(K.window), full)


def graph_to_kernel(g: WeightedGraph, window: Sequence, section: FiniteSection | None = None):
    """(K, Gδ): dipole kernel over the window and Dirac Gram over window ∪ {o}."""
    window = [x for x in window if x != g.base]
    K = gram(g, window, section)
    G = dirac_gram(g, [g.base] + window)
    return K, G


def roundtrip_check(g: WeightedGraph, section: FiniteSection) -> float:
    """Max relative error of edge weights after graph -> Gδ -> graph.

    For a whole finite graph the Dirac Gram matrix is also rebuilt from the
    dipole kernel, so the kernel direction is exercised too.
    """
    verts = list(section.vertices)
    interior = section.interior(g)
    G = dirac_gram(g, verts)
    base = g.base
    graphs = [kernel_to_graph(G, base, rows=interior)]
    if g.is_finite and set(verts) == set(g.vertices):
        K = gram(g, [x for x in verts if x != base], section)
        graphs.append(kernel_to_graph(dirac_gram_from_kernel(K, base), base, tol=1e-8))
    worst = 0.0
    for h in graphs:
        for x, y, c in g.induced_edges(verts):
            worst = max(worst, abs(h.conductance(x, y) - c) / c)
        extra = {(x, y) for x, y, _ in h.edges()} - {(x, y) for x, y, _ in g.induced_edges(verts)}
        if extra:
            worst = max(worst, math.inf)
    return worst


@dataclass
class HarmonicCandidate:
    h: GraphFunction
    max_laplacian: float
    energy: float
    energies: list = field(default_factory=list)


def _tree_potential(g, order, flux: dict) -> dict:
    """Unit-flux harmonic potential on a tree section by integrating edge currents."""
    F = set(order)
    nbrs = {x: [y for y in sort_vertices(g.neighbors(x)) if y in F] for x in order}
    root = order[0]
    parent = {root: None}
    seq = [root]
    for x in seq:
        for y in nbrs[x]:
            if y not in parent:
                parent[y] = x
                seq.append(y)
    # subtree outflow = current from parent to child
    out = {x: flux.get(x, 0.0) for x in order}
    for x in reversed(seq[1:]):
        out[parent[x]] += out[x]
    pot = {root: 0.0}
    for x in seq[1:]:
        p = parent[x]
        # current p -> x equals flux leaving the subtree at x
        pot[x] = pot[p] + out[x] / g.conductance(p, x)
    return pot


def _level_candidate(g: WeightedGraph, F) -> tuple[dict, float] | None:
    """Leading unit-through-flow harmonic function on one level, or None."""
    order, lap, _ = section_matrices(g, F)
    bd = set(section_boundary(g, order))
    if len(bd) < 2:
        return None
    b_idx = [i for i, x in enumerate(order) if x in bd]
    i_idx = [i for i, x in enumerate(order) if x not in bd]
    Lbb = lap[np.ix_(b_idx, b_idx)]
    if i_idx:
        Lbi = lap[np.ix_(b_idx, i_idx)]
        Lii = lap[np.ix_(i_idx, i_idx)]
        dtn = Lbb - Lbi @ np.linalg.solve(Lii, Lbi.T)
    else:
        dtn = Lbb
    dtn = (dtn + dtn.T) / 2
    m = len(b_idx)
    if m == 2:
        flux_b = np.array([-1.0, 1.0])
    else:
        w, V = np.linalg.eigh(dtn)
        flux_b = V[:, 1]  # eigenvector of the smallest nonzero eigenvalue
        k = int(np.argmax(np.abs(flux_b) > 1e-12))
        if flux_b[k] > 0:
            flux_b = -flux_b
        flux_b = flux_b / flux_b[flux_b > 0].sum()
    bverts = [order[i] for i in b_idx]
    flux = dict(zip(bverts, flux_b))
    if len(g.induced_edges(order)) == len(order) - 1:
        pot = _tree_potential(g, order, flux)
    else:
        phi_b = np.linalg.lstsq(dtn, flux_b, rcond=None)[0]
        full = np.zeros(len(order))
        full[b_idx] = phi_b
        if i_idx:
            full[i_idx] = -np.linalg.solve(Lii, Lbi.T @ phi_b)
        pot = {x: float(full[i]) for i, x in enumerate(order)}
    ob = pot[g.base]
    h = GraphFunction({x: pot[x] - ob for x in order}, None)
    return {"h": h, "energy": energy(g, h), "interior": [order[i] for i in i_idx]}, energy(g, h)


def harmonic_defect(g: WeightedGraph, filtration: Filtration, core: Iterable | None = None) -> list[HarmonicCandidate]:
    """Finite-energy nonconstant harmonic candidates detected along a filtration.

    Per level, the boundary Dirichlet-to-Neumann matrix is formed and the
    flux pattern with the largest energy per unit flux norm is extended
    harmonically, normalized to unit through-flow. The candidate is kept when
    its energies are Cauchy, nondecreasing over the last quarter, and its
    energy on the first level does not vanish.
    """
    if len(filtration) < 4:
        raise GraphError("insufficient filtration depth")
    core = set(filtration[0] if core is None else core)
    results = []
    for F in filtration:
        res = _level_candidate(g, F)
        if res is None:
            return []
        results.append(res[0])
    energies = [r["energy"] for r in results]
    verdict = classify_energies(energies)
    q = max(2, len(energies) // 4)
    tail = energies[-q:]
    monotone = all(b >= a - 1e-12 * max(1.0, abs(b)) for a, b in zip(tail, tail[1:]))
    last = results[-1]
    h = last["h"]
    core_h = GraphFunction({x: h(x) for x in core}, None)
    core_energy = energy(g, core_h)
    if verdict != "convergent" or not monotone or core_energy < 1e-3 * last["energy"]:
        return []
    lap = max((abs(laplacian_apply(g, h, x)) for x in last["interior"]), default=0.0)
    if lap > HARMONIC_TOL:
        return []
    return [HarmonicCandidate(h, lap, last["energy"], energies)]


def duality_pair_check(g: WeightedGraph, h: HarmonicCandidate | GraphFunction, section: FiniteSection) -> float:
    """max over interior x of |<δ_x, h>_E|."""
    fn = h.h if isinstance(h, HarmonicCandidate) else h
    pts = [x for x in section.interior(g)]
    return max((abs(energy_inner(g, GraphFunction.delta(x), fn)) for x in pts), default=0.0)

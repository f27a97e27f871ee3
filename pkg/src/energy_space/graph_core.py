"""Weighted graphs, vertex functions and the energy form.

A graph is either finite (explicit edge list) or generator-backed (the integer
chain, the lattice Z^d, the geometric chain). Generator-backed graphs expose
neighbourhoods lazily; every numerical operation acts on an explicitly
requested finite set of vertices.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Hashable, Iterable, Mapping

import numpy as np

VertexId = Hashable


class GraphError(ValueError):
    """Invalid graph, vertex or function input."""


def vertex_key(x: VertexId):
    """Total order over mixed int/str/tuple labels."""
    if isinstance(x, bool):
        return (0, int(x))
    if isinstance(x, int):
        return (0, x)
    if isinstance(x, tuple):
        return (1, tuple(vertex_key(t) for t in x))
    return (2, str(x))


def sort_vertices(xs: Iterable[VertexId]) -> list:
    return sorted(xs, key=vertex_key)


def _edge_key(x, y):
    return (x, y) if vertex_key(x) <= vertex_key(y) else (y, x)


def stable_sum(terms: Iterable) -> float | complex:
    """Compensated sum; complex terms are summed per component."""
    terms = list(terms)
    if any(isinstance(t, complex) for t in terms):
        re = math.fsum(t.real for t in terms)
        im = math.fsum(t.imag for t in terms)
        return complex(re, im)
    return math.fsum(terms)


class WeightedGraph:
    """Connected graph with symmetric positive conductances and a base point.

    Subclasses implement :meth:`neighbors` and :meth:`has_vertex`.
    """

    base: VertexId
    name: str = "graph"

    def neighbors(self, x: VertexId) -> Mapping[VertexId, float]:
        raise NotImplementedError

    def has_vertex(self, x: VertexId) -> bool:
        raise NotImplementedError

    @property
    def is_finite(self) -> bool:
        return False

    @property
    def vertices(self) -> tuple | None:
        """Sorted vertex tuple for finite graphs, ``None`` otherwise."""
        return None

    def _check(self, x):
        if not self.has_vertex(x):
            raise GraphError(f"vertex not in graph: {x!r}")

    def conductance(self, x, y) -> float:
        """c(xy), or 0.0 when x and y are not adjacent."""
        self._check(x)
        return self.neighbors(x).get(y, 0.0)

    def induced_edges(self, verts: Iterable[VertexId]) -> list[tuple]:
        """Edges (x, y, c) with both endpoints in ``verts``, sorted."""
        vs = set(verts)
        out = []
        for x in sort_vertices(vs):
            for y, c in self.neighbors(x).items():
                if y in vs and vertex_key(x) < vertex_key(y):
                    out.append((x, y, c))
        return out


class FiniteGraph(WeightedGraph):
    """Finite connected weighted graph built from an edge list."""

    def __init__(self, edges: Iterable[tuple], base: VertexId, *, vertices=None, name="graph"):
        adj: dict = {}
        for v in vertices or ():
            adj.setdefault(v, {})
        for x, y, c in edges:
            c = float(c)
            if x == y:
                raise GraphError(f"self-loop at {x!r}")
            if not (c > 0.0) or not math.isfinite(c):
                raise GraphError(f"edge weight must be finite and positive: ({x!r},{y!r}) -> {c}")
            if y in adj.get(x, {}):
                if adj[x][y] != c:
                    raise GraphError(f"conflicting weights for edge ({x!r},{y!r})")
                continue
            adj.setdefault(x, {})[y] = c
            adj.setdefault(y, {})[x] = c
        if base not in adj:
            raise GraphError(f"base point not in graph: {base!r}")
        self._adj = MappingProxyType({x: MappingProxyType(nb) for x, nb in adj.items()})
        self._vertices = tuple(sort_vertices(adj))
        self.base = base
        self.name = name
        if not _connected(self._adj, base):
            raise GraphError("graph is not connected")

    def neighbors(self, x):
        self._check(x)
        return self._adj[x]

    def has_vertex(self, x):
        try:
            return x in self._adj
        except TypeError:
            return False

    @property
    def is_finite(self):
        return True

    @property
    def vertices(self):
        return self._vertices

    def edges(self) -> list[tuple]:
        return self.induced_edges(self._vertices)

    def with_base(self, base) -> "FiniteGraph":
        return FiniteGraph(self.edges(), base, vertices=self._vertices, name=self.name)


def _connected(adj, start) -> bool:
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return len(seen) == len(adj)


class ZChain(WeightedGraph):
    """The integers with unit nearest-neighbour conductance."""

    def __init__(self, base: int = 0):
        self.base = base
        self.name = "zchain"

    def has_vertex(self, x):
        return isinstance(x, int) and not isinstance(x, bool)

    def neighbors(self, x):
        self._check(x)
        return {x - 1: 1.0, x + 1: 1.0}


class GeometricChain(WeightedGraph):
    """The integers with c(n, n+1) = ratio**|n|."""

    def __init__(self, ratio: float = 2.0, base: int = 0):
        if not ratio > 0:
            raise GraphError("ratio must be positive")
        self.ratio = float(ratio)
        self.base = base
        self.name = f"geom:{ratio:g}"

    def has_vertex(self, x):
        return isinstance(x, int) and not isinstance(x, bool)

    def edge_weight(self, n: int) -> float:
        """Weight of the edge (n, n+1)."""
        return self.ratio ** abs(n)

    def neighbors(self, x):
        self._check(x)
        return {x - 1: self.edge_weight(x - 1), x + 1: self.edge_weight(x)}


class Lattice(WeightedGraph):
    """Z^d with unit nearest-neighbour conductance; vertices are d-tuples."""

    def __init__(self, d: int, base=None):
        if d < 1:
            raise GraphError("dimension must be >= 1")
        self.d = d
        self.base = base if base is not None else (0,) * d
        self.name = f"zd:{d}"

    def has_vertex(self, x):
        return (
            isinstance(x, tuple)
            and len(x) == self.d
            and all(isinstance(t, int) and not isinstance(t, bool) for t in x)
        )

    def neighbors(self, x):
        self._check(x)
        out = {}
        for i in range(self.d):
            for s in (-1, 1):
                y = list(x)
                y[i] += s
                out[tuple(y)] = 1.0
        return out


def star_graph(weights: Iterable[float], name="star") -> FiniteGraph:
    """Star with center 0 (the base point) and spokes 1..k."""
    edges = [(0, i + 1, w) for i, w in enumerate(weights)]
    return FiniteGraph(edges, 0, name=name)


def complete_graph(k: int, weight: float = 1.0) -> FiniteGraph:
    edges = [(i, j, weight) for i in range(k) for j in range(i + 1, k)]
    return FiniteGraph(edges, 0, name=f"complete:{k}")


def path_graph(n: int, weight: float = 1.0, base: int = 0) -> FiniteGraph:
    return FiniteGraph([(i, i + 1, weight) for i in range(n - 1)], base, name=f"path:{n}")


def random_connected_graph(rng: random.Random, n: int, wmin=0.1, wmax=10.0, extra=None) -> FiniteGraph:
    """Random spanning tree plus ``extra`` random chords, base point 0."""
    if n < 2:
        raise GraphError("need at least two vertices")
    edges = {}
    for v in range(1, n):
        u = rng.randrange(v)
        edges[(u, v)] = rng.uniform(wmin, wmax)
    if extra is None:
        extra = rng.randint(0, n)
    for _ in range(extra):
        a, b = rng.sample(range(n), 2)
        edges.setdefault((min(a, b), max(a, b)), rng.uniform(wmin, wmax))
    return FiniteGraph([(a, b, c) for (a, b), c in edges.items()], 0, name=f"random:{n}")


def make_graph(spec: str, base=None) -> WeightedGraph:
    """Build a generator graph from ``zchain``, ``zd:D``, ``geom:R``, ``star:K`` or ``complete:K``."""
    kind, _, arg = spec.partition(":")
    if kind == "zchain":
        return ZChain(0 if base is None else base)
    if kind == "zd":
        d = int(arg)
        if d == 1:
            return ZChain(0 if base is None else base)
        return Lattice(d, base)
    if kind == "geom":
        return GeometricChain(float(arg) if arg else 2.0, 0 if base is None else base)
    if kind == "star":
        g = star_graph([1.0] * int(arg), name=spec)
    elif kind == "complete":
        g = complete_graph(int(arg))
    else:
        raise GraphError(f"unknown graph generator: {spec!r}")
    return g if base is None else g.with_base(base)


@dataclass(frozen=True)
class GraphFunction:
    """Vertex function: explicit ``values`` and a ``fill`` for all other vertices.

    ``fill=0.0`` gives a finitely supported function; ``fill=None`` means the
    function is defined only on the listed vertices (a section function).
    ``evaluator`` backs functions defined everywhere without finite support.
    """

    values: Mapping = field(default_factory=dict)
    fill: float | complex | None = 0.0
    evaluator: Callable | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))

    @classmethod
    def from_callable(cls, fn: Callable) -> "GraphFunction":
        return cls({}, None, fn)

    @classmethod
    def delta(cls, x) -> "GraphFunction":
        return cls({x: 1.0})

    @classmethod
    def indicator(cls, verts: Iterable) -> "GraphFunction":
        return cls({x: 1.0 for x in verts})

    @classmethod
    def constant(cls, c: float) -> "GraphFunction":
        return cls({}, c)

    @property
    def finite(self) -> bool:
        return self.evaluator is None

    def defined_at(self, x) -> bool:
        return self.evaluator is not None or x in self.values or self.fill is not None

    def __call__(self, x):
        if x in self.values:
            return self.values[x]
        if self.evaluator is not None:
            return self.evaluator(x)
        if self.fill is None:
            raise GraphError(f"function not defined at {x!r}")
        return self.fill

    def support(self) -> list:
        return sort_vertices(self.values)

    def canonical(self, base) -> "GraphFunction":
        """Representative modulo constants with value 0 at ``base``."""
        s = self(base)
        if self.evaluator is not None:
            fn = self.evaluator
            return GraphFunction({x: v - s for x, v in self.values.items()}, None, lambda x: fn(x) - s)
        fill = None if self.fill is None else self.fill - s
        return GraphFunction({x: v - s for x, v in self.values.items()}, fill)

    def equivalent(self, other: "GraphFunction", base, tol=0.0) -> bool:
        """Equality modulo constants, compared on the union of listed vertices."""
        a, b = self.canonical(base), other.canonical(base)
        keys = set(a.values) | set(b.values)
        if a.fill is not None and b.fill is not None and abs(a.fill - b.fill) > tol:
            return False
        return all(abs(a(x) - b(x)) <= tol for x in keys)

    def __add__(self, other: "GraphFunction") -> "GraphFunction":
        return combine([(1.0, self), (1.0, other)])

    def __sub__(self, other: "GraphFunction") -> "GraphFunction":
        return combine([(1.0, self), (-1.0, other)])

    def __rmul__(self, a) -> "GraphFunction":
        return combine([(a, self)])


def combine(terms: list[tuple]) -> GraphFunction:
    """Linear combination sum(a_i * f_i) of finite-backed functions."""
    for _, f in terms:
        if f.evaluator is not None:
            raise GraphError("cannot combine callable-backed functions")
    keys = set()
    fill = 0.0
    for a, f in terms:
        keys |= set(f.values)
        fill = None if (fill is None or f.fill is None) else fill + a * f.fill
    vals = {}
    for x in sort_vertices(keys):
        if all(f.defined_at(x) for _, f in terms):
            vals[x] = sum(a * f(x) for a, f in terms)
    return GraphFunction(vals, fill)


def degree(g: WeightedGraph, x) -> float:
    """c(x): the sum of incident conductances."""
    g._check(x)
    return math.fsum(g.neighbors(x).values())


def laplacian_apply(g: WeightedGraph, u: GraphFunction, x) -> float | complex:
    """(Δu)(x) = Σ_y c(xy)(u(x) - u(y))."""
    g._check(x)
    try:
        ux = u(x)
        terms = [c * (ux - u(y)) for y, c in sort_neighbors(g, x)]
    except GraphError as exc:
        raise GraphError(f"function not defined on neighborhood of {x!r}") from exc
    return stable_sum(terms)


def sort_neighbors(g: WeightedGraph, x) -> list[tuple]:
    nb = g.neighbors(x)
    return [(y, nb[y]) for y in sort_vertices(nb)]


def laplacian(g: WeightedGraph, u: GraphFunction, verts: Iterable) -> GraphFunction:
    """Δu restricted to ``verts`` as a finitely supported function."""
    return GraphFunction({x: laplacian_apply(g, u, x) for x in sort_vertices(verts)})


def _conj(z):
    return z.conjugate() if isinstance(z, complex) else z


def energy_inner(g: WeightedGraph, u: GraphFunction, v: GraphFunction) -> float | complex:
    """½ ΣΣ c(xy) conj(u(x)-u(y)) (v(x)-v(y)).

    Edges where either function is undefined are skipped, so section
    functions get their section energy. Only edges touching a listed vertex
    can contribute; outside the listed vertices both functions are constant.
    """
    if not (u.finite and v.finite):
        raise GraphError("support not finite")
    active = sort_vertices(set(u.values) | set(v.values))
    seen = set()
    terms = []
    for x in active:
        for y, c in sort_neighbors(g, x):
            e = _edge_key(x, y)
            if e in seen:
                continue
            seen.add(e)
            if not (u.defined_at(x) and u.defined_at(y) and v.defined_at(x) and v.defined_at(y)):
                continue
            dv = v(x) - v(y)
            if dv == 0:
                continue
            terms.append(c * _conj(u(x) - u(y)) * dv)
    return stable_sum(terms)


def energy(g: WeightedGraph, u: GraphFunction) -> float:
    e = energy_inner(g, u, u)
    return float(e.real) if isinstance(e, complex) else e


def delta_inner(g: WeightedGraph, x, y) -> float:
    """<δ_x, δ_y>_E: c(x) on the diagonal, -c(xy) for neighbours, else 0."""
    g._check(x)
    g._check(y)
    if x == y:
        return degree(g, x)
    c = g.neighbors(x).get(y)
    return -c if c is not None else 0.0


def quadratic_identity_check(g: WeightedGraph, xi: Mapping, section=None) -> tuple[float, float]:
    """Return (<u, Δu>_E, Σ|ξ|² + |Σξ|²) for u = Σ ξ_x v_x."""
    from energy_space.dipole import FiniteSection, dipole_combination

    rhs = math.fsum(abs(a) ** 2 for a in xi.values()) + abs(sum(xi.values())) ** 2
    if not any(xi.values()):
        return 0.0, rhs
    if section is None:
        section = FiniteSection.around(g, list(xi))
    u = dipole_combination(g, xi, section)
    lap = laplacian(g, u, section.interior(g))
    lhs = energy_inner(g, u, lap)
    return float(lhs.real) if isinstance(lhs, complex) else lhs, rhs


def section_matrices(g: WeightedGraph, verts: Iterable) -> tuple[list, np.ndarray, np.ndarray]:
    """Ordered vertices, free (induced-subgraph) Laplacian and Dirac Gram matrix.

    The Dirac Gram matrix uses full degrees, so it equals the free Laplacian
    plus the diagonal of conductance leaving the set.
    """
    order = sort_vertices(verts)
    idx = {x: i for i, x in enumerate(order)}
    n = len(order)
    lap = np.zeros((n, n))
    dirac = np.zeros((n, n))
    for x in order:
        i = idx[x]
        for y, c in sort_neighbors(g, x):
            dirac[i, i] += c
            j = idx.get(y)
            if j is not None:
                lap[i, i] += c
                lap[i, j] -= c
                dirac[i, j] -= c
    return order, lap, dirac


def is_connected_subset(g: WeightedGraph, verts: Iterable) -> bool:
    vs = set(verts)
    if not vs:
        return False
    start = next(iter(vs))
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in g.neighbors(x):
            if y in vs and y not in seen:
                seen.add(y)
                queue.append(y)
    return len(seen) == len(vs)


def box(g: WeightedGraph, k: int) -> list:
    """Vertices of [-k, k]^d for chains and lattices."""
    if isinstance(g, Lattice):
        grids = np.stack(np.meshgrid(*[np.arange(-k, k + 1)] * g.d, indexing="ij"), -1).reshape(-1, g.d)
        return sort_vertices(tuple(int(t) for t in row) for row in grids)
    if isinstance(g, (ZChain, GeometricChain)):
        return list(range(-k, k + 1))
    raise GraphError(f"box sections need a chain or lattice, got {g.name}")


def ball(g: WeightedGraph, center, radius: int) -> list:
    """Graph-distance ball (hop count)."""
    seen = {center: 0}
    queue = deque([center])
    while queue:
        x = queue.popleft()
        if seen[x] == radius:
            continue
        for y in g.neighbors(x):
            if y not in seen:
                seen[y] = seen[x] + 1
                queue.append(y)
    return sort_vertices(seen)


def read_edge_list(text: str, base) -> FiniteGraph:
    """Parse ``<label> <label> <weight>`` lines; ``#`` starts a comment."""
    import shlex

    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = shlex.split(raw, comments=True)
        if not parts:
            continue
        if len(parts) != 3:
            raise GraphError(f"line {lineno}: expected '<label> <label> <weight>'")
        a, b, w = parts
        quoted = _quoted_labels(raw)
        edges.append((parse_label(a, a in quoted), parse_label(b, b in quoted), float(w)))
    return FiniteGraph(edges, parse_label(str(base)) if isinstance(base, str) else base, name="file")


def _quoted_labels(raw: str) -> set:
    import re

    return {m.group(2) for m in re.finditer(r"([\"'])(.*?)\1", raw)}


def parse_label(tok: str, quoted: bool = False):
    if quoted:
        return tok
    try:
        return int(tok)
    except ValueError:
        return tok

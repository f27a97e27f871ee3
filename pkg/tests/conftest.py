import random

import pytest

from energy_space.graph_core import (
    FiniteGraph,
    GeometricChain,
    Lattice,
    ZChain,
    complete_graph,
    random_connected_graph,
    star_graph,
)


@pytest.fixture
def zchain():
    return ZChain()


@pytest.fixture
def geom():
    return GeometricChain(2.0)


@pytest.fixture
def z2():
    return Lattice(2)


@pytest.fixture
def k3():
    return complete_graph(3)


@pytest.fixture
def star123():
    return star_graph([1.0, 2.0, 3.0])


@pytest.fixture
def rng():
    return random.Random(20261019)


def random_graphs(seed, count, nmax=40, nmin=2):
    r = random.Random(seed)
    return [random_connected_graph(r, r.randint(nmin, nmax)) for _ in range(count)]


def single_edge(w):
    return FiniteGraph([(0, 1, w)], 0)

import itertools

import numpy as np
import pytest

from nbdist import Graph, ModelSpec, generate, parse_edge_list


@pytest.fixture
def k3():
    return parse_edge_list("0 1\n1 2\n2 0")


@pytest.fixture
def c4():
    return parse_edge_list("0 1\n1 2\n2 3\n3 0")


@pytest.fixture
def k4():
    return Graph(itertools.combinations(range(4), 2))


@pytest.fixture
def path3():
    return parse_edge_list("0 1\n1 2")


@pytest.fixture
def star4():
    return parse_edge_list("0 1\n0 2\n0 3")


def complete_graph(n: int) -> Graph:
    return Graph(itertools.combinations(range(n), 2))


def cycle_graph(n: int) -> Graph:
    return Graph((i, (i + 1) % n) for i in range(n))


def random_graph(seed: int, n_max: int = 500, n_min: int = 20) -> Graph:
    """Mixed-model random graph for property suites."""
    rng = np.random.default_rng(seed)
    model = ["er", "ba", "ws", "cm"][seed % 4]
    n = int(rng.integers(n_min, n_max + 1))
    k = float(rng.uniform(2.5, 8.0))
    gamma = 2.5 if model == "cm" else None
    return generate(ModelSpec(model, n, k, gamma=gamma, seed=seed))


def attach_pendant_trees(g: Graph, seed: int, count: int = 8) -> Graph:
    """Attach random pendant paths/trees outside the 2-core."""
    rng = np.random.default_rng(seed)
    edges = list(g.edges())
    nodes = list(g.node_ids)
    nxt = max(nodes) + 1
    for _ in range(count):
        anchor = nodes[rng.integers(len(nodes))]
        depth = int(rng.integers(1, 4))
        prev = anchor
        for _ in range(depth):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
    return Graph(edges)


def brute_force_triangles(g: Graph) -> int:
    count = 0
    for u, v in g.edges():
        count += len(set(g.neighbors(u)) & set(g.neighbors(v)))
    return count // 3

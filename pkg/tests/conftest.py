import numpy as np
import pytest

from ncnc import Graph

G1_EDGES = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (3, 4)]


@pytest.fixture
def g1():
    return Graph.from_edge_list(G1_EDGES, 5)


def dense_adjacency(edges, n):
    a = np.zeros((n, n))
    for u, v in edges:
        if u != v:
            a[u, v] = a[v, u] = 1.0
    return a


def random_graph(rng, n, p):
    a = np.triu(rng.random((n, n)) < p, k=1)
    return np.argwhere(a)

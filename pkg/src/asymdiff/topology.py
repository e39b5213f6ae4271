"""
Random agent networks and the uniform combination rule.

Two generators are provided: an Erdos-Renyi style graph where every pair of
agents is linked independently with a fixed probability, and a random
geometric graph on the unit square where agents within a radius are linked.
Both redraw until the graph is connected.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

from .streams import as_generator

DEFAULT_MAX_RETRIES = 1000


class ConnectivityError(RuntimeError):
    """Raised when no connected graph was drawn within the retry budget."""


@dataclass(frozen=True, eq=False)
class NetworkTopology:
    """Undirected agent graph with explicit self-loops.

    Attributes
    ----------
    adjacency : ndarray of bool, shape (N, N)
        Symmetric; the diagonal is True because a node belongs to its own
        neighborhood.
    coordinates : ndarray, shape (N, 2), optional
        Node positions in the unit square (radius graphs only).
    """

    adjacency: np.ndarray
    coordinates: Optional[np.ndarray] = None

    def __post_init__(self):
        adj = np.array(self.adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if not adj.diagonal().all():
            raise ValueError("adjacency diagonal must be True (self-loops)")
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)
        if self.coordinates is not None:
            xy = np.array(self.coordinates, dtype=float)
            if xy.shape != (adj.shape[0], 2):
                raise ValueError("coordinates must have shape (N, 2)")
            xy.setflags(write=False)
            object.__setattr__(self, "coordinates", xy)

    @property
    def node_count(self) -> int:
        return self.adjacency.shape[0]

    def neighbors(self, n: int) -> np.ndarray:
        """Indices of N_n, including ``n`` itself."""
        return np.flatnonzero(self.adjacency[n])

    def degrees(self) -> np.ndarray:
        """Neighborhood sizes |N_n| (self included)."""
        return self.adjacency.sum(axis=1)

    def edges(self):
        """Undirected edges ``(l, n)`` with ``l < n``; self-loops omitted."""
        rows, cols = np.nonzero(np.triu(self.adjacency, k=1))
        return list(zip(rows.tolist(), cols.tolist()))

    def is_connected(self) -> bool:
        return is_connected(self.adjacency)

    def __eq__(self, other):
        if not isinstance(other, NetworkTopology):
            return NotImplemented
        if not np.array_equal(self.adjacency, other.adjacency):
            return False
        if (self.coordinates is None) != (other.coordinates is None):
            return False
        return self.coordinates is None or np.array_equal(self.coordinates, other.coordinates)


def is_connected(adjacency) -> bool:
    n_components, _ = connected_components(np.asarray(adjacency, dtype=bool), directed=False)
    return n_components == 1


def build_probability_graph(node_count, edge_probability, seed, max_retries=DEFAULT_MAX_RETRIES):
    """Link each pair independently with ``edge_probability``.

    Each attempt draws ``N(N-1)/2`` uniforms from the generator, one per pair
    ``(l, n)`` with ``l < n`` in row-major order, and links the pair when the
    uniform is below the probability. Attempts repeat until connected.
    """
    if node_count < 2:
        raise ValueError("node_count must be at least 2")
    if not 0.0 <= edge_probability <= 1.0:
        raise ValueError("edge_probability must lie in [0, 1]")
    rng = as_generator(seed)
    rows, cols = np.triu_indices(node_count, k=1)
    for _ in range(max_retries):
        link = rng.random(rows.size) < edge_probability
        adj = np.eye(node_count, dtype=bool)
        adj[rows[link], cols[link]] = True
        adj[cols[link], rows[link]] = True
        if is_connected(adj):
            return NetworkTopology(adj)
    raise ConnectivityError(
        f"no connected graph with N={node_count}, p={edge_probability} after {max_retries} draws"
    )


def build_radius_graph(node_count, radius, seed, max_retries=DEFAULT_MAX_RETRIES):
    """Place nodes uniformly in the unit square and link pairs within ``radius``."""
    if node_count < 2:
        raise ValueError("node_count must be at least 2")
    if not radius > 0:
        raise ValueError("radius must be positive")
    rng = as_generator(seed)
    for _ in range(max_retries):
        xy = rng.random((node_count, 2))
        dist = np.sqrt(((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=-1))
        adj = dist <= radius
        np.fill_diagonal(adj, True)
        if is_connected(adj):
            return NetworkTopology(adj, coordinates=xy)
    raise ConnectivityError(
        f"no connected graph with N={node_count}, radius={radius} after {max_retries} draws"
    )


def uniform_combination(topology: NetworkTopology) -> np.ndarray:
    """Combination matrix with ``c[l, n] = 1/|N_n|`` for ``l`` in ``N_n``.

    Column ``n`` holds the weights node ``n`` applies to its neighbors, so
    every column sums to one.
    """
    adj = topology.adjacency
    return adj / adj.sum(axis=0, keepdims=True)


def write_edge_list(topology: NetworkTopology, stream):
    """Write ``N <count>``, then ``l n`` per edge, then ``coord n x y`` lines."""
    stream.write(f"N {topology.node_count}\n")
    for l, n in topology.edges():
        stream.write(f"{l} {n}\n")
    if topology.coordinates is not None:
        for n, (x, y) in enumerate(topology.coordinates):
            stream.write(f"coord {n} {float(x)!r} {float(y)!r}\n")


def read_edge_list(stream) -> NetworkTopology:
    node_count = None
    pairs = []
    coords = {}
    for lineno, raw in enumerate(stream, start=1):
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "N":
            node_count = int(parts[1])
        elif parts[0] == "coord":
            coords[int(parts[1])] = (float(parts[2]), float(parts[3]))
        elif len(parts) == 2:
            pairs.append((int(parts[0]), int(parts[1])))
        else:
            raise ValueError(f"line {lineno}: cannot parse {raw.strip()!r}")
    if node_count is None:
        raise ValueError("missing 'N <count>' header")
    adj = np.eye(node_count, dtype=bool)
    for l, n in pairs:
        adj[l, n] = adj[n, l] = True
    xy = None
    if coords:
        xy = np.array([coords[n] for n in range(node_count)])
    return NetworkTopology(adj, coordinates=xy)

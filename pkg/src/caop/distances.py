"""Shortest deadhead distances between vertices, with path reconstruction.

Rows are computed lazily per source vertex and cached; the full matrix is
materialized on demand for the vectorized solvers.  Instances stay well under
a few thousand vertices (the spec caps out near city-network scale), so dense
per-row storage is fine.
"""

from __future__ import annotations

import threading

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .instance import Instance


class DistanceTable:
    """Minimum total deadhead cost between any two vertices.

    Self-loops never participate in paths.  Deadhead-only edges do.  The
    table is safe to share between concurrent solver runs; cache population
    is guarded by a lock.
    """

    def __init__(self, inst: Instance):
        self._n = inst.n_vertices
        n = self._n
        adj = np.full((n, n), np.inf)
        ea = inst.arrays
        non_loop = ea.tails != ea.heads
        t, h, w = ea.tails[non_loop], ea.heads[non_loop], ea.deadhead_cost[non_loop]
        np.minimum.at(adj, (t, h), w)
        np.minimum.at(adj, (h, t), w)
        rows, cols = np.nonzero(np.isfinite(adj))
        # csr with explicit zero entries keeps zero-cost edges as real edges
        self._graph = csr_matrix((adj[rows, cols], (rows, cols)), shape=(n, n))
        self._rows: dict[int, np.ndarray] = {}
        self._preds: dict[int, np.ndarray] = {}
        self._matrix: np.ndarray | None = None
        self._lock = threading.Lock()

    def _row(self, u: int) -> np.ndarray:
        row = self._rows.get(u)
        if row is None:
            d, p = dijkstra(self._graph, directed=True, indices=u, return_predecessors=True)
            with self._lock:
                self._rows[u] = d
                self._preds[u] = p
            row = d
        return row

    def dist(self, u: int, v: int) -> float:
        return float(self._row(u)[v])

    def path(self, u: int, v: int) -> list[int]:
        """Vertex sequence of a shortest deadhead walk from u to v (inclusive)."""
        self._row(u)
        preds = self._preds[u]
        if u == v:
            return [u]
        out = [v]
        cur = v
        while cur != u:
            cur = int(preds[cur])
            out.append(cur)
        out.reverse()
        return out

    def matrix(self) -> np.ndarray:
        """Full all-pairs distance matrix (computed once, cached)."""
        if self._matrix is None:
            d, p = dijkstra(self._graph, directed=True, return_predecessors=True)
            with self._lock:
                if self._matrix is None:
                    self._matrix = d
                    for u in range(self._n):
                        self._rows.setdefault(u, d[u])
                        self._preds.setdefault(u, p[u])
        return self._matrix

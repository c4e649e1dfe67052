"""Instance generators: spiral, grid, and random planar networks."""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial import Delaunay

from .instance import Edge, Instance, Robot, Vertex

_DIRS = ((1, 0), (0, 1), (-1, 0), (0, -1))  # right, up, left, down


def gen_spiral(n_segments: int, spacing: int = 1, capacity: float | None = None,
               n_robots: int = 1) -> Instance:
    """Rectilinear inward spiral of unit-length axis-aligned segments.

    Arm lengths grow as spacing * (1, 1, 2, 2, 3, 3, ...) so consecutive
    parallel arms sit ``spacing`` apart.  The depot is the outer endpoint;
    rewards and both costs equal the segment length (1 per segment).
    """
    if n_segments < 1:
        raise ValueError("n_segments must be >= 1")
    if spacing < 1 or int(spacing) != spacing:
        raise ValueError("spacing must be a positive integer (unit segments)")
    spacing = int(spacing)

    pts = [(0, 0)]
    x = y = 0
    arm = 0
    while len(pts) - 1 < n_segments:
        dx, dy = _DIRS[arm % 4]
        arm_len = spacing * (arm // 2 + 1)
        for _ in range(arm_len):
            if len(pts) - 1 == n_segments:
                break
            x += dx
            y += dy
            pts.append((x, y))
        arm += 1

    vertices = tuple(Vertex(i, float(px), float(py)) for i, (px, py) in enumerate(pts))
    edges = tuple(
        Edge(i, i, i + 1, 1.0, 1.0, 1.0) for i in range(n_segments)
    )
    depot = len(pts) - 1  # outer endpoint
    if capacity is None:
        capacity = float(n_segments)
    robots = tuple(Robot(depot, float(capacity)) for _ in range(n_robots))
    return Instance(vertices, edges, frozenset({depot}), robots)


def gen_grid(rows: int, cols: int, capacity: float | None = None,
             n_robots: int = 1) -> Instance:
    """Unit grid graph; rewards and costs equal the (unit) segment length."""
    if rows < 1 or cols < 1:
        raise ValueError("grid needs at least one row and column")
    vertices = tuple(
        Vertex(r * cols + c, float(c), float(r)) for r in range(rows) for c in range(cols)
    )
    edges = []
    eid = 0
    for r in range(rows):
        for c in range(cols - 1):
            edges.append(Edge(eid, r * cols + c, r * cols + c + 1, 1.0, 1.0, 1.0))
            eid += 1
    for r in range(rows - 1):
        for c in range(cols):
            edges.append(Edge(eid, r * cols + c, (r + 1) * cols + c, 1.0, 1.0, 1.0))
            eid += 1
    if capacity is None:
        capacity = float(len(edges))
    robots = tuple(Robot(0, float(capacity)) for _ in range(n_robots))
    return Instance(vertices, tuple(edges), frozenset({0}), robots)


def gen_random_planar(n_vertices: int, n_edges: int, seed: int,
                      service_speed: float = 1.0, deadhead_speed: float = 1.0,
                      capacity: float | None = None, n_robots: int = 1) -> Instance:
    """Random connected planar network from a Delaunay triangulation.

    A random spanning tree of the triangulation is kept and extra Delaunay
    edges are added up to ``n_edges``.  Rewards equal segment lengths; costs
    are speed-derived from geometry.
    """
    if n_vertices < 3:
        raise ValueError("need at least 3 vertices")
    if n_edges < n_vertices - 1:
        raise ValueError("need at least |V|-1 edges for connectivity")
    rng = np.random.default_rng(seed)
    side = max(4.0, math.sqrt(n_vertices) * 2.0)
    pts = rng.uniform(0.0, side, size=(n_vertices, 2))
    tri = Delaunay(pts)
    pairs = set()
    for simplex in tri.simplices:
        for i in range(3):
            u, v = int(simplex[i]), int(simplex[(i + 1) % 3])
            pairs.add((min(u, v), max(u, v)))
    pairs = sorted(pairs)
    if n_edges > len(pairs):
        raise ValueError(f"triangulation offers only {len(pairs)} edges, need {n_edges}")

    order = rng.permutation(len(pairs))
    parent = list(range(n_vertices))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    chosen: list[tuple[int, int]] = []
    extras: list[tuple[int, int]] = []
    for oi in order:
        u, v = pairs[oi]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            chosen.append((u, v))
        else:
            extras.append((u, v))
    chosen += extras[: n_edges - len(chosen)]
    chosen.sort()

    vertices = tuple(Vertex(i, float(pts[i, 0]), float(pts[i, 1])) for i in range(n_vertices))
    edges = []
    for eid, (u, v) in enumerate(chosen):
        length = math.hypot(pts[v, 0] - pts[u, 0], pts[v, 1] - pts[u, 1])
        edges.append(Edge(eid, u, v, length / service_speed, length / deadhead_speed, length))
    centroid = pts.mean(axis=0)
    depot = int(np.argmin(((pts - centroid) ** 2).sum(axis=1)))
    if capacity is None:
        capacity = float(sum(e.service_cost for e in edges))
    robots = tuple(Robot(depot, float(capacity)) for _ in range(n_robots))
    return Instance(vertices, tuple(edges), frozenset({depot}), robots,
                    cost_mode=(float(service_speed), float(deadhead_speed)))

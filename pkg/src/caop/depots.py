"""Depot placement by k-medoids clustering of service edges."""

from __future__ import annotations

import numpy as np

from .distances import DistanceTable
from .errors import TooManyClusters
from .instance import Instance, Robot


def pam_kmedoids(D: np.ndarray, k: int, rng: np.random.Generator):
    """PAM-style k-medoids on a precomputed distance matrix.

    Starts from a seeded random medoid set and applies best-improving swaps
    until none remains.  Returns (medoids, assignment, objective_history);
    the objective (sum of point-to-medoid distances) never increases.
    """
    n = D.shape[0]
    medoids = sorted(int(i) for i in rng.choice(n, size=k, replace=False))

    def objective(meds: list[int]) -> float:
        return float(D[:, meds].min(axis=1).sum())

    history = [objective(medoids)]
    while True:
        d_med = D[:, medoids]  # (n, k)
        best_delta = 0.0
        best_swap = None
        for mi in range(k):
            if k == 1:
                d_others = np.full(n, np.inf)
            else:
                d_others = np.delete(d_med, mi, axis=1).min(axis=1)
            for cand in range(n):
                if cand in medoids:
                    continue
                cost = float(np.minimum(d_others, D[:, cand]).sum())
                delta = cost - history[-1]
                if delta < best_delta:
                    best_delta = delta
                    best_swap = (mi, cand, cost)
        if best_swap is None:
            break
        mi, cand, cost = best_swap
        medoids[mi] = cand
        medoids.sort()
        history.append(cost)

    assignment = np.argmin(D[:, medoids], axis=1)
    return medoids, assignment, history


def kmedoids_depots(inst: Instance, k: int, seed: int,
                    dist: DistanceTable | None = None) -> tuple[list[int], dict[int, int]]:
    """Cluster service edges by midpoint distance and pick one depot per cluster.

    The depot of a cluster is the graph vertex minimizing the summed deadhead
    distance to the cluster's edge endpoints.  Returns the depot vertex per
    cluster and a cluster index per service-edge id.
    """
    edges = inst.service_edges
    if k < 1 or k > len(edges):
        raise TooManyClusters(f"cannot form {k} clusters from {len(edges)} service edges")
    if dist is None:
        dist = DistanceTable(inst)
    xy = inst.coords
    mids = np.array([
        0.5 * (xy[e.tail] + xy[e.head]) for e in edges
    ])
    diff = mids[:, None, :] - mids[None, :, :]
    D = np.hypot(diff[..., 0], diff[..., 1])
    rng = np.random.default_rng(seed)
    _, assignment, _ = pam_kmedoids(D, k, rng)

    Dm = dist.matrix()
    tails = np.array([e.tail for e in edges])
    heads = np.array([e.head for e in edges])
    depots: list[int] = []
    for c in range(k):
        members = np.nonzero(assignment == c)[0]
        score = Dm[:, tails[members]].sum(axis=1) + Dm[:, heads[members]].sum(axis=1)
        depots.append(int(np.argmin(score)))
    return depots, {edges[i].id: int(assignment[i]) for i in range(len(edges))}


def with_depots(inst: Instance, depots: list[int], capacity: float) -> Instance:
    """Replace the robot fleet: one robot of the given capacity per depot."""
    robots = tuple(Robot(d, float(capacity)) for d in depots)
    return Instance(inst.vertices, inst.edges, frozenset(depots), robots, inst.cost_mode)

"""Greedy constructive solver and the canonical correlated-reward evaluator.

Each iteration scores every (robot, candidate edge) pair by a scaled utility
minus the incremental route cost, services the best edge, updates utilities of
its neighbors and co-neighbors, and recomputes insertion costs for the route
that changed.  The scaling factor is dynamic: the largest incremental cost
over the smallest utility still unserviced, floored to avoid dividing by the
zero utilities that appear once correlated reward saturates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlation import WeightModel
from .distances import DistanceTable
from .errors import InfeasibleSolution
from .instance import Instance
from .routing import (
    Route,
    Solution,
    candidate_costs,
    insert_edge,
    route_cost,
    route_view,
)


@dataclass(frozen=True)
class GreedyConfig:
    eps_u: float = 1e-9  # floor for the utility denominator of the scaling factor
    recompute: str = "changed"  # insertion costs refreshed for: "changed" route only, or "all"
    tie_break: str = "utility-edge-robot"

    def __post_init__(self):
        if self.eps_u <= 0:
            raise ValueError("eps_u must be > 0")
        if self.recompute not in ("changed", "all"):
            raise ValueError(f"unknown recompute policy {self.recompute!r}")
        if self.tie_break != "utility-edge-robot":
            raise ValueError(f"unknown tie-break rule {self.tie_break!r}")


def utilities(inst: Instance, wm: WeightModel) -> dict[int, float]:
    """U(e) = r(e) + sum over co-neighbors e' of w(e, e') r(e'), per service edge."""
    out = {}
    for e in inst.service_edges:
        u = e.reward
        for ebar in wm.co_neighbors(e.id):
            u += wm.w(e.id, ebar) * inst.edge(ebar).reward
        out[e.id] = u
    return out


def correlated_reward(inst: Instance, wm: WeightModel, serviced: frozenset[int] | set[int]) -> float:
    """Clamped reward of a serviced edge set:
    sum of r(e) for serviced e, plus r(e) * min(1, sum of w(e', e) over serviced
    neighbors e') for the rest."""
    total = 0.0
    for e in inst.service_edges:
        if e.reward == 0.0:
            continue
        if e.id in serviced:
            total += e.reward
        else:
            cov = 0.0
            for ep in wm.neighbors(e.id):
                if ep in serviced:
                    cov += wm.w(ep, e.id)
            total += e.reward * min(1.0, cov)
    return total


def evaluate_reward(inst: Instance, wm: WeightModel, sol: Solution,
                    dist: DistanceTable | None = None) -> float:
    """Canonical reward of a solution; raises InfeasibleSolution on a repeated
    service or a capacity violation."""
    if dist is None:
        dist = DistanceTable(inst)
    if len(sol.routes) != len(inst.robots):
        raise InfeasibleSolution("solution must carry one route per robot")
    serviced: set[int] = set()
    for robot, r in zip(inst.robots, sol.routes):
        for a in r.arcs:
            if a.edge in serviced:
                raise InfeasibleSolution(f"edge {a.edge} serviced more than once")
            if inst.edge(a.edge).deadhead_only:
                raise InfeasibleSolution(f"deadhead-only edge {a.edge} serviced")
            serviced.add(a.edge)
        cost = route_cost(inst, dist, r)
        if cost > robot.capacity * (1.0 + 1e-9) + 1e-9:
            raise InfeasibleSolution(f"route cost {cost} exceeds capacity {robot.capacity}")
    return correlated_reward(inst, wm, serviced)


# ---------------------------------------------------------------------------

class _RobotState:
    __slots__ = ("route", "cand_idx", "cand_cost", "capacity")

    def __init__(self, route: Route, cand_idx: np.ndarray, cand_cost: np.ndarray, capacity: float):
        self.route = route
        self.cand_idx = cand_idx
        self.cand_cost = cand_cost
        self.capacity = capacity


def _weight_arrays(inst: Instance, wm: WeightModel):
    """Per edge-index neighbor/co-neighbor index and weight arrays."""
    m = inst.n_edges
    nbr_i: list[np.ndarray] = [None] * m  # type: ignore[list-item]
    nbr_w: list[np.ndarray] = [None] * m  # type: ignore[list-item]
    con_i: list[np.ndarray] = [None] * m  # type: ignore[list-item]
    con_w: list[np.ndarray] = [None] * m  # type: ignore[list-item]
    empty_i = np.empty(0, dtype=np.int64)
    empty_w = np.empty(0)
    for i, e in enumerate(inst.edges):
        nbrs = wm.neighbors(e.id)
        cons = wm.co_neighbors(e.id)
        if nbrs:
            nbr_i[i] = np.array([inst.edge_index(x) for x in nbrs], dtype=np.int64)
            nbr_w[i] = np.array([wm.w(x, e.id) for x in nbrs])
        else:
            nbr_i[i], nbr_w[i] = empty_i, empty_w
        if cons:
            con_i[i] = np.array([inst.edge_index(x) for x in cons], dtype=np.int64)
            con_w[i] = np.array([wm.w(e.id, x) for x in cons])
        else:
            con_i[i], con_w[i] = empty_i, empty_w
    return nbr_i, nbr_w, con_i, con_w


def solve_greedy(inst: Instance, wm: WeightModel, cfg: GreedyConfig | None = None,
                 dist: DistanceTable | None = None,
                 trace: list | None = None) -> Solution:
    """Build routes for all robots by greedy edge insertion.

    Returns a feasible Solution (possibly with empty routes).  When ``trace``
    is given, one (robot_index, edge_id) pair is appended per insertion.
    """
    cfg = cfg or GreedyConfig()
    if dist is None:
        dist = DistanceTable(inst)
    D = dist.matrix()
    ea = inst.arrays
    sidx = ea.service_idx
    rewards = ea.reward
    nbr_i, nbr_w, con_i, con_w = _weight_arrays(inst, wm)

    # utilities by edge index (deadhead-only rows stay 0 and are never scanned)
    U = np.zeros(inst.n_edges)
    for i in sidx:
        u = rewards[i]
        if len(con_i[i]):
            u += float(con_w[i] @ rewards[con_i[i]])
        U[i] = u
    serviced = np.zeros(inst.n_edges, dtype=bool)

    states: list[_RobotState] = []
    for robot in inst.robots:
        dep = robot.depot
        fwd = D[dep, ea.tails[sidx]] + ea.service_cost[sidx] + D[ea.heads[sidx], dep]
        rev = D[dep, ea.heads[sidx]] + ea.service_cost[sidx] + D[ea.tails[sidx], dep]
        cost = np.minimum(fwd, rev)
        ok = cost <= robot.capacity
        states.append(_RobotState(Route.empty(dep), sidx[ok], cost[ok], robot.capacity))

    while True:
        unserved = sidx[~serviced[sidx]]
        if len(unserved) == 0:
            break
        u_min = float(U[unserved].min())
        lam_den = max(u_min, cfg.eps_u)

        c_max = -np.inf
        for st in states:
            live = ~serviced[st.cand_idx]
            st.cand_idx = st.cand_idx[live]
            st.cand_cost = st.cand_cost[live]
            if len(st.cand_idx):
                c_max = max(c_max, float((st.cand_cost - st.route.total_cost).max()))
        if not np.isfinite(c_max):
            break  # no insertable edge anywhere
        lam = c_max / lam_den

        best = None  # (u, U(e), -edge_id, -robot) lexicographic max
        best_k = best_i = -1
        for k, st in enumerate(states):
            if not len(st.cand_idx):
                continue
            u = lam * U[st.cand_idx] - (st.cand_cost - st.route.total_cost)
            top = float(u.max())
            sel = np.nonzero(u == top)[0]
            if len(sel) > 1:
                uu = U[st.cand_idx[sel]]
                sel = sel[uu == uu.max()]
                if len(sel) > 1:
                    ids = ea.ids[st.cand_idx[sel]]
                    sel = sel[ids == ids.min()]
            j = int(sel[0])
            i = int(st.cand_idx[j])
            key = (top, float(U[i]), -int(ea.ids[i]), -k)
            if best is None or key > best:
                best = key
                best_k, best_i = k, i
        if best is None or best[0] < 0:
            break

        e_star = int(ea.ids[best_i])
        st = states[best_k]
        st.route = insert_edge(inst, dist, st.route, e_star)
        serviced[best_i] = True
        if trace is not None:
            trace.append((best_k, e_star))

        # neighbors of e* lose the correlated share of its reward;
        # co-neighbors already paid out and must not pay again
        if len(nbr_i[best_i]):
            idx = nbr_i[best_i]
            U[idx] = np.maximum(0.0, U[idx] - nbr_w[best_i] * rewards[best_i])
        if len(con_i[best_i]):
            idx = con_i[best_i]
            U[idx] = np.maximum(0.0, U[idx] - con_w[best_i] * rewards[idx])
        # higher-order neighbor refresh would hook in here; first-order
        # correlation needs none

        refresh = [best_k] if cfg.recompute == "changed" else list(range(len(states)))
        for k in refresh:
            st = states[k]
            live = st.cand_idx[~serviced[st.cand_idx]]
            if not len(live):
                st.cand_idx = live
                st.cand_cost = np.empty(0)
                continue
            if not len(st.route.arcs):
                continue  # route unchanged and still empty; costs stay valid
            view = route_view(inst, dist, st.route)
            costs = candidate_costs(view, D, ea.tails[live], ea.heads[live],
                                    ea.service_cost[live]).min(axis=1)
            ok = costs <= st.capacity
            st.cand_idx = live[ok]
            st.cand_cost = costs[ok]

    serviced_ids = frozenset(int(ea.ids[i]) for i in np.nonzero(serviced)[0])
    routes = tuple(st.route for st in states)
    reward = correlated_reward(inst, wm, serviced_ids)
    return Solution(routes, serviced_ids, reward)

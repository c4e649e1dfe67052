"""Routes, route costing, and the constructive edge-insertion heuristic.

A route is a depot plus an ordered sequence of directed service arcs; the
deadheading between consecutive arcs (and to/from the depot) is implied by
shortest deadhead paths, so a fixed service sequence has a unique cost.

Inserting an edge into a route of l arcs considers 4 end insertions (two ends
times two orientations) plus, for each of the l-1 interior split positions,
8 recombinations: two orientations of the new edge times keep-or-reverse for
each route half.  All 4 + 8(l-1) candidates are costed in O(1) apiece using
connector prefix sums, so one insertion runs in time linear in l.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distances import DistanceTable
from .errors import AlreadyServiced, InfeasibleSolution
from .instance import Edge, Instance


@dataclass(frozen=True)
class ServiceArc:
    edge: int  # edge id
    forward: bool  # True: tail -> head

    def endpoints(self, inst: Instance) -> tuple[int, int]:
        e = inst.edge(self.edge)
        return (e.tail, e.head) if self.forward else (e.head, e.tail)


@dataclass(frozen=True)
class Route:
    depot: int
    arcs: tuple[ServiceArc, ...]
    service_cost: float
    deadhead_cost: float

    @property
    def total_cost(self) -> float:
        return self.service_cost + self.deadhead_cost

    def __len__(self) -> int:
        return len(self.arcs)

    def services(self, edge_id: int) -> bool:
        return any(a.edge == edge_id for a in self.arcs)

    @staticmethod
    def empty(depot: int) -> "Route":
        return Route(depot, (), 0.0, 0.0)


@dataclass(frozen=True)
class Solution:
    routes: tuple[Route, ...]  # one per robot, same order as inst.robots
    serviced: frozenset[int]  # edge ids
    total_reward: float


def _walk_costs(inst: Instance, dist: DistanceTable, depot: int,
                arcs: Sequence[ServiceArc]) -> tuple[float, float]:
    """Canonical service/deadhead cost sums for a depot-anchored arc sequence."""
    if not arcs:
        return 0.0, 0.0
    service = 0.0
    for a in arcs:
        service += inst.edge(a.edge).service_cost
    s0, _ = arcs[0].endpoints(inst)
    deadhead = dist.dist(depot, s0)
    prev_end = arcs[0].endpoints(inst)[1]
    for a in arcs[1:]:
        s, h = a.endpoints(inst)
        deadhead += dist.dist(prev_end, s)
        prev_end = h
    deadhead += dist.dist(prev_end, depot)
    return service, deadhead


def make_route(inst: Instance, dist: DistanceTable, depot: int,
               arcs: Sequence[ServiceArc]) -> Route:
    service, deadhead = _walk_costs(inst, dist, depot, arcs)
    return Route(depot, tuple(arcs), service, deadhead)


def route_cost(inst: Instance, dist: DistanceTable, route: Route) -> float:
    """Total route cost recomputed from scratch (service + shortest connectors)."""
    service, deadhead = _walk_costs(inst, dist, route.depot, route.arcs)
    return service + deadhead


def initial_route(inst: Instance, dist: DistanceTable, depot: int, edge_id: int) -> Route:
    """Single-arc route servicing one edge; the cheaper orientation wins, ties
    break toward tail -> head."""
    e = inst.edge(edge_id)
    if e.deadhead_only:
        raise ValueError(f"edge {edge_id} is deadhead-only and cannot be serviced")
    cost_fwd = dist.dist(depot, e.tail) + e.service_cost + dist.dist(e.head, depot)
    cost_rev = dist.dist(depot, e.head) + e.service_cost + dist.dist(e.tail, depot)
    forward = cost_fwd <= cost_rev
    return make_route(inst, dist, depot, (ServiceArc(edge_id, forward),))


# ---------------------------------------------------------------------------
# Candidate enumeration for insertion
#
# Canonical candidate order for a route of l >= 1 arcs:
#   index 0, 1                      new edge at the front (forward, reversed)
#   index 2 + 8(p-1) + c            interior split after arc p, p = 1..l-1,
#                                   c = 4*orient + 2*rev_first + rev_second
#   index 2 + 8(l-1), + 1           new edge at the back (forward, reversed)
# Ties in cost resolve to the smallest index.


@dataclass(frozen=True)
class RouteView:
    """Geometry of a route needed to cost insertions in O(1) per candidate."""

    depot: int
    starts: np.ndarray  # (l,) start vertex of each arc traversal
    ends: np.ndarray  # (l,) end vertex
    prefix: np.ndarray  # (l,) prefix[i] = sum of internal connectors among arcs[0..i]
    service_sum: float


def route_view(inst: Instance, dist: DistanceTable, route: Route) -> RouteView:
    l = len(route.arcs)
    starts = np.empty(l, dtype=np.int64)
    ends = np.empty(l, dtype=np.int64)
    for i, a in enumerate(route.arcs):
        starts[i], ends[i] = a.endpoints(inst)
    D = dist.matrix()
    prefix = np.zeros(l)
    if l > 1:
        prefix[1:] = np.cumsum(D[ends[:-1], starts[1:]])
    return RouteView(route.depot, starts, ends, prefix, route.service_cost)


def candidate_costs(view: RouteView, D: np.ndarray, tails: np.ndarray,
                    heads: np.ndarray, service: np.ndarray) -> np.ndarray:
    """Cost of every insertion candidate for each candidate edge.

    Returns an (n_cand, 4 + 8(l-1)) matrix in canonical candidate order.
    Internal connectors of a route half do not change under reversal because
    deadhead distances are symmetric, so only junction connectors vary.
    """
    S, H, P = view.starts, view.ends, view.prefix
    l = len(S)
    dep = view.depot
    total_int = P[l - 1]
    nc = len(tails)

    # entry/exit vertex of the new edge per orientation: o=0 forward, o=1 reversed
    e_in = np.stack([tails, heads], axis=1)  # (nc, 2)
    e_out = np.stack([heads, tails], axis=1)

    base = view.service_sum + service  # (nc,)
    out = np.empty((nc, 4 + 8 * (l - 1)))

    # ends: depot -> e -> route -> depot  and  depot -> route -> e -> depot
    front = D[dep, e_in] + D[e_out, S[0]] + (total_int + D[H[l - 1], dep])
    back = (D[dep, S[0]] + total_int) + D[H[l - 1], e_in] + D[e_out, dep]
    out[:, 0:2] = front
    out[:, -2:] = back

    if l > 1:
        p = np.arange(1, l)
        # piece1 = arcs[:p]; r1=0 keeps it, r1=1 reverses it
        in1 = np.stack([np.full(l - 1, S[0]), H[p - 1]], axis=1)  # (l-1, 2)
        out1 = np.stack([H[p - 1], np.full(l - 1, S[0])], axis=1)
        # piece2 = arcs[p:]
        in2 = np.stack([S[p], np.full(l - 1, H[l - 1])], axis=1)
        out2 = np.stack([np.full(l - 1, H[l - 1]), S[p]], axis=1)

        start_term = D[dep, in1] + P[p - 1][:, None]  # (l-1, 2)
        end_term = (total_int - P[p])[:, None] + D[out2, dep]  # (l-1, 2)
        mid1 = D[out1[None, :, :, None], e_in[:, None, None, :]]  # (nc, l-1, 2, 2) [p, r1, o]
        mid2 = D[e_out[:, None, :, None], in2[None, :, None, :]]  # (nc, l-1, 2, 2) [p, o, r2]

        # assemble (nc, l-1, o, r1, r2) then flatten positions-major
        tot = (
            start_term[None, :, None, :, None]
            + mid1.transpose(0, 1, 3, 2)[:, :, :, :, None]
            + mid2[:, :, :, None, :]
            + end_term[None, :, None, None, :]
        )
        out[:, 2:-2] = tot.reshape(nc, -1)

    return out + base[:, None]


def _flip(arcs: tuple[ServiceArc, ...]) -> tuple[ServiceArc, ...]:
    return tuple(ServiceArc(a.edge, not a.forward) for a in reversed(arcs))


def apply_candidate(arcs: tuple[ServiceArc, ...], edge: Edge, index: int) -> tuple[ServiceArc, ...]:
    """Arc sequence produced by candidate ``index`` of the canonical order."""
    l = len(arcs)
    fwd = ServiceArc(edge.id, True)
    rev = ServiceArc(edge.id, False)
    if index == 0:
        return (fwd,) + arcs
    if index == 1:
        return (rev,) + arcs
    back0 = 2 + 8 * (l - 1)
    if index == back0:
        return arcs + (fwd,)
    if index == back0 + 1:
        return arcs + (rev,)
    k = index - 2
    p, c = k // 8 + 1, k % 8
    orient, r1, r2 = c >> 2, (c >> 1) & 1, c & 1
    first = _flip(arcs[:p]) if r1 else arcs[:p]
    second = _flip(arcs[p:]) if r2 else arcs[p:]
    return first + ((rev if orient else fwd),) + second


def insert_edge(inst: Instance, dist: DistanceTable, route: Route, edge_id: int) -> Route:
    """Cheapest insertion of an edge into a route over all candidates.

    Service cost is orientation-independent, so only deadheading drives the
    choice.  Ties resolve by canonical candidate order (position ascending,
    then combination index).
    """
    if route.services(edge_id):
        raise AlreadyServiced(f"edge {edge_id} is already in the route")
    e = inst.edge(edge_id)
    if e.deadhead_only:
        raise ValueError(f"edge {edge_id} is deadhead-only and cannot be serviced")
    if not route.arcs:
        return initial_route(inst, dist, route.depot, edge_id)
    view = route_view(inst, dist, route)
    costs = candidate_costs(
        view,
        dist.matrix(),
        np.array([e.tail], dtype=np.int64),
        np.array([e.head], dtype=np.int64),
        np.array([e.service_cost]),
    )[0]
    best = int(np.argmin(costs))
    return make_route(inst, dist, route.depot, apply_candidate(route.arcs, e, best))


# ---------------------------------------------------------------------------
# Solution serialization and auditing

def _connectors(inst: Instance, dist: DistanceTable, route: Route) -> list[list[int]]:
    """Shortest deadhead vertex paths: depot -> first arc, between arcs, last -> depot."""
    if not route.arcs:
        return []
    pts = [route.depot]
    for a in route.arcs:
        s, h = a.endpoints(inst)
        pts.extend([s, h])
    pts.append(route.depot)
    return [dist.path(pts[i], pts[i + 1]) for i in range(0, len(pts) - 1, 2)]


def solution_to_doc(inst: Instance, dist: DistanceTable, sol: Solution) -> dict:
    routes_out = []
    for r in sol.routes:
        routes_out.append({
            "depot": r.depot,
            "arcs": [{"edge": a.edge, "dir": "fwd" if a.forward else "rev"} for a in r.arcs],
            "connectors": _connectors(inst, dist, r),
            "service_cost": r.service_cost,
            "deadhead_cost": r.deadhead_cost,
            "total_cost": r.total_cost,
        })
    return {
        "routes": routes_out,
        "total_reward": sol.total_reward,
        "serviced_edges": sorted(sol.serviced),
    }


def solution_from_doc(inst: Instance, dist: DistanceTable, doc: dict) -> Solution:
    routes = []
    serviced: set[int] = set()
    for rr in doc["routes"]:
        arcs = tuple(ServiceArc(a["edge"], a["dir"] == "fwd") for a in rr["arcs"])
        routes.append(make_route(inst, dist, rr["depot"], arcs))
        serviced.update(a.edge for a in arcs)
    return Solution(tuple(routes), frozenset(serviced), float(doc["total_reward"]))


def audit_solution(inst: Instance, dist: DistanceTable, sol: Solution,
                   cost_slack: float = 1e-9) -> None:
    """Raise InfeasibleSolution unless every route is a depot-anchored closed
    walk over real edges, within capacity, servicing each edge at most once
    and with balanced arc degrees at every vertex."""
    if len(sol.routes) != len(inst.robots):
        raise InfeasibleSolution("solution must carry one route per robot")

    seen: set[int] = set()
    for r in sol.routes:
        for a in r.arcs:
            if a.edge in seen:
                raise InfeasibleSolution(f"edge {a.edge} serviced more than once")
            if inst.edge(a.edge).deadhead_only:
                raise InfeasibleSolution(f"deadhead-only edge {a.edge} serviced")
            seen.add(a.edge)
    if seen != set(sol.serviced):
        raise InfeasibleSolution("serviced set disagrees with route arcs")

    # traversable vertex pairs (self-loops stay in place, always fine)
    pairs = {(e.tail, e.head) for e in inst.edges} | {(e.head, e.tail) for e in inst.edges}

    for robot, r in zip(inst.robots, sol.routes):
        if r.depot != robot.depot:
            raise InfeasibleSolution(f"route anchored at {r.depot}, robot depot is {robot.depot}")
        cost = route_cost(inst, dist, r)
        if abs(cost - r.total_cost) > cost_slack * max(1.0, abs(cost)):
            raise InfeasibleSolution(
                f"cached route cost {r.total_cost} differs from recomputation {cost}")
        if cost > robot.capacity * (1.0 + cost_slack) + cost_slack:
            raise InfeasibleSolution(
                f"route cost {cost} exceeds capacity {robot.capacity}")

        # assemble the full closed walk and check continuity + degree balance
        steps: list[tuple[int, int]] = []
        cur = r.depot
        conns = _connectors(inst, dist, r)  # len(arcs) + 1 paths for a non-empty route
        for i, a in enumerate(r.arcs):
            conn = conns[i]
            if conn[0] != cur:
                raise InfeasibleSolution("connector does not start where the walk stands")
            s, h = a.endpoints(inst)
            if conn[-1] != s:
                raise InfeasibleSolution("connector does not reach the next service arc")
            steps.extend(zip(conn, conn[1:]))
            steps.append((s, h))
            cur = h
        if r.arcs:
            tail = conns[-1]
            if tail[0] != cur or tail[-1] != r.depot:
                raise InfeasibleSolution("route does not return to its depot")
            steps.extend(zip(tail, tail[1:]))

        balance: dict[int, int] = {}
        for u, v in steps:
            if u != v and (u, v) not in pairs:
                raise InfeasibleSolution(f"walk uses nonexistent edge ({u}, {v})")
            balance[u] = balance.get(u, 0) + 1
            balance[v] = balance.get(v, 0) - 1
        if any(b != 0 for b in balance.values()):
            raise InfeasibleSolution("walk arc degrees are unbalanced")

"""Brute-force exact solver for small instances.

The route-cost subproblem (best order and orientations for a fixed edge set)
is solved exactly by dynamic programming over subsets, which equals the
minimum over all permutations and orientations.  The solver then enumerates
every assignment of candidate edges to robots, keeps capacity-feasible ones,
and maximizes the canonical correlated reward, breaking ties toward lower
total cost.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .correlation import WeightModel
from .distances import DistanceTable
from .errors import TooLarge
from .greedy import correlated_reward, utilities
from .instance import Instance
from .routing import Route, ServiceArc, Solution, make_route

_CAP_SLACK = 1e-12  # absorbs last-ulp noise in capacity comparisons


@dataclass(frozen=True)
class OracleLimits:
    max_edges: int = 8
    max_robots: int = 2
    time_budget: float = 300.0  # seconds

    def __post_init__(self):
        if self.max_edges <= 0 or self.max_robots <= 0 or self.time_budget <= 0:
            raise ValueError("oracle limits must be positive")


class SubsetRouteCosts:
    """Exact minimum route cost for every subset of a small edge set.

    dp[mask][arc] is the cheapest way to leave the depot, service exactly the
    edges in ``mask``, and stand at the end of ``arc`` (the last serviced
    arc).  Closing back to the depot gives the route cost.
    """

    def __init__(self, inst: Instance, dist: DistanceTable, depot: int, edge_ids):
        self.inst = inst
        self.dist = dist
        self.depot = depot
        self.edge_ids = list(edge_ids)
        n = len(self.edge_ids)
        starts, ends, svc = [], [], []
        for eid in self.edge_ids:
            e = inst.edge(eid)
            starts += [e.tail, e.head]
            ends += [e.head, e.tail]
            svc += [e.service_cost, e.service_cost]
        self._starts, self._ends, self._svc = starts, ends, svc

        na = 2 * n
        inf = math.inf
        dp = [[inf] * na for _ in range(1 << n)]
        parent = [[-1] * na for _ in range(1 << n)]
        d = dist.dist
        for i in range(n):
            for o in range(2):
                a = 2 * i + o
                dp[1 << i][a] = d(depot, starts[a]) + svc[a]
        for mask in range(1, 1 << n):
            row = dp[mask]
            for a in range(na):
                cur = row[a]
                if cur == inf:
                    continue
                end_a = ends[a]
                for j in range(n):
                    bit = 1 << j
                    if mask & bit:
                        continue
                    nm = mask | bit
                    for o in range(2):
                        b = 2 * j + o
                        cand = cur + d(end_a, starts[b]) + svc[b]
                        if cand < dp[nm][b]:
                            dp[nm][b] = cand
                            parent[nm][b] = a
        self._dp = dp
        self._parent = parent

        self.cost = [0.0] * (1 << n)
        self._last = [-1] * (1 << n)
        for mask in range(1, 1 << n):
            best, best_a = inf, -1
            row = dp[mask]
            for a in range(na):
                if row[a] == inf:
                    continue
                total = row[a] + d(ends[a], depot)
                if total < best:
                    best, best_a = total, a
            self.cost[mask] = best
            self._last[mask] = best_a

    def route(self, mask: int) -> Route:
        """A cost-optimal route realizing ``mask`` (deterministic)."""
        arcs: list[ServiceArc] = []
        a = self._last[mask]
        m = mask
        while a >= 0:
            i, o = divmod(a, 2)
            arcs.append(ServiceArc(self.edge_ids[i], o == 0))
            nxt = self._parent[m][a]
            m &= ~(1 << i)
            a = nxt
        arcs.reverse()
        return make_route(self.inst, self.dist, self.depot, arcs)


def min_route_cost_exact(inst: Instance, dist: DistanceTable, depot: int,
                         edge_set, max_edges: int = 8) -> float:
    """Minimum of route_cost over all permutations and orientations of edge_set."""
    ids = list(edge_set)
    if len(ids) > max_edges:
        raise TooLarge(f"{len(ids)} edges exceed the exact route limit {max_edges}")
    if not ids:
        return 0.0
    table = SubsetRouteCosts(inst, dist, depot, ids)
    return table.cost[(1 << len(ids)) - 1]


def solve_bruteforce(inst: Instance, wm: WeightModel, limits: OracleLimits | None = None,
                     dist: DistanceTable | None = None) -> Solution:
    """Optimal solution by exhaustive assignment of candidate edges to robots.

    Only edges with positive utility can change the objective, so the subset
    search runs over those.  Reward ties resolve toward lower total cost, then
    toward the first assignment in enumeration order.
    """
    limits = limits or OracleLimits()
    if dist is None:
        dist = DistanceTable(inst)
    K = len(inst.robots)
    if K > limits.max_robots:
        raise TooLarge(f"{K} robots exceed the oracle limit {limits.max_robots}")

    util = utilities(inst, wm)
    cand_ids = [e.id for e in inst.service_edges if util[e.id] > 0.0]
    n = len(cand_ids)
    if n > limits.max_edges:
        raise TooLarge(f"{n} candidate edges exceed the oracle limit {limits.max_edges}")

    deadline = time.monotonic() + limits.time_budget
    tables: dict[int, SubsetRouteCosts] = {}
    for robot in inst.robots:
        if robot.depot not in tables:
            tables[robot.depot] = SubsetRouteCosts(inst, dist, robot.depot, cand_ids)

    full = 1 << n
    feasible: list[list[int]] = []
    for robot in inst.robots:
        cost = tables[robot.depot].cost
        cap = robot.capacity * (1.0 + _CAP_SLACK) + _CAP_SLACK
        feasible.append([m for m in range(full) if cost[m] <= cap])

    reward_of_union = [0.0] * full
    for mask in range(full):
        serviced = {cand_ids[i] for i in range(n) if mask & (1 << i)}
        reward_of_union[mask] = correlated_reward(inst, wm, serviced)

    best_key: tuple[float, float] | None = None
    best_masks: tuple[int, ...] | None = None

    def assign(k: int, remaining: int, union: int, cost_sum: float, masks: tuple[int, ...]):
        nonlocal best_key, best_masks
        if time.monotonic() > deadline:
            raise TooLarge("oracle time budget exceeded")
        if k == K:
            key = (reward_of_union[union], -cost_sum)
            if best_key is None or key > best_key:
                best_key = key
                best_masks = masks
            return
        cost = tables[inst.robots[k].depot].cost
        for m in feasible[k]:
            if m & ~remaining:
                continue
            assign(k + 1, remaining & ~m, union | m, cost_sum + cost[m], masks + (m,))

    assign(0, full - 1, 0, 0.0, ())
    assert best_masks is not None  # empty assignment is always feasible

    routes = []
    serviced: set[int] = set()
    for robot, mask in zip(inst.robots, best_masks):
        if mask == 0:
            routes.append(Route.empty(robot.depot))
        else:
            routes.append(tables[robot.depot].route(mask))
            serviced.update(cand_ids[i] for i in range(n) if mask & (1 << i))
    union = 0
    for m in best_masks:
        union |= m
    return Solution(tuple(routes), frozenset(serviced), reward_of_union[union])

"""Benchmark harness: seeded micro instances, greedy-vs-oracle gap reports.

Micro instances use dyadic-rational costs (multiples of 1/4) so every route
cost and capacity comparison is exact in floating point; gaps then measure
the heuristic, not rounding noise.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .correlation import WeightModel, fov_weights, inverse_distance_weights, q12
from .distances import DistanceTable
from .exact import OracleLimits, solve_bruteforce
from .greedy import GreedyConfig, solve_greedy
from .instance import Edge, Instance, Robot, Vertex
from .routing import Solution, initial_route


def random_micro_instance(seed: int, max_edges: int = 8) -> tuple[Instance, WeightModel]:
    """Seeded random instance small enough for the exact oracle.

    Mixes the correlation recipe by seed: none, field-of-view, inverse
    distance, or random sparse weights.  Multigraph features (parallel edges,
    point-feature loops) appear occasionally.
    """
    rng = np.random.default_rng(seed)
    n_v = int(rng.integers(3, 7))
    cells = rng.choice(64, size=n_v, replace=False)
    coords = [(0.5 * float(c % 8), 0.5 * float(c // 8)) for c in cells]
    vertices = tuple(Vertex(i, x, y) for i, (x, y) in enumerate(coords))

    def dyadic(lo: int, hi: int, unit: float = 0.25) -> float:
        return unit * int(rng.integers(lo, hi))

    edges: list[Edge] = []
    for v in range(1, n_v):
        u = int(rng.integers(0, v))
        edges.append(Edge(len(edges), u, v, dyadic(1, 13), dyadic(1, 9), 0.5 * int(rng.integers(0, 7))))
    m = int(rng.integers(n_v - 1, max_edges + 1))
    while len(edges) < m:
        if rng.random() < 0.2:
            v = int(rng.integers(0, n_v))
            edges.append(Edge(len(edges), v, v, dyadic(1, 13), 0.0, 0.5 * int(rng.integers(1, 7))))
        else:
            u = int(rng.integers(0, n_v))
            v = int(rng.integers(0, n_v))
            if u == v:
                continue
            edges.append(Edge(len(edges), u, v, dyadic(1, 13), dyadic(1, 9), 0.5 * int(rng.integers(0, 7))))
    if all(e.reward == 0 for e in edges):
        edges[0] = Edge(edges[0].id, edges[0].tail, edges[0].head,
                        edges[0].service_cost, edges[0].deadhead_cost, 1.0,
                        edges[0].deadhead_only)

    k_robots = 1 if rng.random() < 0.5 else 2
    depots = [int(rng.integers(0, n_v)) for _ in range(k_robots)]
    # capacity in dyadic units, wide enough for a couple of routes
    probe = Instance(vertices, tuple(edges), frozenset(depots),
                     tuple(Robot(d, 1.0) for d in depots))
    dist = DistanceTable(probe)
    robots = []
    for d in depots:
        costs = sorted(initial_route(probe, dist, d, e.id).total_cost for e in probe.service_edges)
        base = costs[len(costs) // 2]
        factor = 1.0 + 0.25 * int(rng.integers(1, 9))  # 1.25 .. 3.0
        cap = 0.25 * int(np.floor(base * factor / 0.25))
        robots.append(Robot(d, max(cap, 0.0)))
    inst = Instance(vertices, tuple(edges), frozenset(depots), tuple(robots))

    mode = int(rng.integers(0, 4))
    if mode == 0:
        wm = WeightModel.empty()
    elif mode == 1:
        wm = fov_weights(inst, fov=0.5 * int(rng.integers(1, 7)))
    elif mode == 2:
        wm = inverse_distance_weights(inst)
    else:
        entries: dict[tuple[int, int], float] = {}
        service_ids = [e.id for e in inst.service_edges]
        for _ in range(2 * len(service_ids)):
            a, b = rng.choice(len(service_ids), size=2, replace=False)
            entries[(service_ids[int(a)], service_ids[int(b)])] = q12(0.25 * int(rng.integers(1, 5)))
        wm = WeightModel(entries)
    return inst, wm


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BenchCase:
    name: str
    inst: Instance
    wm: WeightModel
    use_oracle: bool = True
    limits: OracleLimits | None = None


@dataclass(frozen=True)
class BenchRecord:
    name: str
    m: int
    k: int
    greedy_reward: float
    oracle_reward: float | None
    gap_pct: float | None
    greedy_ms: float


def run_case(case: BenchCase, cfg: GreedyConfig | None = None) -> BenchRecord:
    dist = DistanceTable(case.inst)
    dist.matrix()  # distance preparation is not part of the solve timing
    t0 = time.perf_counter()
    sol = solve_greedy(case.inst, case.wm, cfg, dist=dist)
    ms = (time.perf_counter() - t0) * 1e3
    oracle_reward = gap = None
    if case.use_oracle:
        oracle = solve_bruteforce(case.inst, case.wm, case.limits, dist=dist)
        oracle_reward = oracle.total_reward
        if oracle_reward > 0:
            gap = 100.0 * (oracle_reward - sol.total_reward) / oracle_reward
        else:
            gap = 0.0
    return BenchRecord(case.name, len(case.inst.service_edges), len(case.inst.robots),
                       sol.total_reward, oracle_reward, gap, ms)


def run_benchmark(cases: list[BenchCase], cfg: GreedyConfig | None = None,
                  workers: int = 1) -> list[BenchRecord]:
    """Run all cases; results come back in input order regardless of workers."""
    if workers <= 1:
        return [run_case(c, cfg) for c in cases]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: run_case(c, cfg), cases))


_CSV_HEADER = "instance,m,K,greedy_reward,oracle_reward,gap_pct,greedy_ms"


def format_report(records: list[BenchRecord]) -> str:
    """Fixed-schema CSV; the trailing summary row packs mean/max gap and mean time."""
    lines = [_CSV_HEADER]
    for r in records:
        orc = f"{r.oracle_reward:.9g}" if r.oracle_reward is not None else ""
        gap = f"{r.gap_pct:.4f}" if r.gap_pct is not None else ""
        lines.append(f"{r.name},{r.m},{r.k},{r.greedy_reward:.9g},{orc},{gap},{r.greedy_ms:.3f}")
    gaps = [r.gap_pct for r in records if r.gap_pct is not None]
    mean_gap = sum(gaps) / len(gaps) if gaps else 0.0
    max_gap = max(gaps) if gaps else 0.0
    mean_ms = sum(r.greedy_ms for r in records) / len(records) if records else 0.0
    lines.append(f"summary,{len(records)},,,,{mean_gap:.4f}/{max_gap:.4f},{mean_ms:.3f}")
    return "\n".join(lines) + "\n"


def covered_segments(inst: Instance, wm: WeightModel, sol: Solution,
                     threshold: float = 0.999) -> int:
    """Serviced edges plus edges whose clamped correlated coverage reaches the
    threshold (the figure-style 'segments covered' metric)."""
    count = 0
    for e in inst.service_edges:
        if e.id in sol.serviced:
            count += 1
            continue
        cov = 0.0
        for ep in wm.neighbors(e.id):
            if ep in sol.serviced:
                cov += wm.w(ep, e.id)
        if min(1.0, cov) >= threshold:
            count += 1
    return count

"""Graph data model: vertices, edges, robots, cost semantics, and JSON I/O.

Edges are undirected and form a multigraph: parallel edges and self-loops
(point features) are both legal.  Costs either come verbatim from the input
file (cost mode ``"explicit"``) or are derived from segment geometry and a
pair of travel speeds (cost mode ``(service_speed, deadhead_speed)``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    BadReference,
    Disconnected,
    IOFailure,
    NegativeValue,
    SchemaError,
    ZeroSpeed,
)

CostMode = Union[str, tuple]  # "explicit" or (service_speed, deadhead_speed)


@dataclass(frozen=True)
class Vertex:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class Edge:
    id: int
    tail: int
    head: int
    service_cost: float
    deadhead_cost: float
    reward: float
    deadhead_only: bool = False
    length: float | None = None  # geometric length override, used in speed-derived cost mode

    @property
    def is_loop(self) -> bool:
        return self.tail == self.head


@dataclass(frozen=True)
class Robot:
    depot: int
    capacity: float


@dataclass(frozen=True)
class Instance:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    depots: frozenset[int]
    robots: tuple[Robot, ...]
    cost_mode: CostMode = "explicit"

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def _id2idx(self) -> dict[int, int]:
        return {e.id: i for i, e in enumerate(self.edges)}

    def edge(self, edge_id: int) -> Edge:
        try:
            return self.edges[self._id2idx[edge_id]]
        except KeyError:
            raise BadReference(f"unknown edge id {edge_id}") from None

    def edge_index(self, edge_id: int) -> int:
        try:
            return self._id2idx[edge_id]
        except KeyError:
            raise BadReference(f"unknown edge id {edge_id}") from None

    def has_edge(self, edge_id: int) -> bool:
        return edge_id in self._id2idx

    @property
    def service_edges(self) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if not e.deadhead_only)

    def edge_length(self, e: Edge) -> float:
        if e.length is not None:
            return e.length
        t, h = self.vertices[e.tail], self.vertices[e.head]
        return math.hypot(h.x - t.x, h.y - t.y)

    @cached_property
    def coords(self) -> np.ndarray:
        """(|V|, 2) array of vertex coordinates, row index = vertex id."""
        return np.array([[v.x, v.y] for v in self.vertices], dtype=float)

    @cached_property
    def arrays(self) -> "EdgeArrays":
        return EdgeArrays.build(self)


@dataclass(frozen=True)
class EdgeArrays:
    """Column view of the edge list for vectorized work; row index = edge index."""

    ids: np.ndarray
    tails: np.ndarray
    heads: np.ndarray
    service_cost: np.ndarray
    deadhead_cost: np.ndarray
    reward: np.ndarray
    deadhead_only: np.ndarray
    service_idx: np.ndarray  # indices of serviceable (non-deadhead-only) edges

    @staticmethod
    def build(inst: Instance) -> "EdgeArrays":
        es = inst.edges
        dho = np.array([e.deadhead_only for e in es], dtype=bool)
        return EdgeArrays(
            ids=np.array([e.id for e in es], dtype=np.int64),
            tails=np.array([e.tail for e in es], dtype=np.int64),
            heads=np.array([e.head for e in es], dtype=np.int64),
            service_cost=np.array([e.service_cost for e in es], dtype=float),
            deadhead_cost=np.array([e.deadhead_cost for e in es], dtype=float),
            reward=np.array([e.reward for e in es], dtype=float),
            deadhead_only=dho,
            service_idx=np.nonzero(~dho)[0].astype(np.int64),
        )


# ---------------------------------------------------------------------------
# Validation / parsing

_TOP_KEYS = {"vertices", "edges", "depots", "robots", "weights", "cost_mode"}
_VERTEX_KEYS = {"id", "x", "y"}
_EDGE_KEYS = {"id", "tail", "head", "service_cost", "deadhead_cost", "length", "reward", "deadhead_only"}
_ROBOT_KEYS = {"depot", "capacity"}


def _require_keys(obj: Mapping, allowed: set, what: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaError(f"unknown keys in {what}: {sorted(unknown)}")


def _number(obj: Mapping, key: str, what: str, required: bool = True, default=None):
    if key not in obj:
        if required:
            raise SchemaError(f"{what} is missing required key '{key}'")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise SchemaError(f"{what}.{key} must be a number, got {val!r}")
    if not math.isfinite(val):
        raise SchemaError(f"{what}.{key} must be finite")
    return float(val)


def _int_field(obj: Mapping, key: str, what: str) -> int:
    if key not in obj:
        raise SchemaError(f"{what} is missing required key '{key}'")
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise SchemaError(f"{what}.{key} must be an integer, got {val!r}")
    return val


def _parse_cost_mode(raw) -> CostMode:
    if raw is None or raw == "explicit":
        return "explicit"
    if isinstance(raw, Mapping):
        _require_keys(raw, {"service_speed", "deadhead_speed"}, "cost_mode")
        s = _number(raw, "service_speed", "cost_mode")
        d = _number(raw, "deadhead_speed", "cost_mode")
        if s <= 0 or d <= 0:
            raise ZeroSpeed("cost_mode speeds must be > 0")
        return (s, d)
    raise SchemaError(f"cost_mode must be 'explicit' or a speeds object, got {raw!r}")


def validate_instance(doc: Mapping) -> Instance:
    """Validate a parsed instance document and return a normalized Instance.

    Rejects dangling references, negative values, disconnected graphs, and
    unknown keys at every level.  The optional ``weights`` entry is only
    checked to be a list here; its content belongs to the correlation model.
    """
    if not isinstance(doc, Mapping):
        raise SchemaError("instance document must be a JSON object")
    _require_keys(doc, _TOP_KEYS, "instance")
    for key in ("vertices", "edges", "depots", "robots"):
        if key not in doc:
            raise SchemaError(f"instance is missing required key '{key}'")
        if not isinstance(doc[key], Sequence) or isinstance(doc[key], (str, bytes)):
            raise SchemaError(f"instance.{key} must be an array")
    if "weights" in doc and not isinstance(doc["weights"], Sequence):
        raise SchemaError("instance.weights must be an array")

    cost_mode = _parse_cost_mode(doc.get("cost_mode"))

    raw_vertices = doc["vertices"]
    if len(raw_vertices) == 0:
        raise SchemaError("instance needs at least one vertex")
    verts: dict[int, Vertex] = {}
    for rv in raw_vertices:
        _require_keys(rv, _VERTEX_KEYS, "vertex")
        vid = _int_field(rv, "id", "vertex")
        if vid in verts:
            raise SchemaError(f"duplicate vertex id {vid}")
        verts[vid] = Vertex(vid, _number(rv, "x", "vertex"), _number(rv, "y", "vertex"))
    n = len(verts)
    if set(verts) != set(range(n)):
        raise SchemaError("vertex ids must be dense 0..|V|-1")
    vertices = tuple(verts[i] for i in range(n))

    edges: list[Edge] = []
    seen_edge_ids: set[int] = set()
    for re_ in doc["edges"]:
        _require_keys(re_, _EDGE_KEYS, "edge")
        eid = _int_field(re_, "id", "edge")
        if eid < 0:
            raise SchemaError(f"edge id {eid} must be >= 0")
        if eid in seen_edge_ids:
            raise SchemaError(f"duplicate edge id {eid}")
        seen_edge_ids.add(eid)
        tail = _int_field(re_, "tail", "edge")
        head = _int_field(re_, "head", "edge")
        if tail not in verts or head not in verts:
            raise BadReference(f"edge {eid} references unknown vertex ({tail}, {head})")
        reward = _number(re_, "reward", "edge")
        if reward < 0:
            raise NegativeValue(f"edge {eid} has negative reward")
        deadhead_only = re_.get("deadhead_only", False)
        if not isinstance(deadhead_only, bool):
            raise SchemaError(f"edge {eid}: deadhead_only must be a boolean")
        if deadhead_only and reward != 0:
            raise SchemaError(f"edge {eid} is deadhead_only and must have zero reward")
        length = _number(re_, "length", "edge", required=False)
        if length is not None and length < 0:
            raise NegativeValue(f"edge {eid} has negative length")
        edges.append(
            _resolve_costs(re_, eid, tail, head, reward, deadhead_only, length, cost_mode, verts)
        )

    depots = []
    for d in doc["depots"]:
        if isinstance(d, bool) or not isinstance(d, int):
            raise SchemaError(f"depot ids must be integers, got {d!r}")
        if d not in verts:
            raise BadReference(f"depot {d} is not a vertex")
        depots.append(d)

    if len(doc["robots"]) == 0:
        raise SchemaError("instance needs at least one robot")
    robots = []
    for rr in doc["robots"]:
        _require_keys(rr, _ROBOT_KEYS, "robot")
        depot = _int_field(rr, "depot", "robot")
        if depot not in depots:
            raise BadReference(f"robot depot {depot} is not in the depot set")
        capacity = _number(rr, "capacity", "robot")
        if capacity < 0:
            raise NegativeValue("robot capacity must be >= 0")
        robots.append(Robot(depot, capacity))

    inst = Instance(vertices, edges=tuple(edges), depots=frozenset(depots),
                    robots=tuple(robots), cost_mode=cost_mode)
    _check_connected(inst)
    return inst


def _resolve_costs(raw: Mapping, eid: int, tail: int, head: int, reward: float,
                   deadhead_only: bool, length: float | None,
                   cost_mode: CostMode, verts: Mapping[int, Vertex]) -> Edge:
    has_sc = "service_cost" in raw
    has_dc = "deadhead_cost" in raw
    is_loop = tail == head

    if deadhead_only and has_sc:
        raise SchemaError(f"edge {eid} is deadhead_only and must not carry service_cost")

    if cost_mode == "explicit":
        if deadhead_only:
            sc = 0.0
        elif has_sc:
            sc = _number(raw, "service_cost", "edge")
        else:
            raise SchemaError(f"edge {eid} needs service_cost in explicit cost mode")
        if has_dc:
            dc = _number(raw, "deadhead_cost", "edge")
        elif is_loop:
            dc = 0.0
        else:
            raise SchemaError(f"edge {eid} needs deadhead_cost in explicit cost mode")
    else:
        s_speed, d_speed = cost_mode
        if is_loop:
            # point features carry their own inspection cost; geometry gives none
            sc = _number(raw, "service_cost", "edge") if has_sc else 0.0
            dc = _number(raw, "deadhead_cost", "edge") if has_dc else 0.0
        else:
            if has_sc or has_dc:
                raise SchemaError(
                    f"edge {eid}: per-edge costs are not allowed in speed-derived cost mode")
            geo = length
            if geo is None:
                t, h = verts[tail], verts[head]
                geo = math.hypot(h.x - t.x, h.y - t.y)
            sc = geo / s_speed
            dc = geo / d_speed
    if sc < 0 or dc < 0:
        raise NegativeValue(f"edge {eid} has a negative cost")
    return Edge(eid, tail, head, sc, dc, reward, deadhead_only, length)


def _check_connected(inst: Instance) -> None:
    n = inst.n_vertices
    adj: list[list[int]] = [[] for _ in range(n)]
    for e in inst.edges:
        if not e.is_loop:
            adj[e.tail].append(e.head)
            adj[e.head].append(e.tail)
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                stack.append(v)
    if count != n:
        raise Disconnected(f"graph has {n} vertices but only {count} reachable from vertex 0")


# ---------------------------------------------------------------------------
# Mutating operations (return new instances)

def add_point_feature(inst: Instance, v: int, service_cost: float, reward: float) -> Instance:
    """Attach a point feature at vertex v as a self-loop edge."""
    if not (0 <= v < inst.n_vertices):
        raise BadReference(f"vertex {v} does not exist")
    if service_cost < 0 or reward < 0:
        raise NegativeValue("point feature cost and reward must be >= 0")
    new_id = max((e.id for e in inst.edges), default=-1) + 1
    loop = Edge(new_id, v, v, float(service_cost), 0.0, float(reward), False)
    return replace(inst, edges=inst.edges + (loop,))


def add_direct_deadhead_edges(inst: Instance, service_speed: float, deadhead_speed: float) -> Instance:
    """Add a deadhead-only edge for every unordered vertex pair lacking a direct edge.

    The new edges cost euclidean-length / deadhead_speed to deadhead and carry no
    reward.  When the instance derives costs from geometry, existing non-loop
    edges are re-costed with the given speeds.
    """
    if service_speed <= 0 or deadhead_speed <= 0:
        raise ZeroSpeed("speeds must be > 0")
    n = inst.n_vertices
    xy = inst.coords

    connected: set[tuple[int, int]] = set()
    for e in inst.edges:
        if not e.is_loop:
            u, v = sorted((e.tail, e.head))
            connected.add((u, v))

    edges = list(inst.edges)
    if inst.cost_mode != "explicit":
        for i, e in enumerate(edges):
            if not e.is_loop:
                geo = inst.edge_length(e)
                edges[i] = replace(e, service_cost=geo / service_speed,
                                   deadhead_cost=geo / deadhead_speed)

    next_id = max((e.id for e in inst.edges), default=-1) + 1
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) in connected:
                continue
            d = math.hypot(xy[v, 0] - xy[u, 0], xy[v, 1] - xy[u, 1])
            edges.append(Edge(next_id, u, v, 0.0, d / deadhead_speed, 0.0, True))
            next_id += 1

    mode: CostMode = inst.cost_mode if inst.cost_mode == "explicit" else (service_speed, deadhead_speed)
    return replace(inst, edges=tuple(edges), cost_mode=mode)


# ---------------------------------------------------------------------------
# Serialization

def instance_to_doc(inst: Instance, weight_entries: Iterable[Mapping] | None = None) -> dict:
    """Serialize to the JSON document shape accepted by validate_instance."""
    geometry_mode = inst.cost_mode != "explicit"
    edges_out = []
    for e in inst.edges:
        rec: dict = {"id": e.id, "tail": e.tail, "head": e.head, "reward": e.reward}
        if geometry_mode:
            if e.is_loop:
                if e.service_cost:
                    rec["service_cost"] = e.service_cost
                if e.deadhead_cost:
                    rec["deadhead_cost"] = e.deadhead_cost
        else:
            if not e.deadhead_only:
                rec["service_cost"] = e.service_cost
            rec["deadhead_cost"] = e.deadhead_cost
        if e.length is not None:
            rec["length"] = e.length
        if e.deadhead_only:
            rec["deadhead_only"] = True
        edges_out.append(rec)
    doc: dict = {
        "vertices": [{"id": v.id, "x": v.x, "y": v.y} for v in inst.vertices],
        "edges": edges_out,
        "depots": sorted(inst.depots),
        "robots": [{"depot": r.depot, "capacity": r.capacity} for r in inst.robots],
    }
    if geometry_mode:
        s, d = inst.cost_mode
        doc["cost_mode"] = {"service_speed": s, "deadhead_speed": d}
    if weight_entries is not None:
        doc["weights"] = list(weight_entries)
    return doc


def load_instance(path) -> tuple[Instance, list | None]:
    """Read an instance file; returns the instance and its raw weights array."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise IOFailure(f"cannot read instance file {path}: {exc}") from exc
    inst = validate_instance(doc)
    return inst, doc.get("weights")


def save_instance(path, inst: Instance, weight_entries: Iterable[Mapping] | None = None) -> None:
    doc = instance_to_doc(inst, weight_entries)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
    except OSError as exc:
        raise IOFailure(f"cannot write instance file {path}: {exc}") from exc

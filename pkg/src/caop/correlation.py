"""Spatial correlation weights between edges.

A weight ``w(e', e)`` in (0, 1] is the fraction of edge e's reward collected
when e' is serviced.  Weights are stored sparsely; the diagonal is always
zero and the relation may be asymmetric.  Two builders are provided: a
field-of-view coverage fraction and an inverse expected-distance recipe.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping

import numpy as np

from .errors import BadReference, MissingGeometry, SchemaError
from .instance import Instance, load_instance


def q12(x: float) -> float:
    """Round to 12 significant digits; the on-disk weight resolution."""
    return float(f"{x:.12g}")


class WeightModel:
    """Sparse correlation weights plus derived neighbor sets.

    ``neighbors(e)`` lists edges whose servicing collects reward from e;
    ``co_neighbors(e)`` lists edges that pay out when e is serviced.  The two
    relations are exact inverses of each other.
    """

    def __init__(self, entries: Mapping[tuple[int, int], float]):
        w: dict[tuple[int, int], float] = {}
        nbrs: dict[int, list[int]] = {}
        conbrs: dict[int, list[int]] = {}
        for (ep, e), val in entries.items():
            if ep == e:
                raise SchemaError(f"self-weight on edge {e} is not allowed")
            if not (0.0 < val <= 1.0):
                raise SchemaError(f"weight w({ep},{e})={val} outside (0, 1]")
            w[(ep, e)] = val
            nbrs.setdefault(e, []).append(ep)
            conbrs.setdefault(ep, []).append(e)
        self._w = w
        self._nbrs = {e: tuple(sorted(v)) for e, v in nbrs.items()}
        self._conbrs = {e: tuple(sorted(v)) for e, v in conbrs.items()}

    @staticmethod
    def empty() -> "WeightModel":
        return WeightModel({})

    def w(self, e_from: int, e_to: int) -> float:
        return self._w.get((e_from, e_to), 0.0)

    def neighbors(self, e: int) -> tuple[int, ...]:
        return self._nbrs.get(e, ())

    def co_neighbors(self, e: int) -> tuple[int, ...]:
        return self._conbrs.get(e, ())

    def items(self):
        return self._w.items()

    def __len__(self) -> int:
        return len(self._w)

    def __eq__(self, other) -> bool:
        return isinstance(other, WeightModel) and self._w == other._w


def neighbor_sets(wm: WeightModel) -> tuple[dict[int, tuple[int, ...]], dict[int, tuple[int, ...]]]:
    """Neighbor and co-neighbor sets as plain dicts keyed by edge id."""
    n = dict(wm._nbrs)
    nbar = dict(wm._conbrs)
    return n, nbar


# ---------------------------------------------------------------------------
# Builders

def _segment_endpoints(inst: Instance, edges) -> tuple[np.ndarray, np.ndarray]:
    xy = inst.coords
    if not np.all(np.isfinite(xy)):
        raise MissingGeometry("vertex coordinates must be finite")
    a = xy[[e.tail for e in edges]]
    b = xy[[e.head for e in edges]]
    return a, b


def _point_segment_dist(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from each point in pts (N,2) to the segment a-b."""
    ab = b - a
    denom = float(ab @ ab)
    ap = pts - a
    if denom == 0.0:
        return np.hypot(ap[:, 0], ap[:, 1])
    t = np.clip(ap @ ab / denom, 0.0, 1.0)
    off = ap - t[:, None] * ab
    return np.hypot(off[:, 0], off[:, 1])


def fov_weights(inst: Instance, fov: float, samples: int = 50) -> WeightModel:
    """Coverage-fraction weights for a sensor with lateral field-of-view ``fov``.

    w(e', e) is the fraction of e's length lying within fov/2 of segment e',
    estimated with ``samples`` uniformly spaced points along e.  Deadhead-only
    edges participate in neither role.
    """
    if fov <= 0:
        raise SchemaError("fov must be > 0")
    edges = inst.service_edges
    m = len(edges)
    if m == 0:
        return WeightModel.empty()
    a, b = _segment_endpoints(inst, edges)
    half = fov / 2.0

    # midpoint samples along every target edge e
    t = (np.arange(samples) + 0.5) / samples
    pts = a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]  # (m, samples, 2)
    flat = pts.reshape(-1, 2)

    entries: dict[tuple[int, int], float] = {}
    for j in range(m):  # e' = covering edge
        d = _point_segment_dist(flat, a[j], b[j]).reshape(m, samples)
        frac = np.mean(d <= half, axis=1)
        for i in range(m):  # e = covered edge
            if i == j or frac[i] <= 0.0:
                continue
            entries[(edges[j].id, edges[i].id)] = q12(float(frac[i]))
    return WeightModel(entries)


def expected_sq_dist(a1: np.ndarray, a2: np.ndarray, b1: np.ndarray, b2: np.ndarray) -> float:
    """E||X - Y||^2 for X uniform on segment a1-a2 and Y uniform on b1-b2.

    Closed form: with c = a1-b1, u = a2-a1, v = b2-b1,
    E = |c|^2 + |u|^2/3 + |v|^2/3 + c.u - c.v - u.v/2.
    """
    c = a1 - b1
    u = a2 - a1
    v = b2 - b1
    return float(c @ c + (u @ u) / 3.0 + (v @ v) / 3.0 + c @ u - c @ v - (u @ v) / 2.0)


def inverse_distance_weights(inst: Instance, d_min: float = 1.0, floor: float = 1e-4) -> WeightModel:
    """Weights from inverse root-mean-square distances between edge pairs.

    d(e', e) = sqrt(E||X-Y||^2) with X, Y uniform on the two segments; values
    below ``d_min`` are replaced by it, inverses are normalized by their
    global off-diagonal maximum, and entries below ``floor`` are dropped.
    """
    edges = inst.service_edges
    m = len(edges)
    if m < 2:
        return WeightModel.empty()
    a, b = _segment_endpoints(inst, edges)

    u = b - a  # direction of each segment
    c = a[:, None, :] - a[None, :, :]  # c[i,j] = a_i - a_j
    cc = np.einsum("ijk,ijk->ij", c, c)
    cu = np.einsum("ijk,ik->ij", c, u)   # (a_i - a_j) . u_i
    cv = np.einsum("ijk,jk->ij", c, u)   # (a_i - a_j) . u_j
    uu = np.einsum("ik,ik->i", u, u)
    uv = u @ u.T
    esq = cc + uu[:, None] / 3.0 + uu[None, :] / 3.0 + cu - cv - uv / 2.0
    d = np.sqrt(np.maximum(esq, 0.0))
    d = np.maximum(d, d_min)
    raw = 1.0 / d
    np.fill_diagonal(raw, 0.0)
    top = raw.max()
    if top <= 0.0:
        return WeightModel.empty()
    norm = raw / top

    entries: dict[tuple[int, int], float] = {}
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            val = norm[i, j]
            if val >= floor:
                entries[(edges[i].id, edges[j].id)] = q12(float(val))
    return WeightModel(entries)


# ---------------------------------------------------------------------------
# Serialization glue (the instance file's optional "weights" array)

def weights_to_entries(wm: WeightModel) -> list[dict]:
    out = []
    for (ep, e) in sorted(wm._w):
        out.append({"from": ep, "to": e, "w": wm._w[(ep, e)]})
    return out


def weights_from_entries(inst: Instance, entries: Iterable[Mapping]) -> WeightModel:
    service_ids = {e.id for e in inst.service_edges}
    acc: dict[tuple[int, int], float] = {}
    for rec in entries:
        if set(rec) != {"from", "to", "w"}:
            raise SchemaError(f"weight entry must have keys from/to/w, got {sorted(rec)}")
        ep, e, w = rec["from"], rec["to"], rec["w"]
        if not isinstance(ep, int) or not isinstance(e, int):
            raise SchemaError("weight entry ids must be integers")
        if ep not in service_ids or e not in service_ids:
            raise BadReference(f"weight entry ({ep},{e}) references a non-service edge")
        if (ep, e) in acc:
            raise SchemaError(f"duplicate weight entry ({ep},{e})")
        if isinstance(w, bool) or not isinstance(w, (int, float)) or not math.isfinite(w):
            raise SchemaError(f"weight value for ({ep},{e}) must be a finite number")
        acc[(ep, e)] = float(w)
    return WeightModel(acc)


def load_problem(path) -> tuple[Instance, WeightModel | None]:
    """Read an instance file along with its embedded weights, if any."""
    inst, raw = load_instance(path)
    if raw is None:
        return inst, None
    return inst, weights_from_entries(inst, raw)

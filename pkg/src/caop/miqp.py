"""MIQP model construction and LP-format export.

The model maximizes scaled correlated reward minus total route cost, subject
to service-once, clamped correlation, capacity, and per-robot routing
constraints (depot flow, flow conservation, flow limits, vertex symmetry).
Files use the CPLEX/Gurobi LP dialect; the quadratic objective block follows
the standard written-times-two, divided-by-two convention.  A bundled parser
reads the files back for structural verification.

Every numeric written to disk is quantized to 12 significant digits at model
build time, so a written file re-parses to bit-identical coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

from .correlation import WeightModel, q12
from .distances import DistanceTable
from .errors import IOFailure, NoPositiveReward, SchemaError
from .instance import Edge, Instance
from .routing import Solution

def _qq(x: float) -> float:
    """Quantize a quadratic coefficient through its doubled file form."""
    return q12(2.0 * x) / 2.0


def arc_tag(e: Edge, forward: bool) -> str:
    i, j = (e.tail, e.head) if forward else (e.head, e.tail)
    if e.is_loop:
        return f"{e.id}_{i}_{j}_{'f' if forward else 'r'}"
    return f"{e.id}_{i}_{j}"


def arc_var(prefix: str, k: int, e: Edge, forward: bool) -> str:
    """Deterministic variable name; k is the 1-based robot index.

    The edge id keeps names unique on multigraphs, and self-loop arcs carry an
    explicit direction tag since both directions share their endpoints.
    """
    return f"{prefix}_{k}_{arc_tag(e, forward)}"


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[str, float], ...]
    sense: str  # "<=", ">=", "="
    rhs: float


@dataclass
class MIQPModel:
    sense: str
    linear_obj: dict[str, float]
    quad_obj: dict[tuple[str, str], float]
    constraints: list[Constraint]
    binaries: list[str]
    generals: list[str]
    bounds: dict[str, tuple[float, float]]  # explicit lb/ub entries (continuous and fixed vars)
    lam: float | None = None
    linearized: bool = False

    @property
    def counts(self) -> dict[str, int]:
        """Census of variables by prefix and constraints by family."""
        out: dict[str, int] = {}
        for name in self.binaries + self.generals + list(self.bounds):
            prefix = name.split("_", 1)[0]
            key = f"var_{prefix}"
            out[key] = out.get(key, 0) + 1
        # bounds may repeat binaries (fixed vars); do not double count
        for name in self.bounds:
            if name in self.binaries or name in self.generals:
                prefix = name.split("_", 1)[0]
                out[f"var_{prefix}"] -= 1
        for c in self.constraints:
            key = f"con_{_family_of(c.name)}"
            out[key] = out.get(key, 0) + 1
        out["quad_terms"] = len(self.quad_obj)
        return out


_FAMILIES = ("flow_depot", "flow_cons", "flow_ub_total", "flow_ub_link",
             "sym", "once", "omega", "cap", "lin_w", "lin_s")


def _family_of(name: str) -> str:
    for fam in _FAMILIES:
        if name.startswith(fam + "_"):
            return fam
    return name


def _canon_terms(raw: list[tuple[str, float]], anchor: str) -> tuple[tuple[str, float], ...]:
    """Combine duplicate variables, drop exact zeros, keep build order."""
    acc: dict[str, float] = {}
    order: list[str] = []
    for name, coef in raw:
        if name not in acc:
            acc[name] = 0.0
            order.append(name)
        acc[name] += coef
    out = [(n, q12(acc[n])) for n in order if acc[n] != 0.0]
    if not out:
        out = [(anchor, 0.0)]
    return tuple(out)


def build_miqp(inst: Instance, wm: WeightModel, linearize: bool = False) -> MIQPModel:
    """Assemble the full program for an instance and weight model."""
    edges = inst.edges
    m = len(edges)
    if m == 0:
        raise SchemaError("cannot build a model without edges")
    positive = [e.reward for e in edges if e.reward > 0]
    if not positive:
        raise NoPositiveReward("scaling factor undefined: no edge has positive reward")
    lam = max(r.capacity for r in inst.robots) / min(positive)
    K = len(inst.robots)
    n = inst.n_vertices
    big_m = float(m)

    svar = {}
    dvar = {}
    zvar = {}
    binaries: list[str] = []
    generals: list[str] = []
    for k in range(1, K + 1):
        for e in edges:
            for fwd in (True, False):
                svar[(k, e.id, fwd)] = arc_var("s", k, e, fwd)
                dvar[(k, e.id, fwd)] = arc_var("d", k, e, fwd)
                zvar[(k, e.id, fwd)] = arc_var("z", k, e, fwd)
    for k in range(1, K + 1):
        for e in edges:
            binaries += [svar[(k, e.id, True)], svar[(k, e.id, False)]]
    for prefix_map in (dvar, zvar):
        for k in range(1, K + 1):
            for e in edges:
                generals += [prefix_map[(k, e.id, True)], prefix_map[(k, e.id, False)]]

    bounds: dict[str, tuple[float, float]] = {}
    for e in edges:
        bounds[f"w_{e.id}"] = (0.0, 1.0)
    if linearize:
        for e in edges:
            bounds[f"y_{e.id}"] = (0.0, 1.0)
    for k in range(1, K + 1):
        for e in edges:
            if e.deadhead_only:
                bounds[svar[(k, e.id, True)]] = (0.0, 0.0)
                bounds[svar[(k, e.id, False)]] = (0.0, 0.0)

    anchor = binaries[0]

    linear: dict[str, float] = {}
    quad: dict[tuple[str, str], float] = {}

    def add_lin(name: str, coef: float) -> None:
        linear[name] = linear.get(name, 0.0) + coef

    for k in range(1, K + 1):
        for e in edges:
            for fwd in (True, False):
                if e.reward > 0:
                    add_lin(svar[(k, e.id, fwd)], lam * e.reward)
                if e.service_cost != 0:
                    add_lin(svar[(k, e.id, fwd)], -e.service_cost)
                if e.deadhead_cost != 0:
                    add_lin(dvar[(k, e.id, fwd)], -e.deadhead_cost)
    for e in edges:
        if e.reward > 0:
            if linearize:
                add_lin(f"y_{e.id}", lam * e.reward)
            else:
                add_lin(f"w_{e.id}", lam * e.reward)
                for k in range(1, K + 1):
                    for fwd in (True, False):
                        quad[(f"w_{e.id}", svar[(k, e.id, fwd)])] = _qq(-lam * e.reward)

    linear = {name: q12(c) for name, c in linear.items() if c != 0.0}

    cons: list[Constraint] = []

    def add_con(name: str, terms: list[tuple[str, float]], sense: str, rhs: float) -> None:
        cons.append(Constraint(name, _canon_terms(terms, anchor), sense, q12(rhs)))

    # service at most once, over all robots and both directions
    for e in edges:
        terms = [(svar[(k, e.id, fwd)], 1.0) for k in range(1, K + 1) for fwd in (True, False)]
        add_con(f"once_{e.id}", terms, "<=", 1.0)

    # clamped correlation bound on omega
    for e in edges:
        terms: list[tuple[str, float]] = [(f"w_{e.id}", 1.0)]
        for ep in wm.neighbors(e.id):
            wgt = wm.w(ep, e.id)
            for k in range(1, K + 1):
                for fwd in (True, False):
                    terms.append((svar[(k, ep, fwd)], -wgt))
        add_con(f"omega_{e.id}", terms, "<=", 0.0)

    if linearize:
        for e in edges:
            add_con(f"lin_w_{e.id}", [(f"y_{e.id}", 1.0), (f"w_{e.id}", -1.0)], "<=", 0.0)
            terms = [(f"y_{e.id}", 1.0)]
            terms += [(svar[(k, e.id, fwd)], 1.0) for k in range(1, K + 1) for fwd in (True, False)]
            add_con(f"lin_s_{e.id}", terms, "<=", 1.0)

    # capacity per robot
    for k in range(1, K + 1):
        terms = []
        for e in edges:
            for fwd in (True, False):
                terms.append((svar[(k, e.id, fwd)], e.service_cost))
                terms.append((dvar[(k, e.id, fwd)], e.deadhead_cost))
        add_con(f"cap_{k}", terms, "<=", inst.robots[k - 1].capacity)

    # routing constraints per robot
    arcs = [(e, fwd) for e in edges for fwd in (True, False)]
    heads_at: dict[int, list[tuple[Edge, bool]]] = {v: [] for v in range(n)}
    tails_at: dict[int, list[tuple[Edge, bool]]] = {v: [] for v in range(n)}
    for e, fwd in arcs:
        i, j = (e.tail, e.head) if fwd else (e.head, e.tail)
        tails_at[i].append((e, fwd))
        heads_at[j].append((e, fwd))

    for k in range(1, K + 1):
        depot = inst.robots[k - 1].depot
        # flow released from the depot equals the number of serviced arcs
        terms = [(zvar[(k, e.id, fwd)], 1.0) for e, fwd in tails_at[depot]]
        terms += [(svar[(k, e.id, fwd)], -1.0) for e, fwd in arcs]
        add_con(f"flow_depot_{k}", terms, "=", 0.0)

        # every other vertex absorbs one unit per servicing arc entering it
        for v in range(n):
            if v == depot:
                continue
            terms = []
            for e, fwd in heads_at[v]:
                if not e.is_loop:
                    terms.append((zvar[(k, e.id, fwd)], 1.0))
            for e, fwd in tails_at[v]:
                if not e.is_loop:
                    terms.append((zvar[(k, e.id, fwd)], -1.0))
            for e, fwd in heads_at[v]:
                terms.append((svar[(k, e.id, fwd)], -1.0))
            add_con(f"flow_cons_{k}_{v}", terms, "=", 0.0)

        # flow limits: total serviced arcs, and the big-M link to arc usage
        for e, fwd in arcs:
            terms = [(zvar[(k, e.id, fwd)], 1.0)]
            terms += [(svar[(k, e2.id, f2)], -1.0) for e2, f2 in arcs]
            add_con(f"flow_ub_total_{k}_{arc_tag(e, fwd)}", terms, "<=", 0.0)
        for e, fwd in arcs:
            terms = [
                (zvar[(k, e.id, fwd)], 1.0),
                (svar[(k, e.id, fwd)], -big_m),
                (dvar[(k, e.id, fwd)], -big_m),
            ]
            add_con(f"flow_ub_link_{k}_{arc_tag(e, fwd)}", terms, "<=", 0.0)

        # as many arcs enter a vertex as leave it
        for v in range(n):
            terms = []
            for e, fwd in heads_at[v]:
                if e.is_loop:
                    continue
                terms.append((svar[(k, e.id, fwd)], 1.0))
                terms.append((dvar[(k, e.id, fwd)], 1.0))
            for e, fwd in tails_at[v]:
                if e.is_loop:
                    continue
                terms.append((svar[(k, e.id, fwd)], -1.0))
                terms.append((dvar[(k, e.id, fwd)], -1.0))
            add_con(f"sym_{k}_{v}", terms, "=", 0.0)

    return MIQPModel(
        sense="maximize",
        linear_obj=linear,
        quad_obj=quad,
        constraints=cons,
        binaries=binaries,
        generals=generals,
        bounds=bounds,
        lam=lam,
        linearized=linearize,
    )


# ---------------------------------------------------------------------------
# LP writing and parsing

def _fmt(c: float) -> str:
    return f"{c:+.12g}"


def _wrap_terms(parts: list[str], per_line: int = 6, indent: str = "  ") -> list[str]:
    lines = []
    for i in range(0, len(parts), per_line):
        lines.append(indent + " ".join(parts[i:i + per_line]))
    return lines


def write_lp(model: MIQPModel) -> str:
    lines = ["\\ CAOP model export", "Maximize"]
    parts = [f"{_fmt(c)} {name}" for name, c in model.linear_obj.items()]
    obj_lines = _wrap_terms(parts)
    if obj_lines:
        obj_lines[0] = " obj:" + obj_lines[0][1:]
    else:
        obj_lines = [" obj: +0 " + (model.binaries or model.generals)[0]]
    lines += obj_lines
    if model.quad_obj:
        qparts = [f"{_fmt(2.0 * c)} {a} * {b}" for (a, b), c in model.quad_obj.items()]
        lines.append("  + [")
        lines += _wrap_terms(qparts, indent="    ")
        lines.append("  ] / 2")
    lines.append("Subject To")
    for con in model.constraints:
        parts = [f"{_fmt(c)} {name}" for name, c in con.terms]
        body = _wrap_terms(parts)
        body[0] = f" {con.name}:" + body[0][1:]
        body[-1] += f" {con.sense} {con.rhs:.12g}"
        lines += body
    lines.append("Bounds")
    for name, (lb, ub) in model.bounds.items():
        if lb == ub:
            lines.append(f" {name} = {lb:.12g}")
        else:
            lines.append(f" {lb:.12g} <= {name} <= {ub:.12g}")
    lines.append("Binaries")
    lines += _wrap_terms(model.binaries, per_line=8, indent=" ")
    lines.append("Generals")
    lines += _wrap_terms(model.generals, per_line=8, indent=" ")
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_miqp(inst: Instance, wm: WeightModel, out_path, linearize: bool = False) -> MIQPModel:
    """Build the model and write it to ``out_path`` in LP format."""
    model = build_miqp(inst, wm, linearize=linearize)
    text = write_lp(model)
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOFailure(f"cannot write model file {out_path}: {exc}") from exc
    return model


_SENSES = ("<=", ">=", "=")


def parse_lp(text: str) -> MIQPModel:
    """Parse the LP dialect written by write_lp back into a model."""
    tokens_by_section: dict[str, list[str]] = {
        "objective": [], "constraints": [], "bounds": [], "binaries": [], "generals": [],
    }
    section = None
    for raw_line in text.splitlines():
        line = raw_line.strip()
        if not line or line.startswith("\\"):
            continue
        low = line.lower()
        if low == "maximize":
            section = "objective"
            continue
        if low == "subject to":
            section = "constraints"
            continue
        if low in ("bounds",):
            section = "bounds"
            continue
        if low in ("binaries", "binary"):
            section = "binaries"
            continue
        if low in ("generals", "general"):
            section = "generals"
            continue
        if low == "end":
            section = None
            continue
        if section is None:
            raise IOFailure(f"unexpected line outside any section: {line!r}")
        tokens_by_section[section].extend(line.split())

    linear, quad = _parse_objective(tokens_by_section["objective"])
    constraints = _parse_constraints(tokens_by_section["constraints"])
    bounds = _parse_bounds(tokens_by_section["bounds"])
    return MIQPModel(
        sense="maximize",
        linear_obj=linear,
        quad_obj=quad,
        constraints=constraints,
        binaries=tokens_by_section["binaries"],
        generals=tokens_by_section["generals"],
        bounds=bounds,
        lam=None,
        linearized=any(n.startswith("y_") for n in bounds),
    )


def _parse_objective(tokens: list[str]):
    if not tokens or tokens[0] != "obj:":
        raise IOFailure("objective must start with 'obj:'")
    linear: dict[str, float] = {}
    quad: dict[tuple[str, str], float] = {}
    i = 1
    n = len(tokens)
    while i < n:
        if tokens[i] == "+" and i + 1 < n and tokens[i + 1] == "[":
            i += 2
            while tokens[i] != "]":
                coef = float(tokens[i])
                a, star, b = tokens[i + 1], tokens[i + 2], tokens[i + 3]
                if star != "*":
                    raise IOFailure("quadratic terms must be written as coef a * b")
                quad[(a, b)] = coef / 2.0
                i += 4
            if tokens[i + 1] != "/" or tokens[i + 2] != "2":
                raise IOFailure("quadratic block must end with '] / 2'")
            i += 3
        else:
            coef = float(tokens[i])
            name = tokens[i + 1]
            linear[name] = linear.get(name, 0.0) + coef
            i += 2
    linear = {k: v for k, v in linear.items() if v != 0.0}
    return linear, quad


def _parse_constraints(tokens: list[str]) -> list[Constraint]:
    out: list[Constraint] = []
    i = 0
    n = len(tokens)
    while i < n:
        label = tokens[i]
        if not label.endswith(":"):
            raise IOFailure(f"expected constraint label, got {label!r}")
        name = label[:-1]
        terms: list[tuple[str, float]] = []
        i += 1
        while tokens[i] not in _SENSES:
            terms.append((tokens[i + 1], float(tokens[i])))
            i += 2
        sense = tokens[i]
        rhs = float(tokens[i + 1])
        i += 2
        out.append(Constraint(name, tuple(terms), sense, rhs))
    return out


def _parse_bounds(tokens: list[str]) -> dict[str, tuple[float, float]]:
    out: dict[str, tuple[float, float]] = {}
    i = 0
    n = len(tokens)
    while i < n:
        if i + 2 < n and tokens[i + 1] == "=":
            val = float(tokens[i + 2])
            out[tokens[i]] = (val, val)
            i += 3
        elif i + 4 < n and tokens[i + 1] == "<=" and tokens[i + 3] == "<=":
            out[tokens[i + 2]] = (float(tokens[i]), float(tokens[i + 4]))
            i += 5
        else:
            raise IOFailure(f"malformed bounds entry near {tokens[i:i + 5]!r}")
    return out


# ---------------------------------------------------------------------------
# Substituting concrete solutions into the model

def objective_value(model: MIQPModel, assignment: dict[str, float]) -> float:
    """Evaluate the model objective at a variable assignment (missing vars = 0)."""
    total = 0.0
    for name, c in model.linear_obj.items():
        total += c * assignment.get(name, 0.0)
    for (a, b), c in model.quad_obj.items():
        total += c * assignment.get(a, 0.0) * assignment.get(b, 0.0)
    return total


def solution_assignment(inst: Instance, dist: DistanceTable, wm: WeightModel,
                        sol: Solution, linearize: bool = False) -> dict[str, float]:
    """Variable values realized by a solution: s from the service arcs, d from
    the shortest-connector walks, omega at its optimal clamp, y likewise."""
    # map traversable vertex pairs to the cheapest deadhead edge (lowest id wins ties)
    best_pair: dict[tuple[int, int], Edge] = {}
    for e in sorted(inst.edges, key=lambda e: e.id):
        if e.is_loop:
            continue
        for pair in ((e.tail, e.head), (e.head, e.tail)):
            cur = best_pair.get(pair)
            if cur is None or e.deadhead_cost < cur.deadhead_cost:
                best_pair[pair] = e

    assign: dict[str, float] = {}
    serviced: set[int] = set()
    for k, route in enumerate(sol.routes, start=1):
        pts = [route.depot]
        for a in route.arcs:
            e = inst.edge(a.edge)
            serviced.add(e.id)
            assign[arc_var("s", k, e, a.forward)] = 1.0
            s, h = a.endpoints(inst)
            pts += [s, h]
        pts.append(route.depot)
        for idx in range(0, len(pts) - 1, 2):
            walk = dist.path(pts[idx], pts[idx + 1])
            for u, v in zip(walk, walk[1:]):
                e = best_pair[(u, v)]
                name = arc_var("d", k, e, (u, v) == (e.tail, e.head))
                assign[name] = assign.get(name, 0.0) + 1.0

    for e in inst.edges:
        cov = 0.0
        for ep in wm.neighbors(e.id):
            if ep in serviced:
                cov += wm.w(ep, e.id)
        omega = min(1.0, cov)
        assign[f"w_{e.id}"] = omega
        if linearize:
            assign[f"y_{e.id}"] = min(omega, 0.0 if e.id in serviced else 1.0)
    return assign

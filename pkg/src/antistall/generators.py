"""Combinatorial and pathological LP generators with brute-force certificates.

Families:

* bipartite matching (node-edge incidence, rows "<= 1");
* fractional matching / vertex cover / edge cover / stable set on general
  graphs (the half-integral relaxations);
* stable marriage (matching rows plus one blocking-pair row per edge);
* unit-capacity flows (max flow, min cost flow, circulation);
* pathological fixtures: the Klee-Minty cube, the classic 3-row/7-column
  cycling example, and a maximally degenerate pyramid whose apex sits on 2d
  facets and is not optimal (the stress case for the antistalling rule).

Generators are pure in (parameters, seed): identical calls produce identical
GeneralLPs, so written MPS files are byte-identical.  The companion
brute-force helpers (matching via augmenting paths, cut enumeration,
deferred acceptance, circulation enumeration) are certificate oracles that
never touch the simplex code.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .lp_model import EQ, GE, LE, GeneralLP

FLOW_KINDS = ("max_flow", "min_cost_flow", "circulation")
FRACTIONAL_VARIANTS = ("matching", "vertex_cover", "edge_cover", "stable_set")
PATHOLOGICAL_KINDS = ("klee_minty", "beale_cycle", "degenerate_pyramid")

MAX_DIMENSION = 12


@dataclass
class Certificate:
    """Structural ground truth shipped alongside a generated instance."""

    family: str
    params: dict
    known_optimum: Fraction | None = None   # in the instance's original sense
    notes: str = ""
    data: dict = field(default_factory=dict)


# -- graph scaffolding -------------------------------------------------------


def _bipartite_edges(n_left: int, n_right: int, density: float, seed: int):
    rng = random.Random(seed)
    return [(i, j) for i in range(n_left) for j in range(n_right)
            if rng.random() < density]


def _graph_edges(n_nodes: int, density: float, seed: int):
    rng = random.Random(seed)
    return [(i, j) for i in range(n_nodes) for j in range(i + 1, n_nodes)
            if rng.random() < density]


def _arcs(n_nodes: int, seed: int, density: float = 0.5):
    rng = random.Random(seed)
    return [(i, j) for i in range(n_nodes) for j in range(n_nodes)
            if i != j and rng.random() < density]


# -- bipartite matching ------------------------------------------------------


def gen_bipartite_matching(n_left: int, n_right: int, edge_density: float = 1.0,
                           seed: int = 0) -> GeneralLP:
    """max 1.x over A'x <= 1, x >= 0 with A' a bipartite node-edge incidence."""
    if n_left < 1 or n_right < 1:
        raise ValueError("both sides need at least one node")
    edges = _bipartite_edges(n_left, n_right, edge_density, seed)
    if not edges:
        raise ValueError("zero edges: increase density or change the seed")
    n = len(edges)
    rows = []
    row_names = []
    for i in range(n_left):
        rows.append([Fraction(1 if e[0] == i else 0) for e in edges])
        row_names.append(f"L{i}")
    for j in range(n_right):
        rows.append([Fraction(1 if e[1] == j else 0) for e in edges])
        row_names.append(f"R{j}")
    return GeneralLP(
        sense="max",
        objective=[Fraction(1)] * n,
        row_coeffs=rows,
        row_relations=[LE] * len(rows),
        row_rhs=[Fraction(1)] * len(rows),
        col_names=[f"xL{i}R{j}" for i, j in edges],
        row_names=row_names,
        name=f"bipmatch_{n_left}x{n_right}_s{seed}",
    )


def kuhn_matching(n_left: int, n_right: int, edges) -> int:
    """Maximum bipartite matching size via augmenting paths."""
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
    match_right: dict[int, int] = {}

    def augment(u, visited):
        for v in adj.get(u, ()):
            if v in visited:
                continue
            visited.add(v)
            if v not in match_right or augment(match_right[v], visited):
                match_right[v] = u
                return True
        return False

    size = 0
    for u in range(n_left):
        if augment(u, set()):
            size += 1
    return size


# -- fractional relaxations on general graphs --------------------------------


def gen_fractional_matching(n_nodes: int, edge_density: float = 0.5, seed: int = 0,
                            variant: str = "matching") -> GeneralLP:
    """Half-integral incidence LPs on a random (generally non-bipartite) graph."""
    if variant not in FRACTIONAL_VARIANTS:
        raise ValueError(f"variant must be one of {FRACTIONAL_VARIANTS}")
    if n_nodes < 2:
        raise ValueError("need at least two nodes")
    edges = _graph_edges(n_nodes, edge_density, seed)
    if not edges:
        raise ValueError("zero edges: increase density or change the seed")
    covered = {v for e in edges for v in e}
    if variant == "edge_cover" and len(covered) < n_nodes:
        isolated = sorted(set(range(n_nodes)) - covered)
        raise ValueError(f"isolated node(s) {isolated}: edge cover infeasible")

    name = f"frac_{variant}_{n_nodes}_s{seed}"
    if variant in ("matching", "edge_cover"):
        n = len(edges)
        rows = [[Fraction(1 if v in e else 0) for e in edges] for v in range(n_nodes)]
        row_names = [f"N{v}" for v in range(n_nodes)]
        col_names = [f"x{u}_{v}" for u, v in edges]
        if variant == "matching":
            sense, rel = "max", LE
        else:
            sense, rel = "min", GE
        return GeneralLP(sense=sense, objective=[Fraction(1)] * n,
                         row_coeffs=rows, row_relations=[rel] * n_nodes,
                         row_rhs=[Fraction(1)] * n_nodes,
                         col_names=col_names, row_names=row_names, name=name)

    # node variables, one row per edge
    rows = [[Fraction(1 if v in (u, w) else 0) for v in range(n_nodes)]
            for u, w in edges]
    row_names = [f"E{u}_{w}" for u, w in edges]
    col_names = [f"x{v}" for v in range(n_nodes)]
    if variant == "vertex_cover":
        sense, rel = "min", GE
    else:
        sense, rel = "max", LE
    return GeneralLP(sense=sense, objective=[Fraction(1)] * n_nodes,
                     row_coeffs=rows, row_relations=[rel] * len(edges),
                     row_rhs=[Fraction(1)] * len(edges),
                     col_names=col_names, row_names=row_names, name=name)


# -- stable marriage ----------------------------------------------------------


def gen_stable_marriage(preference_lists) -> GeneralLP:
    """The exact stable-matching LP: matching rows plus blocking-pair rows.

    ``preference_lists`` is a pair (left_prefs, right_prefs) of strict,
    possibly partial preference lists; the instance's edges are the mutually
    acceptable pairs.  An edge {u, v} yields the row

        x_uv + sum over w preferred to v by u of x_uw
             + sum over w preferred to u by v of x_vw  >= 1

    which forbids {u, v} from blocking.  The objective maximizes total
    preference satisfaction of the left side, whose unique optimum is the
    left-optimal stable matching (the deferred-acceptance outcome).
    """
    left_prefs, right_prefs = preference_lists
    for prefs in (left_prefs, right_prefs):
        for lst in prefs:
            if len(set(lst)) != len(lst):
                raise ValueError("non-strict preferences rejected")
    edges = [(u, v) for u in range(len(left_prefs)) for v in left_prefs[u]
             if u in right_prefs[v]]
    if not edges:
        raise ValueError("no mutually acceptable pairs")
    col_of = {e: k for k, e in enumerate(edges)}
    n = len(edges)

    rows, relations, rhs, row_names = [], [], [], []
    for u in range(len(left_prefs)):
        rows.append([Fraction(1 if e[0] == u else 0) for e in edges])
        relations.append(LE)
        rhs.append(Fraction(1))
        row_names.append(f"M{u}")
    for v in range(len(right_prefs)):
        rows.append([Fraction(1 if e[1] == v else 0) for e in edges])
        relations.append(LE)
        rhs.append(Fraction(1))
        row_names.append(f"W{v}")
    for u, v in edges:
        row = [Fraction(0)] * n
        row[col_of[(u, v)]] += 1
        for w in left_prefs[u]:
            if w == v:
                break
            if (u, w) in col_of:
                row[col_of[(u, w)]] += 1
        for w in right_prefs[v]:
            if w == u:
                break
            if (w, v) in col_of:
                row[col_of[(w, v)]] += 1
        rows.append(row)
        relations.append(GE)
        rhs.append(Fraction(1))
        row_names.append(f"B{u}_{v}")

    weights = [Fraction(len(left_prefs[u]) - left_prefs[u].index(v))
               for u, v in edges]
    return GeneralLP(sense="max", objective=weights, row_coeffs=rows,
                     row_relations=relations, row_rhs=rhs,
                     col_names=[f"x{u}_{v}" for u, v in edges],
                     row_names=row_names,
                     name=f"marriage_{len(left_prefs)}x{len(right_prefs)}")


def deferred_acceptance(left_prefs, right_prefs) -> dict[int, int]:
    """Left-proposing deferred acceptance; returns the left-optimal matching."""
    rank = [{u: k for k, u in enumerate(lst)} for lst in right_prefs]
    next_choice = [0] * len(left_prefs)
    engaged: dict[int, int] = {}    # right node -> left node
    free = [u for u in range(len(left_prefs)) if left_prefs[u]]
    while free:
        u = free.pop()
        while next_choice[u] < len(left_prefs[u]):
            v = left_prefs[u][next_choice[u]]
            next_choice[u] += 1
            if u not in rank[v]:
                continue
            if v not in engaged:
                engaged[v] = u
                break
            rival = engaged[v]
            if rank[v][u] < rank[v][rival]:
                engaged[v] = u
                free.append(rival)
                break
    return {u: v for v, u in engaged.items()}


def marriage_weight(left_prefs, matching: dict[int, int]) -> Fraction:
    """Total left-side satisfaction of a matching under the LP's weights."""
    total = Fraction(0)
    for u, v in matching.items():
        total += len(left_prefs[u]) - left_prefs[u].index(v)
    return total


# -- unit-capacity flows -------------------------------------------------------


def gen_unit_flow(kind: str, n_nodes: int, seed: int = 0) -> GeneralLP:
    """Node-arc incidence LPs with unit capacities expressed as bounds."""
    if kind not in FLOW_KINDS:
        raise ValueError(f"kind must be one of {FLOW_KINDS}")
    if n_nodes < 2:
        raise ValueError("need at least two nodes")
    arcs = _arcs(n_nodes, seed)
    if not arcs:
        raise ValueError("zero arcs: change the seed")
    s, t = 0, n_nodes - 1
    if kind == "max_flow" and not _reachable(n_nodes, arcs, s, t):
        raise ValueError("disconnected source/sink")
    if kind == "min_cost_flow" and not _reachable(n_nodes, arcs, s, t):
        raise ValueError("disconnected source/sink")

    n = len(arcs)
    rng = random.Random(seed + 7919)    # offset keeps costs independent of topology draw
    col_names = [f"f{u}_{v}" for u, v in arcs]

    def conservation_row(v):
        return [Fraction((1 if a[0] == v else 0) - (1 if a[1] == v else 0))
                for a in arcs]

    if kind == "max_flow":
        rows = [conservation_row(v) for v in range(n_nodes) if v not in (s, t)]
        row_names = [f"C{v}" for v in range(n_nodes) if v not in (s, t)]
        objective = [Fraction((1 if a[1] == t else 0) - (1 if a[0] == t else 0))
                     for a in arcs]
        sense = "max"
        rhs = [Fraction(0)] * len(rows)
    elif kind == "min_cost_flow":
        rows = [conservation_row(v) for v in range(n_nodes)]
        row_names = [f"C{v}" for v in range(n_nodes)]
        rhs = [Fraction(1 if v == s else -1 if v == t else 0)
               for v in range(n_nodes)]
        objective = [Fraction(rng.randint(1, 10)) for _ in arcs]
        sense = "min"
    else:   # circulation
        rows = [conservation_row(v) for v in range(n_nodes)]
        row_names = [f"C{v}" for v in range(n_nodes)]
        rhs = [Fraction(0)] * n_nodes
        objective = [Fraction(rng.randint(-10, 10)) for _ in arcs]
        sense = "min"

    return GeneralLP(sense=sense, objective=objective, row_coeffs=rows,
                     row_relations=[EQ] * len(rows), row_rhs=rhs,
                     upper=[Fraction(1)] * n,
                     col_names=col_names, row_names=row_names,
                     name=f"{kind}_{n_nodes}_s{seed}")


def _reachable(n_nodes, arcs, s, t) -> bool:
    seen = {s}
    frontier = [s]
    while frontier:
        u = frontier.pop()
        for a, b in arcs:
            if a == u and b not in seen:
                seen.add(b)
                frontier.append(b)
    return t in seen


def min_cut_value(n_nodes: int, arcs, s: int, t: int) -> int:
    """Minimum s-t cut of a unit-capacity digraph by subset enumeration."""
    best = None
    others = [v for v in range(n_nodes) if v not in (s, t)]
    for mask in range(1 << len(others)):
        side = {s}
        for k, v in enumerate(others):
            if mask >> k & 1:
                side.add(v)
        cut = sum(1 for u, v in arcs if u in side and v not in side)
        if best is None or cut < best:
            best = cut
    return best


def cheapest_unit_path(n_nodes: int, arcs, costs, s: int, t: int):
    """Bellman-Ford shortest path cost (positive costs, so simple paths win)."""
    dist = {s: Fraction(0)}
    for _ in range(n_nodes):
        for (u, v), c in zip(arcs, costs):
            if u in dist and (v not in dist or dist[u] + c < dist[v]):
                dist[v] = dist[u] + c
    return dist.get(t)


def min_cost_circulation_brute(arcs, costs) -> Fraction:
    """Cheapest unit-capacity circulation by enumerating balanced arc subsets."""
    best = Fraction(0)   # the zero circulation
    n = len(arcs)
    for mask in range(1, 1 << n):
        balance: dict[int, int] = {}
        cost = Fraction(0)
        for k in range(n):
            if mask >> k & 1:
                u, v = arcs[k]
                balance[u] = balance.get(u, 0) + 1
                balance[v] = balance.get(v, 0) - 1
                cost += costs[k]
        if all(b == 0 for b in balance.values()) and cost < best:
            best = cost
    return best


# -- pathological fixtures -------------------------------------------------------


def gen_pathological(kind: str, d: int | None = None) -> GeneralLP:
    """Klee-Minty cube, the classic cycling example, or a degenerate pyramid."""
    if kind not in PATHOLOGICAL_KINDS:
        raise ValueError(f"kind must be one of {PATHOLOGICAL_KINDS}")
    if kind == "beale_cycle":
        return _beale_cycle()
    if d is None:
        raise ValueError(f"{kind} needs a dimension d")
    if not 2 <= d <= MAX_DIMENSION:
        raise ValueError(f"d must be between 2 and {MAX_DIMENSION}")
    if kind == "klee_minty":
        return _klee_minty(d)
    return _degenerate_pyramid(d)


def _klee_minty(d: int) -> GeneralLP:
    rows = []
    rhs = []
    for i in range(d):
        row = [Fraction(0)] * d
        for j in range(i):
            row[j] = Fraction(2 ** (i - j + 1))
        row[i] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(5 ** (i + 1)))
    return GeneralLP(
        sense="max",
        objective=[Fraction(2 ** (d - 1 - j)) for j in range(d)],
        row_coeffs=rows, row_relations=[LE] * d, row_rhs=rhs,
        col_names=[f"x{j}" for j in range(d)],
        row_names=[f"r{i}" for i in range(d)],
        name=f"klee_minty_{d}",
    )


def _beale_cycle() -> GeneralLP:
    F = Fraction
    rows = [
        [F(1, 4), F(-60), F(-1, 25), F(9), F(1), F(0), F(0)],
        [F(1, 2), F(-90), F(-1, 50), F(3), F(0), F(1), F(0)],
        [F(0), F(0), F(1), F(0), F(0), F(0), F(1)],
    ]
    return GeneralLP(
        sense="min",
        objective=[F(-3, 4), F(150), F(-1, 50), F(6), F(0), F(0), F(0)],
        row_coeffs=rows, row_relations=[EQ] * 3,
        row_rhs=[F(0), F(0), F(1)],
        col_names=[f"x{j}" for j in range(7)],
        row_names=["r0", "r1", "r2"],
        name="beale_cycle",
    )


def _degenerate_pyramid(d: int) -> GeneralLP:
    """A d-simplex whose apex e_d is made to lie on 2d facets.

    Rows: the main facet (sum of all coordinates <= 1), one redundant plane
    u_j + u_apex <= 1 per base coordinate (tight at the apex, loose on the
    base), and u_apex <= 1.  The objective rewards base coordinates only, so
    the apex is feasible, maximally degenerate, and not optimal.
    """
    apex = d - 1
    rows = [[Fraction(1)] * d]
    row_names = ["main"]
    for j in range(d - 1):
        row = [Fraction(0)] * d
        row[j] = Fraction(1)
        row[apex] = Fraction(1)
        rows.append(row)
        row_names.append(f"t{j}")
    cap = [Fraction(0)] * d
    cap[apex] = Fraction(1)
    rows.append(cap)
    row_names.append("cap")
    weights = [Fraction(1 + (j % 9)) for j in range(d - 1)] + [Fraction(0)]
    return GeneralLP(
        sense="max", objective=weights, row_coeffs=rows,
        row_relations=[LE] * (d + 1), row_rhs=[Fraction(1)] * (d + 1),
        col_names=[f"u{j}" for j in range(d)],
        row_names=row_names,
        name=f"degenerate_pyramid_{d}",
    )


# -- the instance factory ----------------------------------------------------------


def make_instance(family: str, **params):
    """Build (GeneralLP, Certificate) for a named family.

    The certificate carries whatever ground truth the family's brute-force
    helper can supply: optima for matchings/flows/marriage, the known pivot
    path length for the Klee-Minty cube, apex facts for the pyramid.
    """
    if family == "bipartite_matching":
        p = {"n_left": 3, "n_right": 3, "edge_density": 1.0, "seed": 0, **params}
        lp = gen_bipartite_matching(**p)
        edges = _bipartite_edges(p["n_left"], p["n_right"], p["edge_density"], p["seed"])
        opt = Fraction(kuhn_matching(p["n_left"], p["n_right"], edges))
        return lp, Certificate(family=family, params=p, known_optimum=opt,
                               notes="optimum equals the maximum matching size")
    if family == "fractional_matching":
        p = {"n_nodes": 5, "edge_density": 0.5, "seed": 0, "variant": "matching",
             **params}
        lp = gen_fractional_matching(**p)
        return lp, Certificate(family=family, params=p,
                               notes="vertices are half-integral")
    if family == "stable_marriage":
        p = {"preference_lists": params.get(
            "preference_lists", ([[0, 1], [1, 0]], [[1, 0], [0, 1]]))}
        lp = gen_stable_marriage(p["preference_lists"])
        left, right = p["preference_lists"]
        matching = deferred_acceptance(left, right)
        opt = marriage_weight(left, matching)
        return lp, Certificate(family=family, params={"pairs": sorted(matching.items())},
                               known_optimum=opt,
                               notes="optimum attained by the deferred-acceptance matching")
    if family == "unit_flow":
        p = {"kind": "max_flow", "n_nodes": 4, "seed": 0, **params}
        lp = gen_unit_flow(**p)
        arcs = _arcs(p["n_nodes"], p["seed"])
        cert = Certificate(family=family, params=p)
        if p["kind"] == "max_flow":
            cert.known_optimum = Fraction(
                min_cut_value(p["n_nodes"], arcs, 0, p["n_nodes"] - 1))
            cert.notes = "optimum equals the minimum cut"
        elif p["kind"] == "min_cost_flow":
            rng = random.Random(p["seed"] + 7919)
            costs = [Fraction(rng.randint(1, 10)) for _ in arcs]
            cert.known_optimum = cheapest_unit_path(
                p["n_nodes"], arcs, costs, 0, p["n_nodes"] - 1)
            cert.notes = "optimum equals the cheapest unit path"
        else:
            rng = random.Random(p["seed"] + 7919)
            costs = [Fraction(rng.randint(-10, 10)) for _ in arcs]
            cert.known_optimum = min_cost_circulation_brute(arcs, costs)
            cert.notes = "optimum equals the cheapest unit circulation"
        return lp, cert
    if family in PATHOLOGICAL_KINDS:
        d = params.get("d")
        lp = gen_pathological(family, d=d)
        cert = Certificate(family=family, params={"d": d} if d else {})
        if family == "klee_minty":
            cert.known_optimum = Fraction(5 ** d)
            cert.data["dantzig_pivots"] = 2 ** d - 1
            cert.notes = "Dantzig from the slack basis visits all 2^d vertices"
        elif family == "degenerate_pyramid":
            cert.known_optimum = max(Fraction(1 + (j % 9)) for j in range(d - 1))
            cert.data["apex_tight_facets"] = 2 * d
            cert.notes = "apex is feasible, lies on 2d facets, and is not optimal"
        else:
            cert.notes = "cycles under Dantzig with smallest-index ties"
        return lp, cert
    raise ValueError(f"unknown family {family!r}")

"""Self-contained JSON-lines run logs: header with the LP, one pivot per line.

A log written by ``write_run_log`` carries everything ``checks.check_run``
needs to replay the run: the standard-form LP, the numeric mode, the initial
basis, presolve data for guided runs, and the per-pivot records.  Rational
scalars serialize as "p/q" strings, floats as numbers.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .lp_model import Basis, StandardLP
from .scalars import RATIONAL, as_fraction, fraction_str
from .simplex_core import PivotRecord, PresolveInfo, SolveResult


def _enc(value, exact: bool):
    if value is None:
        return None
    if exact:
        return fraction_str(value)
    return float(value)


def _enc_vec(vec, exact: bool):
    if vec is None:
        return None
    return [_enc(v, exact) for v in vec]


def _dec(value, exact: bool):
    if value is None:
        return None
    return as_fraction(value) if exact else float(value)


def _dec_vec(vec, exact: bool):
    if vec is None:
        return None
    return tuple(_dec(v, exact) for v in vec)


def write_run_log(path, lp: StandardLP, result: SolveResult):
    exact = result.numeric == RATIONAL
    header = {
        "kind": "header",
        "name": lp.name,
        "numeric": result.numeric,
        "rule": result.rule,
        "guide": result.guide,
        "status": result.status,
        "objective": _enc(result.objective, exact),
        "x": _enc_vec(result.x, exact),
        "initial_basis": list(result.initial_basis.order) if result.initial_basis else None,
        "final_basis": list(result.basis.order) if result.basis else None,
        "counters": {
            "pivots_total": result.pivots_total,
            "pivots_degenerate": result.pivots_degenerate,
            "max_consec_degenerate": result.max_consec_degenerate,
            "finisher_pivots": result.finisher_pivots,
            "distinct_vertices": result.distinct_vertices,
        },
        "presolve": None if result.presolve is None else {
            "x_star": _enc_vec(result.presolve.x_star, exact),
            "basis_star": list(result.presolve.basis_star.order),
            "objective_star": _enc(result.presolve.objective_star, exact),
            "rule": result.presolve.rule,
            "pivots": result.presolve.pivots,
        },
        "lp": {
            "A": [[fraction_str(v) for v in row] for row in lp.A],
            "b": [fraction_str(v) for v in lp.b],
            "c": [fraction_str(v) for v in lp.c],
            "provenance": lp.provenance,
        },
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for rec in result.log:
            fh.write(json.dumps({
                "kind": "pivot",
                "iteration": rec.iteration,
                "entering": rec.entering,
                "leaving": rec.leaving,
                "case": rec.case,
                "degenerate": rec.degenerate,
                "theta": _enc(rec.theta, exact),
                "objective": _enc(rec.objective, exact),
                "vertex_index": rec.vertex_index,
                "q2_after": rec.q2_after,
                "direction": _enc_vec(rec.direction, exact),
                "direction_cost": _enc(rec.direction_cost, exact),
                "alpha": _enc(rec.alpha, exact),
                "reroute_g": rec.reroute_g,
            }) + "\n")


def read_run_log(path):
    """Load a run log; returns (StandardLP, SolveResult)."""
    with open(path) as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("kind") != "header":
        raise ValueError(f"{path}: not a run log (missing header line)")
    head = lines[0]
    exact = head["numeric"] == RATIONAL

    lp = StandardLP(
        A=[[as_fraction(v) for v in row] for row in head["lp"]["A"]],
        b=[as_fraction(v) for v in head["lp"]["b"]],
        c=[as_fraction(v) for v in head["lp"]["c"]],
        provenance=head["lp"]["provenance"],
        name=head.get("name", "LP"),
    )
    presolve = None
    if head.get("presolve"):
        p = head["presolve"]
        presolve = PresolveInfo(
            x_star=_dec_vec(p["x_star"], exact),
            basis_star=Basis(tuple(p["basis_star"])),
            objective_star=_dec(p["objective_star"], exact),
            rule=p["rule"],
            pivots=p["pivots"],
        )
    log = []
    for entry in lines[1:]:
        if entry.get("kind") != "pivot":
            continue
        log.append(PivotRecord(
            iteration=entry["iteration"],
            entering=entry["entering"],
            leaving=entry["leaving"],
            case=entry["case"],
            degenerate=entry["degenerate"],
            theta=_dec(entry["theta"], exact),
            objective=_dec(entry["objective"], exact),
            vertex_index=entry["vertex_index"],
            q2_after=entry.get("q2_after"),
            direction=_dec_vec(entry.get("direction"), exact),
            direction_cost=_dec(entry.get("direction_cost"), exact),
            alpha=_dec(entry.get("alpha"), exact),
            reroute_g=entry.get("reroute_g"),
        ))
    counters = head.get("counters", {})
    result = SolveResult(
        status=head["status"],
        rule=head["rule"],
        numeric=head["numeric"],
        objective=_dec(head.get("objective"), exact),
        x=_dec_vec(head.get("x"), exact),
        basis=Basis(tuple(head["final_basis"])) if head.get("final_basis") else None,
        initial_basis=(Basis(tuple(head["initial_basis"]))
                       if head.get("initial_basis") else None),
        log=log,
        pivots_total=counters.get("pivots_total", len(log)),
        pivots_degenerate=counters.get("pivots_degenerate", 0),
        max_consec_degenerate=counters.get("max_consec_degenerate", 0),
        finisher_pivots=counters.get("finisher_pivots", 0),
        distinct_vertices=counters.get("distinct_vertices", 0),
        presolve=presolve,
        guide=head.get("guide"),
    )
    return lp, result

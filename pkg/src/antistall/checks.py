"""Post-hoc audit of run logs against every claimed run property.

``check_run`` replays a recorded run from its initial basis, refactorizing
from scratch at every step (so the audit does not inherit the solver's
incremental factorization path), and verifies:

* bookkeeping: recorded objectives, steps, and the degenerate flag;
* objective monotonicity (strict exactly at non-degenerate pivots) and
  feasibility of every visited basis;
* for antistalling runs: the per-vertex degenerate streak caps, the exact
  -1 per pivot descent of |Q2| inside a streak, the Case III -> II coupling
  (the rerouted direction vanishes at the leaving index and the tableau entry
  is positive, at the same basis), the direction-cost monotonicity inside a
  streak and the persistence of nonbasic support values across it, the
  optimality-gap contraction at vertex changes when the instance's extreme
  coordinates are supplied, and the finisher budget of n - m pivots;
* for Bland runs: no basis ever repeats.

Violations are data, not exceptions: an empty list is a clean run.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .basis_engine import BasisEngine
from .lp_model import Basis, StandardLP
from .pivot_rules import CASE_CLASSIC, CASE_FINISHER, CASE_I, CASE_II, CASE_III_II
from .scalars import RATIONAL

_KNOWN_CASES = {CASE_CLASSIC, CASE_FINISHER, CASE_I, CASE_II, CASE_III_II}
_DEGENERATE_CASES = {CASE_II, CASE_III_II}


@dataclass
class Violation:
    pivot: int | None
    claim: str
    detail: str

    def __str__(self):
        where = f"pivot {self.pivot}" if self.pivot is not None else "run"
        return f"[{self.claim}] {where}: {self.detail}"


def check_run(lp: StandardLP, result, Delta=None, delta=None) -> list[Violation]:
    """Audit one SolveResult (or a log reloaded from disk) against the LP."""
    violations: list[Violation] = []
    if result.initial_basis is None:
        if result.log:
            violations.append(Violation(None, "log", "records without an initial basis"))
        return violations

    numeric = result.numeric
    exact = numeric == RATIONAL
    antistalling = result.rule == "antistalling"
    guided = antistalling and getattr(result, "guide", "optimal") == "optimal"

    engine = BasisEngine(lp, numeric=numeric)
    engine.set_basis(result.initial_basis)
    tols = engine.tols

    def close(a, b, scale=1.0):
        if exact:
            return a == b
        return abs(float(a) - float(b)) <= tols.base * (scale + abs(float(b)))

    basis = result.initial_basis
    sol = engine.basic_solution()
    x = list(sol.x)
    objective = lp.objective_value(x)
    if not sol.feasible:
        violations.append(Violation(None, "feasibility", "initial basis infeasible"))

    z_star = result.presolve.objective_star if result.presolve else None
    lam = None
    if Delta is not None and delta is not None and delta > 0 and lp.n > lp.m:
        lam = Fraction(lp.n - lp.m) * Fraction(Delta) / Fraction(delta) if exact \
            else (lp.n - lp.m) * float(Delta) / float(delta)

    cap_plain = lp.n - lp.m - 1
    cap_guided = min(cap_plain, lp.m - 1)
    seen_bases = {basis.members}
    repeat_found = False

    streak: list[dict] = []     # per degenerate record: replay data for lemma checks
    streak_len = 0
    finisher_seen = False
    finisher_count = 0

    for rec in result.log:
        if rec.case not in _KNOWN_CASES:
            violations.append(Violation(rec.iteration, "log",
                                        f"unknown case label {rec.case!r}"))
            continue
        if antistalling and rec.case == CASE_CLASSIC:
            violations.append(Violation(rec.iteration, "log",
                                        "classic record inside an antistalling run"))
        if finisher_seen and rec.case != CASE_FINISHER:
            violations.append(Violation(rec.iteration, "finisher",
                                        "non-finisher pivot after the finisher began"))

        if rec.entering in basis.members or rec.leaving not in basis.members:
            violations.append(Violation(rec.iteration, "log",
                                        "entering/leaving do not match the basis"))
            break

        col = engine.tableau_column(rec.entering)
        position = basis.position(rec.leaving)
        entry = col[position]
        theta = x[rec.leaving] / entry if (entry != 0 if exact else
                                           abs(entry) > tols.pivot) else None
        if theta is None:
            violations.append(Violation(rec.iteration, "pivot",
                                        "pivot element is zero on replay"))
            break
        if not exact and theta < 0:
            theta = 0.0
        if not close(theta, rec.theta):
            violations.append(Violation(rec.iteration, "log",
                                        f"recorded step {rec.theta}, replayed {theta}"))
        degenerate = theta == 0 if exact else theta <= tols.x_zero
        if degenerate != rec.degenerate:
            violations.append(Violation(rec.iteration, "log",
                                        "degenerate flag contradicts the step length"))

        # antistalling structural checks at the pre-pivot basis
        if rec.case in _DEGENERATE_CASES:
            q2_prev = len(streak[-1]["q2_after"]) if streak else None
            info = _audit_degenerate(lp, engine, basis, x, rec, col, position,
                                     exact, tols, violations)
            if info is not None:
                if info["q2_before"] is not None:
                    expected = len(info["q2_before"]) - 1
                    if rec.q2_after is not None and rec.q2_after != expected:
                        violations.append(Violation(
                            rec.iteration, "q2-descent",
                            f"|Q2| should be {expected}, recorded {rec.q2_after}"))
                    if q2_prev is not None and len(info["q2_before"]) != q2_prev:
                        violations.append(Violation(
                            rec.iteration, "q2-descent",
                            "direction support grew inside a streak"))
                streak.append(info)
            streak_len += 1
            cap = cap_guided if guided else cap_plain
            if rec.case != CASE_FINISHER and streak_len > cap:
                claim = "remark1-cap" if guided else "thm1-cap"
                violations.append(Violation(rec.iteration, claim,
                                            f"streak {streak_len} exceeds {cap}"))
        elif rec.case == CASE_I:
            _audit_vertex_change(lp, rec, streak, basis, x, violations, exact, tols)
            if lam is not None and z_star is not None and rec.direction is not None:
                gap_before = objective - z_star
                gap_after = rec.objective - z_star
                bound = (1 - 1 / lam) * gap_before
                ok = gap_after <= bound if exact else \
                    float(gap_after) <= float(bound) + tols.base * (1 + abs(float(bound)))
                if not ok:
                    violations.append(Violation(
                        rec.iteration, "contraction",
                        f"gap {gap_after} > (1 - 1/lambda) * {gap_before}"))
            streak = []
            streak_len = 0
        elif rec.case == CASE_FINISHER:
            finisher_seen = True
            finisher_count += 1
            if not degenerate:
                violations.append(Violation(rec.iteration, "finisher",
                                            "finisher pivot is not degenerate"))

        # apply the exchange and refactorize from scratch
        order = list(basis.order)
        order[position] = rec.entering
        basis = Basis(tuple(order))
        engine.set_basis(basis)
        sol = engine.basic_solution()
        x = list(sol.x)
        new_objective = lp.objective_value(x)
        if not sol.feasible:
            violations.append(Violation(rec.iteration, "feasibility",
                                        "basis after pivot is infeasible"))
        if not close(new_objective, rec.objective):
            violations.append(Violation(rec.iteration, "log",
                                        f"recorded objective {rec.objective}, "
                                        f"replayed {new_objective}"))
        slack = 0 if exact else tols.base * (1 + abs(float(objective)))
        if new_objective > objective + slack:
            violations.append(Violation(rec.iteration, "monotonicity",
                                        "objective increased"))
        if degenerate and exact and new_objective != objective:
            violations.append(Violation(rec.iteration, "monotonicity",
                                        "degenerate pivot changed the objective"))
        if not degenerate and exact and not new_objective < objective:
            # float mode settles for non-increase; strictness is an exact claim
            violations.append(Violation(rec.iteration, "monotonicity",
                                        "non-degenerate pivot did not decrease"))
        objective = new_objective

        if basis.members in seen_bases:
            repeat_found = True
        seen_bases.add(basis.members)

    if result.rule == "bland" and repeat_found:
        violations.append(Violation(None, "bland", "a basis repeated under Bland's rule"))

    if antistalling and finisher_count:
        budget = lp.n - lp.m
        same_final_vertex = result.presolve is not None and result.x is not None and (
            tuple(result.x) == tuple(result.presolve.x_star) if exact else
            all(abs(float(a) - float(b)) <= tols.x_zero
                for a, b in zip(result.x, result.presolve.x_star)))
        if same_final_vertex and finisher_count > budget:
            violations.append(Violation(None, "finisher",
                                        f"{finisher_count} finisher pivots exceed "
                                        f"n - m = {budget}"))
    return violations


def _audit_degenerate(lp, engine, basis, x, rec, col, position, exact, tols,
                      violations):
    """Replay Q1/Q2 and the Case III coupling for one degenerate record."""
    if rec.direction is None:
        return None
    y = list(rec.direction)
    ptol = 0 if exact else tols.pivot
    xtol = 0 if exact else tols.x_zero
    nonbasic = set(basis.nonbasic(lp.n))
    zero_basics = {i for i in basis.order
                   if (x[i] == 0 if exact else abs(x[i]) <= xtol)}
    q2_before = {i for i in nonbasic if (y[i] > 0 if exact else y[i] > xtol)}

    if col[position] <= ptol:
        violations.append(Violation(rec.iteration, "case3-coupling",
                                    "leaving column's tableau entry is not positive"))
    leaving_y = y[rec.leaving]
    if not (leaving_y == 0 if exact else abs(leaving_y) <= xtol):
        violations.append(Violation(rec.iteration, "case3-coupling",
                                    f"direction at leaving index is {leaving_y}, not 0"))
    if rec.leaving not in zero_basics:
        violations.append(Violation(rec.iteration, "case3-coupling",
                                    "leaving index is not a zero-valued basic"))

    pre_reroute_cost = rec.direction_cost
    if rec.case == CASE_III_II:
        if rec.reroute_g is None or rec.alpha is None:
            violations.append(Violation(rec.iteration, "case3-coupling",
                                        "reroute record lacks alpha or its index"))
        else:
            g_y = y[rec.reroute_g]
            if not (g_y == 0 if exact else abs(g_y) <= xtol):
                violations.append(Violation(
                    rec.iteration, "case3-coupling",
                    f"rerouted direction is {g_y} at its zeroed index"))
            # reconstruct the pre-reroute direction through the entering ray
            z = [Fraction(0) if exact else 0.0] * lp.n
            z[rec.entering] = Fraction(1) if exact else 1.0
            for pos, i in enumerate(basis.order):
                z[i] = -col[pos]
            y_pre = [a - rec.alpha * b for a, b in zip(y, z)]
            cost_pre = sum(c * v for c, v in zip(lp.c, y_pre) if v)
            cost_post = sum(c * v for c, v in zip(lp.c, y) if v)
            decreased = cost_post < cost_pre if exact else \
                float(cost_post) < float(cost_pre) + tols.c_zero
            if not decreased:
                violations.append(Violation(rec.iteration, "case3-coupling",
                                            "reroute did not decrease c.y"))
            pre_reroute_cost = cost_pre

    # the rerouted/unchanged direction must still be a feasible improving one
    support = [j for j in range(lp.n) if y[j]]
    for i in range(lp.m):
        acc = sum(lp.A[i][j] * y[j] for j in support if lp.A[i][j])
        ok = acc == 0 if exact else abs(acc) <= 1e-7 * (1 + max(
            (abs(float(y[j])) for j in support), default=0.0))
        if not ok:
            violations.append(Violation(rec.iteration, "direction",
                                        f"A y != 0 in row {i}"))
            break

    return {
        "q2_before": q2_before,
        "q2_after": (q2_before - {rec.entering}) | set(),
        "y": y,
        "pre_reroute_cost": pre_reroute_cost,
        "post_cost": sum(c * v for c, v in zip(lp.c, y) if v),
    }


def _audit_vertex_change(lp, rec, streak, basis, x, violations, exact, tols):
    """Direction-cost monotonicity and support persistence across a streak."""
    if not streak or rec.direction is None:
        return
    first = streak[0]
    costs = [first["pre_reroute_cost"]] + [s["post_cost"] for s in streak]
    costs.append(rec.direction_cost)
    usable = [c for c in costs if c is not None]
    for a, b in zip(usable, usable[1:]):
        ok = b <= a if exact else float(b) <= float(a) + tols.c_zero
        if not ok:
            violations.append(Violation(rec.iteration, "lemma2a",
                                        "c.y increased across a degenerate streak"))
            break
    y_start = first["y"]
    y_end = list(rec.direction)
    xtol = 0 if exact else tols.x_zero
    nonbasic_end = set(basis.nonbasic(lp.n))
    for i in nonbasic_end:
        if (y_end[i] != 0 if exact else abs(y_end[i]) > xtol):
            same = y_end[i] == y_start[i] if exact else \
                abs(float(y_end[i]) - float(y_start[i])) <= tols.x_zero
            if not same:
                violations.append(Violation(
                    rec.iteration, "lemma2b",
                    f"nonbasic support entry {i} changed across the streak"))

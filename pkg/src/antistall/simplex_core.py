"""The simplex iteration engine: phase 1, ratio test, pivots, run logging.

``solve`` drives one of six rules.  Classic rules loop select/ratio/pivot.
The antistalling rule first pre-solves the LP (Dantzig, falling back to
Bland if Dantzig cycles) to obtain an optimal vertex, then walks guided by
improving feasible directions, and converts a non-optimal basis at the
optimal vertex with the finishing procedure.  Every pivot appends a
``PivotRecord`` so that runs can be replayed and audited after the fact.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import pivot_rules as pr
from .basis_engine import BasisEngine, SingularBasisError
from .lp_model import ARTIFICIAL, Basis, BasicSolution, StandardLP
from .scalars import FLOAT, RATIONAL

OPTIMAL = "Optimal"
UNBOUNDED = "Unbounded"
INFEASIBLE = "Infeasible"
ITERATION_LIMIT = "IterationLimit"
CYCLED = "Cycled"
TIMEOUT = "Timeout"

CYCLE_DETECT_MAX_N = 30


class SimplexError(RuntimeError):
    pass


class InfeasibleError(SimplexError):
    """Phase 1 proved the LP infeasible."""


class InvalidPivotError(SimplexError):
    """Requested basis exchange has a zero pivot element."""


def default_iteration_limit(lp: StandardLP) -> int:
    return 10 * (lp.n + lp.m) ** 2


@dataclass
class PivotRecord:
    """One basis exchange: who moved, which case, and the state afterwards."""

    iteration: int
    entering: int
    leaving: int
    case: str                        # classic | I | II | III->II | finisher
    degenerate: bool
    theta: object
    objective: object                # objective value after the pivot
    vertex_index: int                # distinct vertices seen before this pivot, 0-based
    q2_after: int | None = None      # |Q2| after a degenerate antistalling pivot
    direction: tuple | None = None   # direction justifying the pivot (post-reroute)
    direction_cost: object | None = None
    alpha: object | None = None      # Case III step size
    reroute_g: int | None = None     # Q1 coordinate zeroed by the reroute


@dataclass
class PresolveInfo:
    """Optimal data obtained by the pre-solve used to guide antistalling."""

    x_star: tuple
    basis_star: Basis
    objective_star: object
    rule: str
    pivots: int


@dataclass
class SolveResult:
    status: str
    rule: str
    numeric: str
    objective: object | None
    x: tuple | None
    basis: Basis | None
    initial_basis: Basis | None
    log: list[PivotRecord] = field(default_factory=list)
    pivots_total: int = 0
    pivots_degenerate: int = 0
    max_consec_degenerate: int = 0   # outside the finisher
    finisher_pivots: int = 0
    distinct_vertices: int = 0
    presolve: PresolveInfo | None = None
    guide: str | None = None         # "optimal" | "custom" for antistalling runs
    elapsed_s: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class SimplexState:
    """Mutable per-run state: basis, point, factorization, counters, log."""

    def __init__(self, lp: StandardLP, basis: Basis, numeric: str = RATIONAL,
                 tol: float = 1e-9, record_directions: bool = False,
                 runtime_checks: bool = False, require_feasible: bool = True):
        self.lp = lp
        self.numeric = numeric
        self.engine = BasisEngine(lp, numeric=numeric, tol=tol)
        self.engine.set_basis(basis)
        self.tols = self.engine.tols
        self.record_directions = record_directions
        self.runtime_checks = runtime_checks
        self.log: list[PivotRecord] = []
        self.pivots_total = 0
        self.pivots_degenerate = 0
        self.consec_degenerate = 0
        self.max_consec_degenerate = 0
        self.finisher_pivots = 0
        self.distinct_vertices = 1
        self.cycle_detected = False
        self._rc_cache = None
        self._track_cycles = numeric == RATIONAL and lp.n <= CYCLE_DETECT_MAX_N
        self._seen_bases: set[frozenset] = set()
        self._load_solution(require_feasible)

    # -- views ----------------------------------------------------------------

    @property
    def basis(self) -> Basis:
        return self.engine.basis

    @property
    def nonbasic(self) -> tuple[int, ...]:
        return self.basis.nonbasic(self.lp.n)

    def reduced_costs(self):
        if self._rc_cache is None:
            self._rc_cache = self.engine.reduced_costs()
        return self._rc_cache

    def zero_basics(self) -> tuple[int, ...]:
        if self.numeric == RATIONAL:
            return tuple(sorted(j for j in self.basis.order if self.x[j] == 0))
        tol = self.tols.x_zero
        return tuple(sorted(j for j in self.basis.order if abs(self.x[j]) <= tol))

    def tableau_column(self, f: int):
        return self.engine.tableau_column(f)

    def basic_solution(self) -> BasicSolution:
        return self.engine.basic_solution()

    # -- operations -------------------------------------------------------------

    def _load_solution(self, require_feasible: bool):
        sol = self.engine.basic_solution()
        if require_feasible and not sol.feasible:
            raise ValueError("starting basis is not feasible")
        self.x = list(sol.x)
        self.objective = self.lp.objective_value(self.x)
        self._rc_cache = None
        if self._track_cycles:
            self._seen_bases = {self.basis.members}

    def ratio_test(self, f: int, col=None):
        """Minimum ratio test for entering f: (leaving g, step) or (None, None).

        Ties go to the smallest basic variable index; a nonpositive tableau
        column means the ray is unbounded.
        """
        if col is None:
            col = self.tableau_column(f)
        exact = self.numeric == RATIONAL
        ptol = 0 if exact else self.tols.pivot
        best = None
        leaving = None
        for pos, i in enumerate(self.basis.order):
            a = col[pos]
            if a > ptol:
                xi = self.x[i]
                if not exact and xi < 0:
                    xi = 0.0  # feasibility noise must not produce negative steps
                ratio = xi / a
                if best is None or ratio < best or (ratio == best and i < leaving):
                    best, leaving = ratio, i
        if leaving is None:
            return None, None
        return leaving, best

    def apply_pivot(self, f: int, g: int, case: str = pr.CASE_CLASSIC, col=None,
                    direction=None, alpha=None, reroute_g=None) -> PivotRecord:
        """Exchange g for f in the basis, refresh the point, log the pivot."""
        if col is None:
            col = self.tableau_column(f)
        position = self.basis.position(g)
        exact = self.numeric == RATIONAL
        entry = col[position]
        zero_entry = (entry == 0) if exact else abs(entry) <= self.tols.pivot
        if zero_entry:
            raise InvalidPivotError(f"pivot element for ({f}, {g}) is zero")
        theta = self.x[g] / entry
        if not exact and theta < 0:
            theta = 0.0

        old_objective = self.objective
        self.engine.replace_column(position, f, tableau_col=col)
        sol = self.engine.basic_solution()
        self.x = list(sol.x)
        self.objective = self.lp.objective_value(self.x)
        self._rc_cache = None

        degenerate = theta == 0 if exact else theta <= self.tols.x_zero
        self.pivots_total += 1
        if degenerate:
            self.pivots_degenerate += 1
            if case != pr.CASE_FINISHER:
                self.consec_degenerate += 1
                self.max_consec_degenerate = max(self.max_consec_degenerate,
                                                 self.consec_degenerate)
            else:
                self.finisher_pivots += 1
        else:
            self.consec_degenerate = 0
            self.distinct_vertices += 1

        if self.runtime_checks:
            slack = 0 if exact else self.tols.base * (1.0 + abs(float(old_objective)))
            if self.objective > old_objective + slack:
                raise pr.InternalContradictionError(
                    f"objective increased at pivot {self.pivots_total}")

        if self._track_cycles:
            key = self.basis.members
            if degenerate:
                if key in self._seen_bases:
                    self.cycle_detected = True
                self._seen_bases.add(key)
            else:
                self._seen_bases = {key}

        record = PivotRecord(
            iteration=self.pivots_total,
            entering=f,
            leaving=g,
            case=case,
            degenerate=degenerate,
            theta=theta,
            objective=self.objective,
            vertex_index=self.distinct_vertices - 1,
            direction=(tuple(direction.y) if direction is not None
                       and self.record_directions else None),
            direction_cost=direction.cost if direction is not None else None,
            alpha=alpha,
            reroute_g=reroute_g,
        )
        self.log.append(record)
        return record


def initial_state(lp: StandardLP, basis: Basis, numeric: str = RATIONAL,
                  tol: float = 1e-9, **kwargs) -> SimplexState:
    return SimplexState(lp, basis, numeric=numeric, tol=tol, **kwargs)


def ratio_test(state: SimplexState, f: int):
    """Module-level wrapper over ``SimplexState.ratio_test``."""
    return state.ratio_test(f)


def pivot(state: SimplexState, f: int, g: int, **kwargs) -> SimplexState:
    """Module-level wrapper over ``SimplexState.apply_pivot``; returns the state."""
    state.apply_pivot(f, g, **kwargs)
    return state


# -- phase 1 ---------------------------------------------------------------


def phase_one(lp: StandardLP, numeric: str = RATIONAL, tol: float = 1e-9) -> Basis:
    """Find a feasible basis, or raise ``InfeasibleError``.

    Tries a unit-column cover first (covers slack bases when b >= 0);
    otherwise minimizes artificial variables under Bland's rule, which cannot
    cycle, and drives zero-level artificials out of the basis.
    """
    m, n = lp.m, lp.n
    flip = [bi < 0 for bi in lp.b]
    b2 = [-bi if fl else bi for bi, fl in zip(lp.b, flip)]

    cover = _unit_cover(lp, flip, b2)
    if cover is not None:
        return Basis(tuple(cover))

    A2 = []
    for i in range(m):
        row = [-v for v in lp.A[i]] if flip[i] else list(lp.A[i])
        row.extend(Fraction(1) if k == i else Fraction(0) for k in range(m))
        A2.append(row)
    aux = StandardLP(
        A=A2, b=b2,
        c=[Fraction(0)] * n + [Fraction(1)] * m,
        provenance=list(lp.provenance) + [ARTIFICIAL] * m,
        name=f"{lp.name}:phase1",
    )
    state = SimplexState(aux, Basis(tuple(range(n, n + m))), numeric=numeric, tol=tol)
    status = _classic_loop(state, "bland", pr.RuleMemory(),
                           max_iter=default_iteration_limit(aux), deadline=None)
    if status != OPTIMAL:
        raise SimplexError(f"phase 1 ended with status {status}")
    exact = numeric == RATIONAL
    positive = (state.objective > 0 if exact
                else state.objective > state.tols.x_zero * m)
    if positive:
        raise InfeasibleError("artificial optimum is positive: LP infeasible")

    # drive remaining zero-level artificials out of the basis
    for a in [j for j in state.basis.order if j >= n]:
        position = state.basis.position(a)
        row = _tableau_row(state, position, n)
        ptol = 0 if exact else state.tols.pivot
        entering = next((j for j in range(n)
                         if j not in state.basis.members and abs(row[j]) > ptol
                         and (row[j] != 0 if exact else True)), None)
        if entering is None:
            raise SimplexError(
                "cannot eliminate a basic artificial: A is rank deficient, run validate()")
        state.apply_pivot(entering, a)
    order = tuple(state.basis.order)
    if any(j >= n for j in order):
        raise SimplexError("artificial variable left in the phase 1 basis")
    return Basis(order)


def _unit_cover(lp: StandardLP, flip, b2):
    """Columns forming a positive diagonal over all rows of the sign-fixed system."""
    m, n = lp.m, lp.n
    chosen: dict[int, int] = {}
    for j in range(n):
        nz = [(i, lp.A[i][j]) for i in range(m) if lp.A[i][j] != 0]
        if len(nz) != 1:
            continue
        i, v = nz[0]
        if flip[i]:
            v = -v
        if v > 0 and i not in chosen:
            chosen[i] = j
    if len(chosen) < m:
        return None
    return [chosen[i] for i in range(m)]


def _tableau_row(state: SimplexState, position: int, limit: int):
    """Row ``position`` of A_B^{-1} A restricted to columns < limit."""
    m = state.lp.m
    if state.numeric == RATIONAL:
        e = [Fraction(0)] * m
        e[position] = Fraction(1)
        u = state.engine._lu.solve_transpose(e)
        return [sum(ui * state.lp.A[i][j] for i, ui in enumerate(u) if ui)
                for j in range(limit)]
    import numpy as np

    e = np.zeros(m)
    e[position] = 1.0
    u = state.engine._lu.solve_transpose(e)
    return list(state.engine.A_np[:, :limit].T @ u)


# -- solve -------------------------------------------------------------------


def solve(lp: StandardLP, rule: str, numeric: str = RATIONAL, tol: float = 1e-9,
          max_iter: int | None = None, start_basis: Basis | None = None,
          guide="optimal", presolve_rule: str = "dantzig",
          presolve: PresolveInfo | None = None,
          record_directions: bool | None = None,
          runtime_checks: bool | None = None,
          contraction: tuple | None = None,
          timeout_s: float | None = None) -> SolveResult:
    """Run the simplex method under the named rule and return the full log.

    ``rule`` is one of dantzig, bland, lifo, most_frequent, steepest_edge or
    antistalling.  Antistalling pre-solves for an optimal vertex (unless
    ``presolve`` is supplied), guides itself with ``guide`` ("optimal" or an
    object with ``direction(state)``), and finishes at the optimal vertex via
    the bounded finishing procedure.  ``contraction=(Delta, delta)`` enables
    the per-vertex optimality-gap contraction assertion in guided runs.
    """
    if rule not in pr.ALL_RULES:
        raise ValueError(f"unknown rule {rule!r}; expected one of {pr.ALL_RULES}")
    if record_directions is None:
        record_directions = numeric == RATIONAL
    if runtime_checks is None:
        runtime_checks = numeric == RATIONAL
    if max_iter is None:
        max_iter = default_iteration_limit(lp)
    deadline = time.monotonic() + timeout_s if timeout_s else None
    started = time.monotonic()

    def finish(status, state=None, **extra):
        result = SolveResult(
            status=status, rule=rule, numeric=numeric,
            objective=state.objective if state else None,
            x=tuple(state.x) if state else None,
            basis=state.basis if state else None,
            initial_basis=extra.get("initial_basis"),
            log=state.log if state else [],
            pivots_total=state.pivots_total if state else 0,
            pivots_degenerate=state.pivots_degenerate if state else 0,
            max_consec_degenerate=state.max_consec_degenerate if state else 0,
            finisher_pivots=state.finisher_pivots if state else 0,
            distinct_vertices=state.distinct_vertices if state else 0,
            presolve=extra.get("presolve"),
            guide=extra.get("guide_kind"),
            elapsed_s=time.monotonic() - started,
        )
        return result

    try:
        basis = start_basis if start_basis is not None else phase_one(
            lp, numeric=numeric, tol=tol)
    except InfeasibleError:
        return finish(INFEASIBLE)

    if rule != pr.ANTISTALLING:
        state = SimplexState(lp, basis, numeric=numeric, tol=tol,
                             record_directions=record_directions,
                             runtime_checks=runtime_checks)
        status = _classic_loop(state, rule, pr.RuleMemory(),
                               max_iter=max_iter, deadline=deadline)
        return finish(status, state, initial_basis=basis)

    if presolve is None:
        presolve = _presolve(lp, presolve_rule, numeric=numeric, tol=tol,
                             max_iter=max_iter, deadline=deadline)
        if isinstance(presolve, str):      # terminal status, not an optimum
            return finish(presolve)
    state = SimplexState(lp, basis, numeric=numeric, tol=tol,
                         record_directions=record_directions,
                         runtime_checks=runtime_checks)
    guide_kind = "optimal" if guide in ("optimal", None) else "custom"
    status = _antistalling_loop(state, _resolve_guide(guide, presolve), presolve,
                                max_iter=max_iter, deadline=deadline,
                                contraction=contraction)
    return finish(status, state, initial_basis=basis, presolve=presolve,
                  guide_kind=guide_kind)


def _classic_loop(state: SimplexState, rule: str, memory: pr.RuleMemory,
                  max_iter: int, deadline) -> str:
    while True:
        if state.pivots_total >= max_iter:
            return ITERATION_LIMIT
        if deadline is not None and time.monotonic() > deadline:
            return TIMEOUT
        entering = pr.select_classic(rule, state, memory)
        if entering is None:
            return OPTIMAL
        leaving, _ = state.ratio_test(entering)
        if leaving is None:
            return UNBOUNDED
        state.apply_pivot(entering, leaving)
        memory.record_pivot(state.pivots_total, entering, leaving)
        if state.cycle_detected:
            if rule == "bland":
                raise pr.InternalContradictionError("basis repeated under Bland's rule")
            return CYCLED


def _presolve(lp, presolve_rule, numeric, tol, max_iter, deadline):
    """Obtain (x*, B*, z*) for guiding; falls back to Bland when Dantzig cycles."""
    remaining = None
    if deadline is not None:
        remaining = max(0.0, deadline - time.monotonic())
    for attempt_rule in (presolve_rule, "bland"):
        result = solve(lp, attempt_rule, numeric=numeric, tol=tol,
                       max_iter=max_iter, timeout_s=remaining)
        if result.status == OPTIMAL:
            return PresolveInfo(x_star=result.x, basis_star=result.basis,
                                objective_star=result.objective,
                                rule=attempt_rule, pivots=result.pivots_total)
        if result.status != CYCLED:
            return result.status
    return CYCLED


def _same_point(x, x_star, state) -> bool:
    if state.numeric == RATIONAL:
        return tuple(x) == tuple(x_star)
    tol = state.tols.x_zero
    return all(abs(float(a) - float(b)) <= tol for a, b in zip(x, x_star))


def _optimal_vertex_cleanup(state: SimplexState, max_iter: int, deadline):
    """Certify optimality at an optimal vertex by Bland pivots.

    Every pivot here is necessarily degenerate (a positive step would push
    the objective below the optimum), so Bland's rule terminates at an
    optimal basis of this vertex without ever leaving it.
    """
    exact = state.numeric == RATIONAL
    while True:
        if state.pivots_total >= max_iter:
            raise SimplexError("iteration limit inside optimal-vertex cleanup")
        if deadline is not None and time.monotonic() > deadline:
            raise SimplexError("timeout inside optimal-vertex cleanup")
        rc = state.reduced_costs()
        candidates = rc.negatives(state.numeric, state.tols.c_zero)
        if not candidates:
            return
        f = min(candidates)
        g, theta = state.ratio_test(f)
        if g is None:
            raise pr.InternalContradictionError(
                "unbounded ray at an optimal vertex")
        degenerate = theta == 0 if exact else theta <= state.tols.x_zero
        if not degenerate:
            raise pr.InternalContradictionError(
                "non-degenerate improving pivot at an optimal vertex")
        state.apply_pivot(f, g, case=pr.CASE_FINISHER)


def _resolve_guide(guide, presolve: PresolveInfo):
    if guide == "optimal" or guide is None:
        return pr.OptimalGuide(presolve.x_star)
    if hasattr(guide, "direction"):
        return guide
    if callable(guide):
        return pr.CallableGuide(guide)
    raise ValueError(f"cannot interpret guide {guide!r}")


def _antistalling_loop(state: SimplexState, guide, presolve: PresolveInfo,
                       max_iter: int, deadline, contraction=None) -> str:
    lp = state.lp
    exact = state.numeric == RATIONAL
    z_star = presolve.objective_star
    obj_tol = 0 if exact else state.tols.base * (1.0 + abs(float(z_star)))
    lam = None
    if contraction is not None:
        Delta, delta = contraction
        lam = Fraction(lp.n - lp.m) * Delta / delta if exact else \
            (lp.n - lp.m) * float(Delta) / float(delta)
    direction = None

    while True:
        if state.pivots_total >= max_iter:
            return ITERATION_LIMIT
        if deadline is not None and time.monotonic() > deadline:
            return TIMEOUT

        gap = state.objective - z_star
        if gap < -obj_tol:
            raise pr.InternalContradictionError("objective fell below the presolve optimum")
        if gap <= obj_tol:
            # optimal vertex: certify or run the finisher
            if not state.reduced_costs().optimal:
                if _same_point(state.x, presolve.x_star, state):
                    pr.finish_at_optimum(state, presolve.basis_star)
                else:
                    # a different optimal vertex: the reference basis does not
                    # apply, but at an optimal vertex every improving pivot is
                    # forced degenerate, so Bland terminates without leaving it
                    _optimal_vertex_cleanup(state, max_iter, deadline)
                if not state.reduced_costs().optimal:
                    raise pr.InternalContradictionError(
                        "finisher ended without an optimality certificate")
            return OPTIMAL

        if direction is None:
            direction = guide.direction(state)
            if direction is None:
                raise pr.InternalContradictionError(
                    "guide returned no direction at a non-optimal vertex")

        q2_before = len(direction.q2)
        decision = pr.antistalling_step(state, direction)
        if decision.case == pr.CASE_I and decision.leaving is None:
            return UNBOUNDED
        record = state.apply_pivot(decision.entering, decision.leaving,
                                   case=decision.case, direction=decision.direction,
                                   alpha=decision.alpha, reroute_g=decision.reroute_g)

        if decision.case == pr.CASE_I:
            gap_after = state.objective - z_star
            if lam is not None and state.runtime_checks:
                bound = (1 - 1 / lam) * gap
                ok = gap_after <= bound if exact else \
                    gap_after <= bound + state.tols.base * (1.0 + abs(float(bound)))
                if not ok:
                    raise pr.InternalContradictionError(
                        f"contraction violated: gap {gap_after} > (1 - 1/lambda) * {gap}")
            direction = None
        else:
            direction = pr.ImprovingDirection.from_vector(
                decision.direction.y, state, validate=False)
            record.q2_after = len(direction.q2)
            if state.runtime_checks:
                if len(direction.q2) != q2_before - 1:
                    raise pr.InternalContradictionError(
                        f"|Q2| went {q2_before} -> {len(direction.q2)}, expected -1")
                cap = lp.n - lp.m - 1
                if state.consec_degenerate > cap:
                    raise pr.InternalContradictionError(
                        f"degenerate streak {state.consec_degenerate} exceeds n-m-1 = {cap}")
            if state.cycle_detected:
                raise pr.InternalContradictionError(
                    "basis repeated inside an antistalling streak")

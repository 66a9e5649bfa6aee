"""Entering/leaving selection: five classic rules plus the antistalling rule.

The antistalling rule keeps an improving feasible direction y (A y = 0,
c.y < 0, nonnegative on every coordinate currently at zero) alongside the
basis and only enters columns in the support of y.  Writing Z for the
zero-valued basic indices, Q1 = {i in Z : y_i > 0} and Q2 = {i nonbasic :
y_i > 0}, each step lands in one of three cases:

* Case I   -- no zero-valued basic blocks the entering column: the ratio test
  is strictly positive and the pivot moves to a new vertex.
* Case II  -- some i in Z \\ Q1 blocks: pivot it out.  The pivot is degenerate
  and |Q2| drops by exactly one, which is what caps the streak length.
* Case III -- only members of Q1 block: slide y along the entering ray until
  a Q1 coordinate hits zero (``reroute_direction``), which turns the
  situation into Case II at the same basis.

|Q2| <= n - m and it cannot reach zero while y improves, so at most
n - m - 1 consecutive degenerate pivots can happen at a vertex; when y is the
difference of two basic solutions, |Q2| <= m tightens the cap to
min(n - m - 1, m - 1).  ``finish_at_optimum`` handles the remaining case of a
non-optimal basis at an optimal vertex in at most n - m degenerate pivots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .basis_engine import BasisEngine
from .lp_model import Basis, StandardLP
from .scalars import RATIONAL

CLASSIC_RULES = ("dantzig", "bland", "lifo", "most_frequent", "steepest_edge")
ANTISTALLING = "antistalling"
ALL_RULES = CLASSIC_RULES + (ANTISTALLING,)

CASE_I = "I"
CASE_II = "II"
CASE_III_II = "III->II"
CASE_CLASSIC = "classic"
CASE_FINISHER = "finisher"


class DirectionError(ValueError):
    """A vector fails the improving-feasible-direction invariants."""


class NotImprovingError(ValueError):
    """The guide target does not improve on the current vertex."""


class InternalContradictionError(RuntimeError):
    """A mathematically guaranteed property failed; indicates a bug or bad input."""


@dataclass
class RuleMemory:
    """History needed by the LIFO and most-frequent rules."""

    last_left: dict[int, int] = field(default_factory=dict)
    enter_count: dict[int, int] = field(default_factory=dict)

    def record_pivot(self, iteration: int, entering: int, leaving: int):
        self.enter_count[entering] = self.enter_count.get(entering, 0) + 1
        self.last_left[leaving] = iteration


def select_classic(kind: str, state, memory: RuleMemory | None = None):
    """Pick the entering column under a classic rule; None certifies optimality.

    All rules restrict to columns with negative reduced cost and break ties
    by the smallest column index.
    """
    rc = state.reduced_costs()
    candidates = rc.negatives(state.numeric, state.tols.c_zero)
    if not candidates:
        return None
    if kind == "bland":
        return min(candidates)
    if kind == "dantzig":
        return min(candidates, key=lambda j: (rc.values[j], j))
    if kind == "lifo":
        memory = memory or RuleMemory()
        return min(candidates, key=lambda j: (-memory.last_left.get(j, -1), j))
    if kind == "most_frequent":
        memory = memory or RuleMemory()
        return min(candidates, key=lambda j: (-memory.enter_count.get(j, 0), j))
    if kind == "steepest_edge":
        best = None
        best_score = None
        for j in candidates:
            col = state.tableau_column(j)
            norm1 = 1 + sum(abs(v) for v in col)
            score = -rc.values[j] / norm1
            if best_score is None or score > best_score:
                best, best_score = j, score
        return best
    raise ValueError(f"unknown classic rule {kind!r}")


@dataclass(frozen=True)
class ImprovingDirection:
    """A kernel vector with negative cost, feasible at the current vertex."""

    y: tuple
    cost: object                    # c . y
    q1: frozenset[int]              # zero-valued basics with y_i > 0
    q2: frozenset[int]              # nonbasics with y_i > 0

    @classmethod
    def from_vector(cls, y, state, validate: bool = True) -> "ImprovingDirection":
        y = tuple(y)
        lp = state.lp
        if len(y) != lp.n:
            raise DirectionError(f"direction has length {len(y)}, expected {lp.n}")
        cost = sum(cj * yj for cj, yj in zip(lp.c, y) if yj)
        exact = state.numeric == RATIONAL
        tol = 0 if exact else state.tols.x_zero
        zero_basics = set(state.zero_basics())
        nonbasic = set(state.nonbasic)
        if validate:
            _check_direction(lp, y, cost, zero_basics | nonbasic, exact, state.tols)
        q1 = frozenset(i for i in zero_basics if y[i] > tol)
        q2 = frozenset(i for i in nonbasic if y[i] > tol)
        return cls(y=y, cost=cost, q1=q1, q2=q2)


def _check_direction(lp, y, cost, at_zero, exact, tols):
    support = [j for j in range(lp.n) if y[j]]
    for i in range(lp.m):
        row = lp.A[i]
        acc = sum(row[j] * y[j] for j in support if row[j])
        if exact:
            if acc != 0:
                raise DirectionError(f"A y != 0 in row {i}")
        else:
            scale = 1.0 + max((abs(float(y[j])) for j in support), default=0.0)
            if abs(acc) > 1e-7 * scale:
                raise DirectionError(f"A y != 0 in row {i} (residual {acc})")
    if cost >= 0:
        raise DirectionError("c . y is not negative")
    if exact:
        bad = [j for j in at_zero if y[j] < 0]
    else:
        bad = [j for j in at_zero if y[j] < -tols.x_zero]
    if bad:
        raise DirectionError(f"direction leaves the feasible cone at indices {sorted(bad)}")


def compute_ray(state, f: int):
    """The basic ray for entering f: z_B = -tableau column, z_f = 1, else 0.

    Satisfies A z = 0 and c . z = reduced cost of f.
    """
    col = state.tableau_column(f)
    zero = Fraction(0) if state.numeric == RATIONAL else 0.0
    one = Fraction(1) if state.numeric == RATIONAL else 1.0
    z = [zero] * state.lp.n
    z[f] = one
    for pos, i in enumerate(state.basis.order):
        z[i] = -col[pos]
    return z


def guided_direction(state, x_target) -> ImprovingDirection:
    """Direction y = x_target - x toward a better basic solution.

    Raises ``NotImprovingError`` when the target does not strictly improve
    (the caller should switch to ``finish_at_optimum``).  Both points satisfy
    Ax = b, so A y = 0 holds by construction; y >= 0 on zero coordinates
    because x_target >= 0.  |Q2| <= m since the target has at most m nonzeros.
    """
    lp = state.lp
    target_obj = sum(cj * vj for cj, vj in zip(lp.c, x_target) if vj)
    if target_obj >= state.objective:
        raise NotImprovingError("target objective does not improve on current vertex")
    y = [t - v for t, v in zip(x_target, state.x)]
    direction = ImprovingDirection.from_vector(y, state, validate=state.runtime_checks)
    if len(direction.q2) > lp.m:
        raise InternalContradictionError(
            f"|Q2| = {len(direction.q2)} exceeds m = {lp.m} for a basic target")
    return direction


class OptimalGuide:
    """Guides the antistalling rule with y = x_star - x; None at the optimum."""

    def __init__(self, x_star):
        self.x_star = tuple(x_star)

    def direction(self, state):
        lp = state.lp
        star_obj = sum(cj * vj for cj, vj in zip(lp.c, self.x_star) if vj)
        if star_obj >= state.objective:
            return None
        return guided_direction(state, self.x_star)


class CallableGuide:
    """Adapter for a plain callable(state) -> direction vector or None."""

    def __init__(self, fn):
        self.fn = fn

    def direction(self, state):
        y = self.fn(state)
        if y is None:
            return None
        if isinstance(y, ImprovingDirection):
            return y
        return ImprovingDirection.from_vector(y, state, validate=True)


@dataclass
class AntistallingDecision:
    """Outcome of one antistalling case analysis at the current basis."""

    case: str                       # CASE_I, CASE_II or CASE_III_II
    entering: int
    leaving: int | None             # None means unbounded (Case I only)
    theta: object | None
    direction: ImprovingDirection   # direction justifying the pivot (post-reroute)
    alpha: object | None = None     # Case III step along the entering ray
    reroute_g: int | None = None    # Q1 coordinate driven to zero by the reroute


def antistalling_step(state, direction: ImprovingDirection) -> AntistallingDecision:
    """Classify the current (basis, direction) pair and choose the pivot.

    The entering column is the most negative reduced cost among nonbasic
    columns in the support of the direction; ties and all leaving choices go
    to the smallest index.
    """
    rc = state.reduced_costs()
    exact = state.numeric == RATIONAL
    threshold = 0 if exact else -state.tols.c_zero
    candidates = [j for j in direction.q2
                  if (rc.values[j] < 0 if exact else rc.values[j] < threshold)]
    if not candidates:
        raise InternalContradictionError(
            "no negative reduced cost inside supp(y): direction is not improving "
            "for this basis, which contradicts c.y < 0")
    f = min(candidates, key=lambda j: (rc.values[j], j))

    col = state.tableau_column(f)
    pos_of = {i: p for p, i in enumerate(state.basis.order)}
    ptol = 0 if exact else state.tols.pivot
    zero_basics = state.zero_basics()
    blockers = [i for i in zero_basics if col[pos_of[i]] > ptol]

    if not blockers:
        g, theta = state.ratio_test(f, col=col)
        return AntistallingDecision(case=CASE_I, entering=f, leaving=g,
                                    theta=theta, direction=direction)

    outside_q1 = [i for i in blockers if i not in direction.q1]
    if outside_q1:
        return AntistallingDecision(case=CASE_II, entering=f,
                                    leaving=min(outside_q1),
                                    theta=_zero(state), direction=direction)

    rerouted, g = reroute_direction(state, direction, f, col=col)
    outside = [i for i in blockers if i not in rerouted.q1]
    if not outside:
        raise InternalContradictionError(
            "reroute did not expose a Case II leaving candidate")
    return AntistallingDecision(case=CASE_III_II, entering=f,
                                leaving=min(outside), theta=_zero(state),
                                direction=rerouted,
                                alpha=rerouted_alpha(state, direction, rerouted, f),
                                reroute_g=g)


def _zero(state):
    return Fraction(0) if state.numeric == RATIONAL else 0.0


def rerouted_alpha(state, before: ImprovingDirection, after: ImprovingDirection, f: int):
    # alpha is recoverable from the entering coordinate: y'_f = y_f + alpha
    return after.y[f] - before.y[f]


def reroute_direction(state, direction: ImprovingDirection, f: int, col=None):
    """Slide the direction along the entering ray until a Q1 coordinate hits 0.

    With z the entering ray, alpha = min over {i in Q1 : tableau_{if} > 0} of
    y_i / |z_i| (smallest index attains on ties).  The new direction
    y + alpha z stays in the kernel, stays feasible at the vertex, strictly
    improves c.y, keeps Q2 unchanged, and zeroes the attaining coordinate g.
    """
    if col is None:
        col = state.tableau_column(f)
    pos_of = {i: p for p, i in enumerate(state.basis.order)}
    exact = state.numeric == RATIONAL
    ptol = 0 if exact else state.tols.pivot
    candidates = [i for i in sorted(direction.q1) if col[pos_of[i]] > ptol]
    if not candidates:
        raise ValueError("reroute precondition violated: no blocked Q1 coordinate")

    alpha = None
    g = None
    for i in candidates:
        ratio = direction.y[i] / col[pos_of[i]]
        if alpha is None or ratio < alpha:
            alpha, g = ratio, i
    if not (alpha > 0):
        raise InternalContradictionError("reroute step alpha is not positive")

    rc_f = state.reduced_costs().values[f]
    y2 = list(direction.y)
    y2[f] = y2[f] + alpha
    for pos, i in enumerate(state.basis.order):
        if col[pos]:
            y2[i] = y2[i] - alpha * col[pos]
    y2[g] = _zero(state)  # exact by construction; forced to kill float residue

    rerouted = ImprovingDirection.from_vector(y2, state, validate=state.runtime_checks)

    expected_cost = direction.cost + alpha * rc_f
    if exact:
        if rerouted.cost != expected_cost or not rerouted.cost < direction.cost:
            raise InternalContradictionError("reroute failed to decrease c.y")
        if rerouted.q2 != direction.q2:
            raise InternalContradictionError("reroute changed Q2")
        if rerouted.y[f] <= 0:
            raise InternalContradictionError("reroute lost the entering coordinate")
    else:
        if not rerouted.cost < direction.cost + state.tols.c_zero:
            raise InternalContradictionError("reroute failed to decrease c.y")
    return rerouted, g


def finish_at_optimum(state, basis_star: Basis):
    """Walk from a non-optimal basis of the optimal vertex to an optimal basis.

    Repeatedly enters the most negative reduced cost and leaves the smallest
    blocked column that is basic here but nonbasic in ``basis_star``; every
    pivot is degenerate and each leaver is fixed at zero (excluded from
    entering again), mirroring deletion of its column.  Takes at most n - m
    pivots.  Raises ``InternalContradictionError`` if no leaver qualifies or
    the pivot budget is exhausted, which would contradict optimality of
    ``basis_star``.
    """
    lp = state.lp
    exact = state.numeric == RATIONAL
    reference = BasisEngine(lp, numeric=state.numeric, tol=state.tols.base)
    reference.set_basis(basis_star)
    ref_sol = reference.basic_solution()
    if exact:
        same = tuple(ref_sol.x) == tuple(state.x)
    else:
        same = all(abs(float(a) - float(b)) <= state.tols.x_zero
                   for a, b in zip(ref_sol.x, state.x))
    if not same:
        raise ValueError("reference basis does not induce the current vertex")
    if not reference.reduced_costs().optimal:
        raise ValueError("reference basis is not an optimal basis")

    star_members = basis_star.members
    budget = lp.n - lp.m
    fixed: set[int] = set()
    records = []

    while True:
        rc = state.reduced_costs()
        threshold = 0 if exact else -state.tols.c_zero
        candidates = [j for j in rc.nonbasic if j not in fixed
                      and (rc.values[j] < 0 if exact else rc.values[j] < threshold)]
        if not candidates:
            leftover = [j for j in rc.nonbasic if j in fixed
                        and (rc.values[j] < 0 if exact else rc.values[j] < threshold)]
            if leftover:
                raise InternalContradictionError(
                    f"fixed columns {leftover} regained negative reduced cost; "
                    "the final basis is optimal only for the column-deleted LP")
            return records
        f = min(candidates, key=lambda j: (rc.values[j], j))
        col = state.tableau_column(f)
        ptol = 0 if exact else state.tols.pivot
        xtol = 0 if exact else state.tols.x_zero
        leavers = [i for pos, i in enumerate(state.basis.order)
                   if i not in star_members and col[pos] > ptol
                   and (state.x[i] == 0 if exact else abs(state.x[i]) <= xtol)]
        if not leavers:
            raise InternalContradictionError(
                f"no basic column outside the optimal basis blocks entering {f}; "
                "contradicts optimality of the reference basis")
        g = min(leavers)
        record = state.apply_pivot(f, g, case=CASE_FINISHER, col=col)
        records.append(record)
        fixed.add(g)
        if len(records) > budget:
            raise InternalContradictionError(
                f"finisher exceeded the n - m = {budget} pivot budget")

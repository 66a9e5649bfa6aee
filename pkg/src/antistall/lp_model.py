"""LP representations and the general-form -> standard equality form pipeline.

``GeneralLP`` holds an LP the way modelers write it: max or min, rows with
<=, = or >= relations, and per-variable bounds.  ``to_standard_form`` turns it
into a ``StandardLP`` (min c'x, Ax = b, x >= 0) by adding slack/surplus
columns, shifting finite lower bounds to zero and rewriting finite upper
bounds as extra rows.  ``validate`` removes linearly dependent rows so that
A has full row rank, which the basis machinery relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .scalars import RATIONAL, Tolerances, as_fraction

LE = "<="
EQ = "="
GE = ">="
RELATIONS = (LE, EQ, GE)

# column provenance tags
ORIGINAL = "original"
SLACK = "slack"
SURPLUS = "surplus"
SHIFT = "shift"
ARTIFICIAL = "artificial"


class LpFormatError(ValueError):
    """Raised for structurally invalid LP data."""


@dataclass
class GeneralLP:
    """An LP in modeler's form: sense, relational rows, variable bounds.

    ``lower[j] is None`` means -inf (rejected downstream), ``upper[j] is None``
    means +inf.  Row and column names must be unique.
    """

    sense: str                                  # "min" | "max"
    objective: list[Fraction]
    row_coeffs: list[list[Fraction]]
    row_relations: list[str]
    row_rhs: list[Fraction]
    lower: list[Fraction | None] = None
    upper: list[Fraction | None] = None
    col_names: list[str] = None
    row_names: list[str] = None
    name: str = "LP"

    def __post_init__(self):
        n = len(self.objective)
        m = len(self.row_coeffs)
        if self.sense not in ("min", "max"):
            raise LpFormatError(f"unknown objective sense {self.sense!r}")
        if len(self.row_relations) != m or len(self.row_rhs) != m:
            raise LpFormatError("row lists have inconsistent lengths")
        for k, row in enumerate(self.row_coeffs):
            if len(row) != n:
                raise LpFormatError(f"row {k} has width {len(row)}, expected {n}")
        for rel in self.row_relations:
            if rel not in RELATIONS:
                raise LpFormatError(f"unknown relation {rel!r}")
        if self.lower is None:
            self.lower = [Fraction(0)] * n
        if self.upper is None:
            self.upper = [None] * n
        if len(self.lower) != n or len(self.upper) != n:
            raise LpFormatError("bound lists have inconsistent lengths")
        for j in range(n):
            lo, up = self.lower[j], self.upper[j]
            if lo is not None and up is not None and lo > up:
                raise LpFormatError(f"lower > upper for column {j}")
        if self.col_names is None:
            self.col_names = [f"x{j}" for j in range(n)]
        if self.row_names is None:
            self.row_names = [f"r{i}" for i in range(m)]
        if len(set(self.col_names)) != n or len(set(self.row_names)) != m:
            raise LpFormatError("row/column names must be unique")

    @property
    def n(self) -> int:
        return len(self.objective)

    @property
    def m(self) -> int:
        return len(self.row_coeffs)


@dataclass
class StandardFormMap:
    """Bookkeeping to map standard-form solutions back to the original LP."""

    sense_flipped: bool
    shifts: list[Fraction]          # per original column, 0 if not shifted
    n_original: int
    objective_offset: Fraction      # original c . shifts
    col_names: list[str]
    row_names: list[str]

    def original_x(self, x) -> list[Fraction]:
        return [x[j] + self.shifts[j] for j in range(self.n_original)]

    def original_objective(self, std_objective):
        value = -std_objective if self.sense_flipped else std_objective
        return value + self.objective_offset


@dataclass
class StandardLP:
    """min c.x subject to Ax = b, x >= 0, with per-column provenance tags."""

    A: list[list[Fraction]]
    b: list[Fraction]
    c: list[Fraction]
    provenance: list[str]
    origin: StandardFormMap | None = None
    name: str = "LP"

    @property
    def m(self) -> int:
        return len(self.A)

    @property
    def n(self) -> int:
        return len(self.c)

    def column(self, j: int) -> list[Fraction]:
        return [row[j] for row in self.A]

    def objective_value(self, x):
        return sum(cj * xj for cj, xj in zip(self.c, x))


def standard_lp(A, b, c, provenance=None, name="LP") -> StandardLP:
    """Build a StandardLP from raw nested data, fractionizing every entry."""
    A = [[as_fraction(v) for v in row] for row in A]
    b = [as_fraction(v) for v in b]
    c = [as_fraction(v) for v in c]
    if any(len(row) != len(c) for row in A) or len(b) != len(A):
        raise LpFormatError("inconsistent dimensions")
    if provenance is None:
        provenance = [ORIGINAL] * len(c)
    return StandardLP(A=A, b=b, c=c, provenance=list(provenance), name=name)


@dataclass(frozen=True)
class Basis:
    """An ordered basis: column indices whose matrix A_B must be nonsingular."""

    order: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.order)) != len(self.order):
            raise LpFormatError("basis has repeated column indices")

    @property
    def members(self) -> frozenset[int]:
        return frozenset(self.order)

    def nonbasic(self, n: int) -> tuple[int, ...]:
        mem = self.members
        return tuple(j for j in range(n) if j not in mem)

    def position(self, index: int) -> int:
        return self.order.index(index)


@dataclass
class BasicSolution:
    """The point determined by a basis: x_N = 0, A_B x_B = b."""

    x: list[Fraction]
    basis: Basis
    zero_basics: tuple[int, ...]    # basic indices with value 0
    feasible: bool

    @property
    def degenerate(self) -> bool:
        return bool(self.zero_basics)


def to_standard_form(gp: GeneralLP) -> StandardLP:
    """Convert a GeneralLP to standard equality form.

    Equality rows pass through; <= rows gain a slack column and >= rows a
    surplus column.  Finite nonzero lower bounds are shifted to zero (the
    shift is recorded), finite upper bounds become extra <= rows.  A
    maximization objective is negated.  Raises ``LpFormatError`` for free
    variables (lower bound -inf) and for empty LPs.
    """
    n0 = gp.n
    if n0 == 0:
        raise LpFormatError("empty LP: no variables")
    for j in range(n0):
        if gp.lower[j] is None:
            raise LpFormatError(
                f"free variable unsupported: column {gp.col_names[j]!r} has no lower bound"
            )

    flip = gp.sense == "max"
    cost0 = [(-v if flip else v) for v in gp.objective]
    shifts = [gp.lower[j] for j in range(n0)]
    offset = sum(gp.objective[j] * shifts[j] for j in range(n0))

    # rows after shifting x -> x + lower
    rows = []
    for coeffs, rel, rhs in zip(gp.row_coeffs, gp.row_relations, gp.row_rhs):
        shifted_rhs = rhs - sum(coeffs[j] * shifts[j] for j in range(n0))
        rows.append(([Fraction(v) for v in coeffs], rel, shifted_rhs))
    # finite upper bounds become extra <= rows (in column order)
    for j in range(n0):
        if gp.upper[j] is not None:
            coeffs = [Fraction(0)] * n0
            coeffs[j] = Fraction(1)
            rows.append((coeffs, LE, gp.upper[j] - shifts[j]))

    if not rows:
        raise LpFormatError("empty LP: no constraints")

    m = len(rows)
    provenance = [SHIFT if shifts[j] != 0 else ORIGINAL for j in range(n0)]
    A = [list(coeffs) for coeffs, _, _ in rows]
    b = [rhs for _, _, rhs in rows]
    c = list(cost0)

    for i, (_, rel, _) in enumerate(rows):
        if rel == EQ:
            continue
        sign = Fraction(1) if rel == LE else Fraction(-1)
        for k in range(m):
            A[k].append(sign if k == i else Fraction(0))
        c.append(Fraction(0))
        provenance.append(SLACK if rel == LE else SURPLUS)

    origin = StandardFormMap(
        sense_flipped=flip,
        shifts=shifts,
        n_original=n0,
        objective_offset=offset,
        col_names=list(gp.col_names),
        row_names=list(gp.row_names),
    )
    return StandardLP(A=A, b=b, c=c, provenance=provenance, origin=origin, name=gp.name)


@dataclass
class ValidationReport:
    """Outcome of ``validate``: the cleaned LP plus diagnostics."""

    lp: StandardLP
    findings: list[str] = field(default_factory=list)
    removed_rows: list[int] = field(default_factory=list)
    infeasible: bool = False


def validate(lp: StandardLP, numeric: str = RATIONAL) -> ValidationReport:
    """Check dimensions, drop dependent rows, flag negative right-hand sides.

    Rational mode does exact row reduction of [A | b]; a dependent row whose
    reduction leaves a nonzero right-hand side marks the LP infeasible.
    Float mode uses a QR rank estimate (row choice may differ from the exact
    path, the surviving row space is the same up to tolerance).
    """
    findings: list[str] = []
    if any(len(row) != lp.n for row in lp.A) or len(lp.b) != lp.m:
        raise LpFormatError("dimension mismatch between A, b and c")
    if len(lp.provenance) != lp.n:
        raise LpFormatError("provenance must tag every column")

    for i, bi in enumerate(lp.b):
        if bi < 0:
            findings.append(f"b[{i}] < 0 (allowed; phase 1 will handle)")

    if numeric == RATIONAL:
        removed, infeasible = _dependent_rows_exact(lp)
    else:
        removed, infeasible = _dependent_rows_float(lp)

    for i in removed:
        findings.append(f"row {i} linearly dependent, removed")
    if infeasible:
        findings.append("dependent rows are inconsistent: LP infeasible")

    keep = [i for i in range(lp.m) if i not in set(removed)]
    cleaned = StandardLP(
        A=[lp.A[i] for i in keep],
        b=[lp.b[i] for i in keep],
        c=lp.c,
        provenance=lp.provenance,
        origin=lp.origin,
        name=lp.name,
    )
    return ValidationReport(lp=cleaned, findings=findings,
                            removed_rows=removed, infeasible=infeasible)


def _dependent_rows_exact(lp: StandardLP):
    m, n = lp.m, lp.n
    work = [list(lp.A[i]) + [lp.b[i]] for i in range(m)]
    removed: list[int] = []
    infeasible = False
    pivots: list[tuple[int, int]] = []  # (kept row, its leading column)
    for i in range(m):
        for pr, pc in pivots:
            factor = work[i][pc]
            if factor != 0:
                prow = work[pr]
                work[i] = [a - factor * p for a, p in zip(work[i], prow)]
        lead = next((j for j in range(n) if work[i][j] != 0), None)
        if lead is None:
            if work[i][n] != 0:
                infeasible = True
            removed.append(i)
            continue
        inv = Fraction(1) / work[i][lead]
        work[i] = [v * inv for v in work[i]]
        pivots.append((i, lead))
    return removed, infeasible


def _dependent_rows_float(lp: StandardLP):
    import numpy as np

    A = np.array([[float(v) for v in row] for row in lp.A], dtype=float)
    b = np.array([float(v) for v in lp.b], dtype=float)
    m = lp.m
    if m == 0:
        return [], False
    aug = np.hstack([A, b.reshape(-1, 1)])
    removed: list[int] = []
    infeasible = False
    # incremental Gram-Schmidt on rows keeps the earliest independent rows,
    # matching the exact path's row choice
    kept: list[np.ndarray] = []
    scale = max(1.0, float(np.max(np.abs(A)) if A.size else 1.0))
    for i in range(m):
        v = aug[i].copy()
        for q in kept:
            v -= (v @ q) * q
        norm = np.linalg.norm(v[:-1])
        if norm <= 1e-10 * scale:
            removed.append(i)
            if abs(v[-1]) > 1e-8 * (1.0 + abs(b[i])):
                infeasible = True
            continue
        full = np.linalg.norm(v)
        kept.append(v / full)
    return removed, infeasible


def basic_solution(lp: StandardLP, basis: Basis, numeric: str = RATIONAL,
                   tol: float = 1e-9) -> BasicSolution:
    """Solve A_B x_B = b and report degeneracy/feasibility of the point."""
    from .basis_engine import BasisEngine

    engine = BasisEngine(lp, numeric=numeric, tol=tol)
    engine.set_basis(basis)
    return engine.basic_solution()

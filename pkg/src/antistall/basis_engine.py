"""Basis factorization and the two linear-algebra queries of the simplex loop.

``BasisEngine`` owns a factorization of the basis matrix A_B and answers

* ``tableau_column(f)``  -- the column A_B^{-1} A_f, indexed by basis position,
* ``reduced_costs()``    -- c_N - (c_B A_B^{-1}) A_N with an optimality flag.

Float mode uses an LU factorization with partial pivoting (scipy) plus
product-form eta updates on column replacement; it refactorizes after a fixed
number of updates or when a residual check detects drift.  Rational mode runs
an exact fraction LU and always refactorizes, trading speed for exactness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .lp_model import Basis, BasicSolution, StandardLP
from .scalars import FLOAT, RATIONAL, Tolerances

REFACTOR_CAP = 50
DRIFT_TOL = 1e-6


class SingularBasisError(ValueError):
    """The chosen basis matrix is singular.

    ``column`` names the offending basis column (a column index of A that is
    linearly dependent on the preceding basis columns).
    """

    def __init__(self, column: int):
        super().__init__(f"singular basis: column {column} is dependent")
        self.column = column


class _ExactLU:
    """Fraction LU with row pivoting: P A_B = L U, solves exact."""

    def __init__(self, cols: list[list[Fraction]], order: tuple[int, ...]):
        m = len(cols[0]) if cols else 0
        if len(cols) != m:
            raise SingularBasisError(order[0] if order else -1)
        # work on rows: U starts as A_B, L filled in below the diagonal
        U = [[cols[j][i] for j in range(m)] for i in range(m)]
        L = [[Fraction(0)] * m for _ in range(m)]
        perm = list(range(m))
        for k in range(m):
            p = next((r for r in range(k, m) if U[r][k] != 0), None)
            if p is None:
                raise SingularBasisError(order[k])
            if p != k:
                U[k], U[p] = U[p], U[k]
                L[k], L[p] = L[p], L[k]
                perm[k], perm[p] = perm[p], perm[k]
            L[k][k] = Fraction(1)
            inv = Fraction(1) / U[k][k]
            for r in range(k + 1, m):
                if U[r][k] != 0:
                    f = U[r][k] * inv
                    L[r][k] = f
                    U[r] = [a - f * u for a, u in zip(U[r], U[k])]
        self.L, self.U, self.perm, self.m = L, U, perm, m

    def solve(self, v):
        # A_B x = v  =>  L (U x) = P v
        m = self.m
        pv = [v[self.perm[i]] for i in range(m)]
        y = [Fraction(0)] * m
        for i in range(m):
            y[i] = pv[i] - sum(self.L[i][j] * y[j] for j in range(i) if self.L[i][j])
        x = [Fraction(0)] * m
        for i in range(m - 1, -1, -1):
            s = self.U[i][i + 1:]
            acc = y[i] - sum(u * x[i + 1 + j] for j, u in enumerate(s) if u)
            x[i] = acc / self.U[i][i]
        return x

    def solve_transpose(self, u):
        # A_B^T y = u  =>  U^T (L^T P y) = u
        m = self.m
        z = [Fraction(0)] * m
        for i in range(m):
            acc = u[i] - sum(self.U[j][i] * z[j] for j in range(i) if self.U[j][i])
            z[i] = acc / self.U[i][i]
        w = [Fraction(0)] * m
        for i in range(m - 1, -1, -1):
            w[i] = z[i] - sum(self.L[j][i] * w[j] for j in range(i + 1, m) if self.L[j][i])
        y = [Fraction(0)] * m
        for i in range(m):
            y[self.perm[i]] = w[i]
        return y


@dataclass
class _Eta:
    """Product-form update: basis matrix gains column d at position r."""

    r: int
    d: np.ndarray
    dr: float


class _FloatLU:
    """LAPACK LU with partial pivoting plus a journal of eta updates."""

    def __init__(self, matrix: np.ndarray, order: tuple[int, ...], pivot_tol: float):
        self.m = matrix.shape[0]
        if self.m:
            lu, piv = lu_factor(matrix, check_finite=False)
            diag = np.abs(np.diag(lu))
            scale = max(1.0, float(np.max(np.abs(matrix))))
            bad = np.nonzero(diag <= pivot_tol * scale)[0]
            if bad.size:
                raise SingularBasisError(order[int(bad[0])])
            self.lu = (lu, piv)
        self.etas: list[_Eta] = []

    def solve(self, v: np.ndarray) -> np.ndarray:
        w = lu_solve(self.lu, v, check_finite=False)
        for e in self.etas:
            wr = w[e.r] / e.dr
            w -= e.d * wr
            w[e.r] = wr
        return w

    def solve_transpose(self, u: np.ndarray) -> np.ndarray:
        w = np.array(u, dtype=float)
        for e in reversed(self.etas):
            w[e.r] = (w[e.r] - float(e.d @ w) + e.d[e.r] * w[e.r]) / e.dr
        return lu_solve(self.lu, w, trans=1, check_finite=False)

    def push_eta(self, r: int, d: np.ndarray):
        dr = float(d[r])
        eta = d.copy()
        eta[r] = 0.0
        self.etas.append(_Eta(r=r, d=eta, dr=dr))


class BasisEngine:
    """Maintains the factorization of A_B across pivots for one solver run."""

    def __init__(self, lp: StandardLP, numeric: str = RATIONAL, tol: float = 1e-9,
                 refactor_cap: int = REFACTOR_CAP):
        self.lp = lp
        self.numeric = numeric
        self.tols = Tolerances.for_lp(lp.b, lp.c, base=tol)
        self.refactor_cap = refactor_cap
        self.basis: Basis | None = None
        self.age = 0
        self._lu = None
        if numeric == FLOAT:
            self.A_np = np.array([[float(v) for v in row] for row in lp.A], dtype=float)
            self.b_np = np.array([float(v) for v in lp.b], dtype=float)
            self.c_np = np.array([float(v) for v in lp.c], dtype=float)
        elif numeric != RATIONAL:
            raise ValueError(f"unknown numeric mode {numeric!r}")

    # -- factorization lifecycle ------------------------------------------

    def set_basis(self, basis: Basis):
        if len(basis.order) != self.lp.m:
            raise SingularBasisError(basis.order[-1] if basis.order else -1)
        for j in basis.order:
            if not 0 <= j < self.lp.n:
                raise ValueError(f"basis column {j} out of range")
        self.basis = basis
        self._refactorize()

    def _refactorize(self):
        order = self.basis.order
        if self.numeric == RATIONAL:
            cols = [self.lp.column(j) for j in order]
            self._lu = _ExactLU(cols, order)
        else:
            matrix = self.A_np[:, list(order)] if order else np.zeros((0, 0))
            self._lu = _FloatLU(matrix, order, self.tols.pivot)
        self.age = 0

    def replace_column(self, position: int, entering: int, tableau_col=None):
        """Swap basis column at ``position`` for ``entering`` and update factors."""
        order = list(self.basis.order)
        order[position] = entering
        self.basis = Basis(tuple(order))
        if self.numeric == RATIONAL:
            # exactness over speed: no eta journal in rational mode
            self._refactorize()
            return
        if tableau_col is None or self.age + 1 >= self.refactor_cap:
            self._refactorize()
            return
        d = np.asarray(tableau_col, dtype=float)
        if abs(d[position]) <= self.tols.pivot:
            self._refactorize()
            return
        self._lu.push_eta(position, d)
        self.age += 1

    # -- queries ------------------------------------------------------------

    def tableau_column(self, f: int):
        """A_B^{-1} A_f, ordered by basis position.  f must be nonbasic."""
        if f in self.basis.members:
            raise ValueError(f"column {f} is basic; tableau column needs a nonbasic index")
        if self.numeric == RATIONAL:
            return self._lu.solve(self.lp.column(f))
        col = self.A_np[:, f]
        w = self._lu.solve(col)
        if self._lu.etas:
            residual = self.A_np[:, list(self.basis.order)] @ w - col
            scale = 1.0 + float(np.max(np.abs(col))) if col.size else 1.0
            if float(np.max(np.abs(residual))) / scale > DRIFT_TOL:
                self._refactorize()
                w = self._lu.solve(col)
        return w

    def solve_b(self):
        """x_B = A_B^{-1} b."""
        if self.numeric == RATIONAL:
            return self._lu.solve(self.lp.b)
        return self._lu.solve(self.b_np)

    def duals(self):
        """pi with A_B^T pi = c_B."""
        order = list(self.basis.order)
        if self.numeric == RATIONAL:
            return self._lu.solve_transpose([self.lp.c[j] for j in order])
        return self._lu.solve_transpose(self.c_np[order])

    def reduced_costs(self):
        """Reduced costs of all nonbasic columns plus the optimality flag."""
        n = self.lp.n
        nonbasic = self.basis.nonbasic(n)
        pi = self.duals()
        if self.numeric == RATIONAL:
            values = {}
            for j in nonbasic:
                col = self.lp.column(j)
                values[j] = self.lp.c[j] - sum(p * a for p, a in zip(pi, col) if a)
            optimal = all(v >= 0 for v in values.values())
        else:
            cols = self.A_np[:, list(nonbasic)] if nonbasic else np.zeros((self.lp.m, 0))
            rc = self.c_np[list(nonbasic)] - cols.T @ pi
            values = {j: float(v) for j, v in zip(nonbasic, rc)}
            optimal = all(v >= -self.tols.c_zero for v in values.values())
        return ReducedCosts(values=values, nonbasic=nonbasic, optimal=optimal)

    def basic_solution(self) -> BasicSolution:
        xb = self.solve_b()
        n = self.lp.n
        if self.numeric == RATIONAL:
            x = [Fraction(0)] * n
            for pos, j in enumerate(self.basis.order):
                x[j] = xb[pos]
            zero = tuple(sorted(j for j in self.basis.order if x[j] == 0))
            feasible = all(x[j] >= 0 for j in self.basis.order)
        else:
            x = [0.0] * n
            for pos, j in enumerate(self.basis.order):
                x[j] = float(xb[pos])
            zero = tuple(sorted(j for j in self.basis.order
                                if abs(x[j]) <= self.tols.x_zero))
            feasible = all(x[j] >= -self.tols.x_zero for j in self.basis.order)
        return BasicSolution(x=x, basis=self.basis, zero_basics=zero, feasible=feasible)


@dataclass
class ReducedCosts:
    values: dict[int, object]       # nonbasic index -> reduced cost
    nonbasic: tuple[int, ...]
    optimal: bool

    def negatives(self, numeric: str, c_zero: float):
        if numeric == RATIONAL:
            return [j for j in self.nonbasic if self.values[j] < 0]
        return [j for j in self.nonbasic if self.values[j] < -c_zero]


def factorize(lp: StandardLP, basis: Basis, numeric: str = RATIONAL,
              tol: float = 1e-9) -> BasisEngine:
    """Factorize A_B, raising ``SingularBasisError`` with the dependent column."""
    engine = BasisEngine(lp, numeric=numeric, tol=tol)
    engine.set_basis(basis)
    return engine

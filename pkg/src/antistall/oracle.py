"""Brute-force ground truth for small LPs: enumerate every basis exactly.

The oracle walks all C(n, m) column subsets, solves each nonsingular system
with its own fraction Gaussian elimination (deliberately not sharing the
solver's LU path), and reports feasibility, degeneracy, optimality and dual
feasibility per basis, the distinct vertices, the exact optimum, the extreme
nonzero coordinates (largest and smallest over all basic feasible solutions)
and unboundedness certificates.  Everything is exact rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .lp_model import Basis, StandardLP

BASIS_CAP = 10 ** 6

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"


class OracleCapError(ValueError):
    """C(n, m) exceeds the enumeration cap."""


def solve_square_exact(cols: list[list[Fraction]], rhs: list[Fraction]):
    """Solve the square system with columns ``cols`` by plain elimination.

    Returns None when singular.  Independent of the solver's factorization.
    """
    m = len(rhs)
    aug = [[cols[j][i] for j in range(m)] + [rhs[i]] for i in range(m)]
    for k in range(m):
        p = next((r for r in range(k, m) if aug[r][k] != 0), None)
        if p is None:
            return None
        if p != k:
            aug[k], aug[p] = aug[p], aug[k]
        inv = Fraction(1) / aug[k][k]
        aug[k] = [v * inv for v in aug[k]]
        for r in range(m):
            if r != k and aug[r][k] != 0:
                f = aug[r][k]
                aug[r] = [a - f * p_ for a, p_ in zip(aug[r], aug[k])]
    return [aug[i][m] for i in range(m)]


@dataclass
class BasisInfo:
    """One enumerated basis with its basic solution and classification."""

    order: tuple[int, ...]
    x: tuple[Fraction, ...]
    feasible: bool
    degenerate: bool
    objective: Fraction
    dual_feasible: bool | None      # c_N - c_B A_B^{-1} A_N >= 0; None if infeasible
    optimal: bool = False           # feasible and objective equals the optimum


@dataclass
class VertexInfo:
    """A distinct basic feasible point and the bases that induce it."""

    x: tuple[Fraction, ...]
    objective: Fraction
    bases: list[tuple[int, ...]]
    degenerate: bool
    optimal: bool = False


@dataclass
class OracleSummary:
    n: int
    m: int
    status: str
    bases: list[BasisInfo] = field(default_factory=list)
    vertices: list[VertexInfo] = field(default_factory=list)
    singular: int = 0
    optimum: Fraction | None = None
    optimal_vertex: tuple[Fraction, ...] | None = None
    optimal_basis: tuple[int, ...] | None = None    # dual feasible
    delta: Fraction | None = None                   # smallest nonzero coordinate
    Delta: Fraction | None = None                   # largest nonzero coordinate

    def vertex_of(self, x) -> VertexInfo | None:
        key = tuple(x)
        for v in self.vertices:
            if v.x == key:
                return v
        return None


def enumerate_bases(lp: StandardLP, cap: int = BASIS_CAP) -> OracleSummary:
    """Enumerate all bases of the LP; exact rational arithmetic throughout."""
    n, m = lp.n, lp.m
    if math.comb(n, m) > cap:
        raise OracleCapError(f"C({n},{m}) = {math.comb(n, m)} exceeds cap {cap}")
    cols = [lp.column(j) for j in range(n)]

    infos: list[BasisInfo] = []
    singular = 0
    for subset in combinations(range(n), m):
        xb = solve_square_exact([cols[j] for j in subset], lp.b)
        if xb is None:
            singular += 1
            continue
        x = [Fraction(0)] * n
        for j, v in zip(subset, xb):
            x[j] = v
        feasible = all(v >= 0 for v in xb)
        degenerate = any(v == 0 for v in xb)
        objective = sum(lp.c[j] * x[j] for j in range(n))
        dual_feasible = None
        if feasible:
            dual_feasible = _dual_feasible(lp, cols, subset)
        infos.append(BasisInfo(order=subset, x=tuple(x), feasible=feasible,
                               degenerate=degenerate, objective=objective,
                               dual_feasible=dual_feasible))

    feasible_infos = [bi for bi in infos if bi.feasible]
    if not feasible_infos:
        return OracleSummary(n=n, m=m, status=INFEASIBLE,
                             bases=infos, singular=singular)

    if _has_unbounded_ray(lp, cols, feasible_infos):
        return OracleSummary(n=n, m=m, status=UNBOUNDED,
                             bases=infos, singular=singular)

    optimum = min(bi.objective for bi in feasible_infos)
    for bi in infos:
        bi.optimal = bi.feasible and bi.objective == optimum

    vertices: dict[tuple, VertexInfo] = {}
    for bi in feasible_infos:
        v = vertices.get(bi.x)
        if v is None:
            nonzeros = sum(1 for t in bi.x if t != 0)
            vertices[bi.x] = VertexInfo(x=bi.x, objective=bi.objective,
                                        bases=[bi.order],
                                        degenerate=nonzeros < m,
                                        optimal=bi.objective == optimum)
        else:
            v.bases.append(bi.order)

    nonzero = [v for bi in feasible_infos for v in bi.x if v != 0]
    delta = min(nonzero) if nonzero else None
    Delta = max(nonzero) if nonzero else None

    opt_basis = next((bi.order for bi in feasible_infos
                      if bi.optimal and bi.dual_feasible), None)
    opt_vertex = next(bi.x for bi in feasible_infos if bi.optimal)

    return OracleSummary(
        n=n, m=m, status=OPTIMAL, bases=infos,
        vertices=sorted(vertices.values(), key=lambda v: v.x),
        singular=singular, optimum=optimum, optimal_vertex=opt_vertex,
        optimal_basis=opt_basis, delta=delta, Delta=Delta,
    )


def _tableau(lp: StandardLP, cols, basis: tuple[int, ...]):
    """Rows of A_B^{-1} A, via one inverse application per basis row."""
    m = len(basis)
    bcols = [cols[j] for j in basis]
    inv_cols = []
    for k in range(m):
        e = [Fraction(0)] * m
        e[k] = Fraction(1)
        inv_cols.append(solve_square_exact(bcols, e))
    # inv_cols[k] is A_B^{-1} e_k, so A_B^{-1} v = sum v_k inv_cols[k]
    return inv_cols


def _apply_inverse(inv_cols, v):
    m = len(inv_cols)
    out = [Fraction(0)] * m
    for k in range(m):
        vk = v[k]
        if vk:
            col = inv_cols[k]
            for i in range(m):
                if col[i]:
                    out[i] += vk * col[i]
    return out


def _reduced_costs(lp: StandardLP, cols, basis: tuple[int, ...]):
    m = len(basis)
    bcols = [cols[j] for j in basis]
    # pi solves A_B^T pi = c_B: columns of A_B^T are rows of A_B
    rows = [[bcols[j][i] for j in range(m)] for i in range(m)]
    pi = solve_square_exact([[rows[i][k] for i in range(m)] for k in range(m)],
                            [lp.c[j] for j in basis])
    members = set(basis)
    rc = {}
    for j in range(lp.n):
        if j in members:
            continue
        rc[j] = lp.c[j] - sum(p * a for p, a in zip(pi, cols[j]) if a)
    return rc


def _dual_feasible(lp, cols, basis) -> bool:
    rc = _reduced_costs(lp, cols, basis)
    return all(v >= 0 for v in rc.values())


def _has_unbounded_ray(lp, cols, feasible_infos) -> bool:
    """A feasible basis with rc_f < 0 and tableau column <= 0 certifies unboundedness."""
    for bi in feasible_infos:
        rc = _reduced_costs(lp, cols, bi.order)
        negatives = [j for j, v in rc.items() if v < 0]
        if not negatives:
            continue
        inv_cols = _tableau(lp, cols, bi.order)
        for f in negatives:
            col = _apply_inverse(inv_cols, cols[f])
            if all(v <= 0 for v in col):
                return True
    return False


@dataclass
class OracleOptimum:
    status: str
    value: Fraction | None
    x: tuple[Fraction, ...] | None
    basis: Basis | None


def oracle_optimum(lp: StandardLP, cap: int = BASIS_CAP) -> OracleOptimum:
    """Exact optimum (value, vertex, a dual-feasible basis) by enumeration."""
    summary = enumerate_bases(lp, cap=cap)
    if summary.status != OPTIMAL:
        return OracleOptimum(status=summary.status, value=None, x=None, basis=None)
    basis = Basis(summary.optimal_basis) if summary.optimal_basis else None
    return OracleOptimum(status=OPTIMAL, value=summary.optimum,
                         x=summary.optimal_vertex, basis=basis)


def max_subdeterminant(A: list[list[Fraction]], max_order: int = 4) -> Fraction:
    """Largest |det| over square submatrices up to ``max_order``; exact.

    Exhaustive, so only sensible for desk-scale matrices.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    best = Fraction(0)
    for order in range(1, min(m, n, max_order) + 1):
        for rows in combinations(range(m), order):
            sub_rows = [A[i] for i in rows]
            for cols_idx in combinations(range(n), order):
                det = _det([[r[j] for j in cols_idx] for r in sub_rows])
                if abs(det) > best:
                    best = abs(det)
    return best


def _det(M: list[list[Fraction]]) -> Fraction:
    k = len(M)
    M = [row[:] for row in M]
    det = Fraction(1)
    for col in range(k):
        p = next((r for r in range(col, k) if M[r][col] != 0), None)
        if p is None:
            return Fraction(0)
        if p != col:
            M[col], M[p] = M[p], M[col]
            det = -det
        det *= M[col][col]
        inv = Fraction(1) / M[col][col]
        for r in range(col + 1, k):
            if M[r][col] != 0:
                f = M[r][col] * inv
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return det

"""Pivot-count bound formulas and verdicts of observed runs against them.

The caps, for an LP with n columns and m rows (n > m):

* degenerate streak at one non-optimal vertex: n - m - 1, tightening to
  min(n - m - 1, m - 1) when the guiding direction joins two basic solutions;
* distinct basic feasible solutions under the guided rule:
  (n - m) * ceil(lambda * ln(m * Delta / delta)) with
  lambda = (n - m) * Delta / delta, where Delta and delta are the largest and
  smallest nonzero coordinate over all basic feasible solutions;
* total pivots to an optimal basis: min(n - m, m) times the vertex cap;
* for integral data the Cramer surrogates Delta <= |b|_1 * Delta_A and
  delta >= 1 / Delta_A give the fully combinatorial cap
  min(n-m, m) * (n-m) * ceil((n-m) * Delta_A^2 |b|_1 * ln(m * Delta_A^2 |b|_1)).

Logs are evaluated by ``build_report``; each verdict is pass/fail/n-a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .scalars import RATIONAL

CEIL_GUARD = 1e-12


def _ceil_guarded(value: float) -> int:
    # float noise at exact integers must not bump the ceiling up
    return math.ceil(value - CEIL_GUARD)


def degenerate_pivot_cap(n: int, m: int, guided: bool = False) -> int:
    """Max consecutive degenerate pivots at a non-optimal vertex."""
    if not n > m >= 1:
        raise ValueError(f"need n > m >= 1, got n={n}, m={m}")
    cap = n - m - 1
    if guided:
        cap = min(cap, m - 1)
    return cap


def distinct_vertex_cap(n: int, m: int, Delta, delta) -> int:
    """Cap on distinct basic feasible solutions under the guided rule."""
    lam = _lambda(n, m, Delta, delta)
    return (n - m) * _ceil_guarded(lam * math.log(m * float(Delta) / float(delta)))


def total_pivot_cap(n: int, m: int, Delta, delta) -> int:
    """Cap on total pivots (degenerate and not) to reach an optimal basis."""
    if not n > m >= 1:
        raise ValueError(f"need n > m >= 1, got n={n}, m={m}")
    _check_coords(Delta, delta)
    return min(n - m, m) * distinct_vertex_cap(n, m, Delta, delta)


def integral_pivot_cap(n: int, m: int, Delta_A, b_l1) -> int:
    """The all-integral-data cap via the Cramer's-rule surrogates."""
    if not n > m >= 1:
        raise ValueError(f"need n > m >= 1, got n={n}, m={m}")
    for label, v in (("Delta_A", Delta_A), ("|b|_1", b_l1)):
        if isinstance(v, Fraction) and v.denominator != 1:
            raise ValueError(f"{label} must be integral, got {v}")
        if v < 1:
            raise ValueError(f"{label} must be >= 1, got {v}")
    core = int(Delta_A) ** 2 * int(b_l1)
    return min(n - m, m) * (n - m) * _ceil_guarded(
        (n - m) * core * math.log(m * core))


def _lambda(n, m, Delta, delta):
    _check_coords(Delta, delta)
    return (n - m) * float(Delta) / float(delta)


def _check_coords(Delta, delta):
    if delta is None or Delta is None:
        raise ValueError("Delta and delta are required")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if Delta < delta:
        raise ValueError(f"need Delta >= delta, got {Delta} < {delta}")


def contraction_check(gap_before, gap_after, lam, numeric: str = RATIONAL) -> bool:
    """gap_after <= (1 - 1/lambda) * gap_before, exact or with 1e-9 slack."""
    if gap_before < 0 or gap_after < 0:
        raise ValueError("optimality gaps must be nonnegative")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if numeric == RATIONAL:
        bound = (1 - Fraction(1) / Fraction(lam)) * gap_before
        return gap_after <= bound
    bound = (1.0 - 1.0 / float(lam)) * float(gap_before)
    return float(gap_after) <= bound + 1e-9 * (1.0 + abs(bound))


@dataclass
class BoundReport:
    """Caps for one instance next to what a run actually did."""

    n: int
    m: int
    Delta: Fraction | None = None
    delta: Fraction | None = None
    Delta_A: Fraction | None = None
    b_l1: Fraction | None = None
    guided: bool = True
    theorem1_cap: int | None = None
    remark1_cap: int | None = None
    theorem2_total: int | None = None
    corollary1_total: int | None = None
    vertex_cap: int | None = None
    observed_max_consec_degenerate: int | None = None
    observed_distinct_vertices: int | None = None
    observed_total_pivots: int | None = None
    observed_finisher_pivots: int | None = None
    verdicts: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(v != "fail" for v in self.verdicts.values())


def build_report(result, lp, Delta=None, delta=None, Delta_A=None,
                 guided: bool = True) -> BoundReport:
    """Compare a SolveResult's counters against every computable cap.

    ``Delta``/``delta`` normally come from the oracle; ``Delta_A`` from
    exhaustive minors.  Caps that lack their inputs get verdict "n/a".
    """
    n, m = lp.n, lp.m
    report = BoundReport(
        n=n, m=m, Delta=Delta, delta=delta, Delta_A=Delta_A, guided=guided,
        observed_max_consec_degenerate=result.max_consec_degenerate,
        observed_distinct_vertices=result.distinct_vertices,
        observed_total_pivots=result.pivots_total,
        observed_finisher_pivots=result.finisher_pivots,
    )
    report.theorem1_cap = degenerate_pivot_cap(n, m, guided=False)
    report.remark1_cap = degenerate_pivot_cap(n, m, guided=True)
    report.verdicts["thm1"] = _verdict(result.max_consec_degenerate, report.theorem1_cap)
    if guided:
        report.verdicts["remark1"] = _verdict(result.max_consec_degenerate,
                                              report.remark1_cap)
    report.verdicts["finisher"] = _verdict(result.finisher_pivots, n - m)

    if Delta is not None and delta is not None and delta > 0:
        report.theorem2_total = total_pivot_cap(n, m, Delta, delta)
        report.vertex_cap = distinct_vertex_cap(n, m, Delta, delta)
        report.verdicts["thm2"] = _verdict(result.pivots_total, report.theorem2_total)
        report.verdicts["lemma1"] = _verdict(result.distinct_vertices, report.vertex_cap)
    else:
        report.verdicts["thm2"] = "n/a"

    integral = all(v.denominator == 1 for row in lp.A for v in row) and \
        all(v.denominator == 1 for v in lp.b)
    if integral:
        report.b_l1 = sum(abs(v) for v in lp.b)
        if Delta_A is not None and Delta_A >= 1 and report.b_l1 >= 1:
            report.corollary1_total = integral_pivot_cap(n, m, Delta_A, report.b_l1)
            report.verdicts["cor1"] = _verdict(result.pivots_total,
                                               report.corollary1_total)
    return report


def _verdict(observed, cap) -> str:
    if observed is None or cap is None:
        return "n/a"
    return "pass" if observed <= cap else "fail"

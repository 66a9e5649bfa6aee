"""MPS reading and writing for the experiment pipeline.

The reader accepts both fixed-column and whitespace-separated files through
one token-based scanner: section headers start in column 1, data lines are
indented, and optional RHS/RANGES/BOUNDS set names are recognized by token
count (with a numeric-literal check for the ambiguous three-token bound
lines).  Supported sections: NAME, OBJSENSE, ROWS, COLUMNS, RHS, RANGES,
BOUNDS, ENDATA.  RANGES rows expand into their two-sided reading as a pair
of inequality rows.  FR and MI bounds are rejected (free variables are
unsupported downstream), MARKER lines are rejected (no integer variables),
and an RHS entry on the objective row is ignored with a warning.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .lp_model import EQ, GE, LE, GeneralLP
from .scalars import as_fraction, decimal_str

SECTIONS = ("NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA")

_ROW_TYPES = {"N", "L", "G", "E"}
_VALUE_BOUNDS = {"UP", "LO", "FX"}
_FLAG_BOUNDS = {"BV", "PL"}
_REJECTED_BOUNDS = {"FR", "MI"}


class MpsParseError(ValueError):
    """Parse failure with the 1-based source line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class MpsDocument:
    """Raw section streams of one MPS file, before LP assembly."""

    name: str = "MPS"
    maximize: bool = False
    objective_row: str | None = None
    rows: list[tuple[str, str]] = field(default_factory=list)          # (type, name)
    columns: list[tuple[str, str, Fraction]] = field(default_factory=list)
    rhs: dict[str, Fraction] = field(default_factory=dict)
    ranges: dict[str, Fraction] = field(default_factory=dict)
    bounds: list[tuple[str, str, Fraction | None]] = field(default_factory=list)


def _is_number(token: str) -> bool:
    try:
        as_fraction(token)
        return True
    except (ValueError, TypeError):
        return False


def _number(token: str, lineno: int) -> Fraction:
    try:
        return as_fraction(token)
    except (ValueError, TypeError):
        raise MpsParseError(f"expected a number, got {token!r}", lineno) from None


def parse_mps(text: str) -> GeneralLP:
    """Parse MPS text into a GeneralLP; raises ``MpsParseError`` with a line number."""
    doc = _scan(text)
    return _assemble(doc, text)


def _scan(text: str) -> MpsDocument:
    doc = MpsDocument()
    section = None
    declared: dict[str, str] = {}   # row name -> type
    seen_pairs: set[tuple[str, str]] = set()
    lineno = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line.strip() or line.lstrip().startswith("*"):
            continue
        tokens = line.split()
        if line[0] not in " \t":
            head = tokens[0].upper()
            if head not in SECTIONS:
                raise MpsParseError(f"unknown section {tokens[0]!r}", lineno)
            section = head
            if head == "NAME" and len(tokens) > 1:
                doc.name = tokens[1]
            elif head == "OBJSENSE" and len(tokens) > 1:
                doc.maximize = tokens[1].upper().startswith("MAX")
            elif head == "ENDATA":
                break
            continue

        if section == "OBJSENSE":
            doc.maximize = tokens[0].upper().startswith("MAX")
        elif section == "ROWS":
            if len(tokens) != 2 or tokens[0].upper() not in _ROW_TYPES:
                raise MpsParseError(f"bad row declaration {line.strip()!r}", lineno)
            rtype, rname = tokens[0].upper(), tokens[1]
            if rname in declared:
                raise MpsParseError(f"row {rname!r} declared twice", lineno)
            declared[rname] = rtype
            if rtype == "N":
                if doc.objective_row is not None:
                    raise MpsParseError("second N row; one objective row expected", lineno)
                doc.objective_row = rname
            else:
                doc.rows.append((rtype, rname))
        elif section == "COLUMNS":
            if "'MARKER'" in tokens:
                raise MpsParseError("MARKER lines (integer variables) are unsupported", lineno)
            if len(tokens) < 3 or len(tokens) % 2 == 0:
                raise MpsParseError(f"bad COLUMNS line {line.strip()!r}", lineno)
            col = tokens[0]
            for k in range(1, len(tokens) - 1, 2):
                row, val = tokens[k], _number(tokens[k + 1], lineno)
                if row not in declared:
                    raise MpsParseError(f"reference to undeclared row {row!r}", lineno)
                if (col, row) in seen_pairs:
                    raise MpsParseError(f"duplicate entry for column {col!r}, row {row!r}",
                                        lineno)
                seen_pairs.add((col, row))
                doc.columns.append((col, row, val))
        elif section in ("RHS", "RANGES"):
            pairs = tokens if len(tokens) % 2 == 0 else tokens[1:]
            if not pairs or len(pairs) % 2:
                raise MpsParseError(f"bad {section} line {line.strip()!r}", lineno)
            target = doc.rhs if section == "RHS" else doc.ranges
            for k in range(0, len(pairs), 2):
                row, val = pairs[k], _number(pairs[k + 1], lineno)
                if row == doc.objective_row:
                    if section == "RHS":
                        warnings.warn("RHS entry on the objective row ignored "
                                      "(objective constants unsupported)")
                        continue
                    raise MpsParseError("RANGES entry on the objective row", lineno)
                if row not in declared:
                    raise MpsParseError(f"reference to undeclared row {row!r}", lineno)
                if row in target:
                    raise MpsParseError(f"duplicate {section} entry for row {row!r}", lineno)
                target[row] = val
        elif section == "BOUNDS":
            btype = tokens[0].upper()
            if btype in _REJECTED_BOUNDS:
                raise MpsParseError(
                    f"{btype} bound: free variable unsupported", lineno)
            if btype in _VALUE_BOUNDS:
                if len(tokens) == 4:
                    col, val = tokens[2], _number(tokens[3], lineno)
                elif len(tokens) == 3 and _is_number(tokens[2]):
                    col, val = tokens[1], _number(tokens[2], lineno)
                else:
                    raise MpsParseError(f"bad bound line {line.strip()!r}", lineno)
                doc.bounds.append((btype, col, val))
            elif btype in _FLAG_BOUNDS:
                if len(tokens) == 3:
                    col = tokens[2]
                elif len(tokens) == 2:
                    col = tokens[1]
                else:
                    raise MpsParseError(f"bad bound line {line.strip()!r}", lineno)
                doc.bounds.append((btype, col, None))
            else:
                raise MpsParseError(f"unknown bound type {tokens[0]!r}", lineno)
        elif section in ("NAME", None):
            if section is None:
                raise MpsParseError(f"data before any section header: {line.strip()!r}",
                                    lineno)
        else:
            raise MpsParseError(f"unexpected data in section {section}", lineno)
    return doc


def _assemble(doc: MpsDocument, text: str) -> GeneralLP:
    eof = text.count("\n") + 1
    if doc.objective_row is None:
        raise MpsParseError("no N row: objective missing", eof)
    if not doc.columns:
        raise MpsParseError("no COLUMNS data", eof)

    col_names: list[str] = []
    col_index: dict[str, int] = {}
    for col, _, _ in doc.columns:
        if col not in col_index:
            col_index[col] = len(col_names)
            col_names.append(col)
    n = len(col_names)

    row_order = [name for _, name in doc.rows]
    row_type = {name: rtype for rtype, name in doc.rows}
    coeffs = {name: [Fraction(0)] * n for name in row_order}
    objective = [Fraction(0)] * n
    for col, row, val in doc.columns:
        j = col_index[col]
        if row == doc.objective_row:
            objective[j] = val
        else:
            coeffs[row][j] = val

    relations: list[str] = []
    rhs_list: list[Fraction] = []
    names: list[str] = []
    extra: list[tuple[list[Fraction], str, Fraction, str]] = []
    rel_of = {"L": LE, "G": GE, "E": EQ}
    for name in row_order:
        rtype = row_type[name]
        h = doc.rhs.get(name, Fraction(0))
        r = doc.ranges.get(name)
        if r is None:
            relations.append(rel_of[rtype])
            rhs_list.append(h)
            names.append(name)
            continue
        # two-sided reading of a ranged row
        if rtype == "L":          # h - |r| <= row <= h
            relations.append(LE)
            rhs_list.append(h)
            names.append(name)
            extra.append((coeffs[name], GE, h - abs(r), f"{name}.lo"))
        elif rtype == "G":        # h <= row <= h + |r|
            relations.append(GE)
            rhs_list.append(h)
            names.append(name)
            extra.append((coeffs[name], LE, h + abs(r), f"{name}.up"))
        else:                     # E: r >= 0 -> [h, h+r], r < 0 -> [h+r, h]
            low = h if r >= 0 else h + r
            high = h + r if r >= 0 else h
            relations.append(GE)
            rhs_list.append(low)
            names.append(name)
            extra.append((coeffs[name], LE, high, f"{name}.up"))

    matrix = [coeffs[name] for name in names]
    for row_coeffs, rel, rhs, name in extra:
        matrix.append(list(row_coeffs))
        relations.append(rel)
        rhs_list.append(rhs)
        names.append(name)

    lower: list[Fraction | None] = [Fraction(0)] * n
    upper: list[Fraction | None] = [None] * n
    for btype, col, val in doc.bounds:
        if col not in col_index:
            raise MpsParseError(f"bound on undeclared column {col!r}", eof)
        j = col_index[col]
        if btype == "UP":
            upper[j] = val
        elif btype == "LO":
            lower[j] = val
        elif btype == "FX":
            lower[j] = val
            upper[j] = val
        elif btype == "BV":
            lower[j] = Fraction(0)
            upper[j] = Fraction(1)
        # PL keeps the +inf default

    return GeneralLP(
        sense="max" if doc.maximize else "min",
        objective=objective,
        row_coeffs=matrix,
        row_relations=relations,
        row_rhs=rhs_list,
        lower=lower,
        upper=upper,
        col_names=col_names,
        row_names=names,
        name=doc.name,
    )


def write_mps(gp: GeneralLP) -> str:
    """Render a GeneralLP as MPS text; ``parse_mps`` round-trips it."""
    obj_name = "COST"
    taken = set(gp.row_names)
    while obj_name in taken:
        obj_name += "_"

    rel_type = {LE: "L", GE: "G", EQ: "E"}
    out = [f"NAME          {gp.name}"]
    if gp.sense == "max":
        out.append("OBJSENSE")
        out.append("    MAX")
    out.append("ROWS")
    out.append(f" N  {obj_name}")
    for rel, name in zip(gp.row_relations, gp.row_names):
        out.append(f" {rel_type[rel]}  {name}")

    out.append("COLUMNS")
    for j, col in enumerate(gp.col_names):
        # objective entry always present so empty columns survive a round trip
        entries = [(obj_name, gp.objective[j])]
        entries += [(gp.row_names[i], gp.row_coeffs[i][j])
                    for i in range(gp.m) if gp.row_coeffs[i][j] != 0]
        for k in range(0, len(entries), 2):
            chunk = entries[k:k + 2]
            parts = "   ".join(f"{name}  {decimal_str(v)}" for name, v in chunk)
            out.append(f"    {col}  {parts}")

    out.append("RHS")
    for i, name in enumerate(gp.row_names):
        if gp.row_rhs[i] != 0:
            out.append(f"    RHS  {name}  {decimal_str(gp.row_rhs[i])}")

    bound_lines = []
    for j, col in enumerate(gp.col_names):
        lo, up = gp.lower[j], gp.upper[j]
        if lo is not None and up is not None and lo == up:
            bound_lines.append(f" FX BND  {col}  {decimal_str(lo)}")
            continue
        if lo is not None and lo != 0:
            bound_lines.append(f" LO BND  {col}  {decimal_str(lo)}")
        if up is not None:
            bound_lines.append(f" UP BND  {col}  {decimal_str(up)}")
    if bound_lines:
        out.append("BOUNDS")
        out.extend(bound_lines)

    out.append("ENDATA")
    return "\n".join(out) + "\n"

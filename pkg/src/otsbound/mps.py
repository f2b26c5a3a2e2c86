"""Fixed-format MPS export of :class:`MipModel`, plus a reader for round trips.

Convex ``p**2 <= t`` terms have no MPS representation. The writer either
replaces them with tangent cuts ``t >= 2*q*p - q**2`` at ``k`` evenly spaced
points of ``[p_min, p_max]`` (a piecewise-linear under-approximation, flagged
in comment lines), or omits them, which is only exact for linear models.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, QuadraticNotRepresentable
from .model import LinearConstraint, MipModel, ModelBuilder, Sense, VarKind

logger = logging.getLogger(__name__)

OBJ_ROW = "OBJ"
_SENSE_CODE = {Sense.LE: "L", Sense.EQ: "E", Sense.GE: "G"}
_CODE_SENSE = {v: k for k, v in _SENSE_CODE.items()}


@dataclass(frozen=True)
class EpigraphStrategy:
    """``kind`` is ``"secant"`` (with ``cuts`` tangent points) or ``"omit"``."""

    kind: str = "secant"
    cuts: int = 32

    @classmethod
    def secant(cls, cuts: int = 32) -> EpigraphStrategy:
        if cuts < 1:
            raise ValueError("need at least one cut point")
        return cls("secant", cuts)

    @classmethod
    def omit(cls) -> EpigraphStrategy:
        return cls("omit", 0)


def format_number(v: float) -> str:
    """Shortest ``g`` rendering of ``v`` that fits a 12-character MPS field."""
    v = float(v)
    if v == 0:
        return "0"
    for prec in range(12, 0, -1):
        s = f"{v:.{prec}g}"
        if "e" in s:
            # "e-05" -> "e-5": every character counts in a 12-wide field
            mant, exp = s.split("e")
            s = f"{mant}e{int(exp)}"
        if len(s) <= 12:
            return s
    raise ValueError(f"cannot format {v!r} in 12 characters")


def _line(code: str, name: str, pairs=()) -> str:
    # fixed columns: 2-3 code, 5-12 name, then (15-22 name, 25-36 value) pairs
    out = f" {code:<2} {name:<8}"
    for k, (key, val) in enumerate(pairs):
        out += ("  " if k == 0 else "   ") + f"{key:<8}  {format_number(val):>12}"
    return out.rstrip()


def _cut_rows(model: MipModel, k: int) -> list[LinearConstraint]:
    rows = []
    for p, t in model.epigraph_terms:
        lo, hi = model.variables[p].lower, model.variables[p].upper
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise QuadraticNotRepresentable(
                f"{model.variables[p].name} is unbounded; tangent cuts need a finite range")
        points = [lo] if k == 1 or hi == lo else list(np.linspace(lo, hi, k))
        suffix = model.variables[t].name.split("_", 1)[-1]
        for n, q in enumerate(points, start=1):
            q = float(q)
            # t - 2*q*p >= -q**2
            rows.append(LinearConstraint(f"oa{suffix}_{n}", ((t, 1.0), (p, -2.0 * q)),
                                         Sense.GE, -q * q))
    return rows


def write_mps(model: MipModel, strategy: EpigraphStrategy | None = None,
              force: bool = False) -> str:
    """Render ``model`` as fixed-format MPS text.

    The objective constant is written as the negated right-hand side of the
    objective row, the usual convention of MPS readers.
    """
    strategy = strategy or EpigraphStrategy.secant()
    constraints = list(model.constraints)
    comments = []
    if model.epigraph_terms:
        if strategy.kind == "omit":
            if not force:
                raise QuadraticNotRepresentable(
                    "model has quadratic epigraph terms; export with tangent cuts or force omission")
            logger.warning("omitting %d epigraph terms; the exported objective is a relaxation",
                           len(model.epigraph_terms))
            comments.append("* epigraph terms p^2 <= t omitted; t is only bounded below")
        else:
            cuts = _cut_rows(model, strategy.cuts)
            constraints += cuts
            comments.append(f"* p^2 <= t approximated by {strategy.cuts} tangent cuts per term")
            comments.append("* rows oa*_* under-approximate the quadratic cost")

    columns: dict[int, list[tuple[str, float]]] = {k: [] for k in range(len(model.variables))}
    obj = {}
    for k, c in model.objective:
        obj[k] = obj.get(k, 0.0) + c
    for k, c in sorted(obj.items()):
        if c:
            columns[k].append((OBJ_ROW, c))
    for con in constraints:
        for k, c in con.coefficients:
            columns[k].append((con.name, c))

    out = [f"NAME          {model.name}"]
    out += comments
    out.append("ROWS")
    out.append(_line("N", OBJ_ROW))
    out += [_line(_SENSE_CODE[con.sense], con.name) for con in constraints]
    out.append("COLUMNS")
    in_int = False
    markers = 0
    for k, var in enumerate(model.variables):
        binary = var.kind is VarKind.BINARY
        if binary != in_int:
            tag = "'INTORG'" if binary else "'INTEND'"
            out.append(f"    {f'M{markers:07d}':<8}  'MARKER'                 {tag}")
            markers += 1
            in_int = binary
        entries = columns[k] or [(OBJ_ROW, 0.0)]
        for n in range(0, len(entries), 2):
            out.append(_line("", var.name, entries[n:n + 2]))
    if in_int:
        out.append(f"    {f'M{markers:07d}':<8}  'MARKER'                 'INTEND'")
    out.append("RHS")
    rhs = [(con.name, con.rhs) for con in constraints if con.rhs != 0]
    if model.objective_constant:
        rhs.insert(0, (OBJ_ROW, -model.objective_constant))
    for n in range(0, len(rhs), 2):
        out.append(_line("", "RHS", rhs[n:n + 2]))
    out.append("BOUNDS")
    for var in model.variables:
        out += _bound_lines(var)
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def _bound_lines(var) -> list[str]:
    lo, up = var.lower, var.upper
    if var.kind is VarKind.BINARY:
        if lo == 0 and up == 1:
            return [f" BV BND       {var.name}"]
        return [_line("LO", "BND", [(var.name, lo)]), _line("UP", "BND", [(var.name, up)])]
    if lo == up:
        return [_line("FX", "BND", [(var.name, lo)])]
    if lo == -math.inf and up == math.inf:
        return [f" FR BND       {var.name}"]
    lines = []
    if lo == -math.inf:
        lines.append(f" MI BND       {var.name}")
    elif lo != 0:
        lines.append(_line("LO", "BND", [(var.name, lo)]))
    if up != math.inf:
        lines.append(_line("UP", "BND", [(var.name, up)]))
    return lines


def read_mps(text: str) -> MipModel:
    """Parse MPS text written by :func:`write_mps` (or any MPS using the same
    section subset). Tangent-cut rows come back as ordinary rows."""
    name = ""
    section = None
    row_sense: dict[str, Sense] = {}
    row_order: list[str] = []
    obj_row = None
    cols: dict[str, dict[str, float]] = {}
    kinds: dict[str, VarKind] = {}
    rhs: dict[str, float] = {}
    bounds: dict[str, list[float]] = {}
    integer = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.startswith("*"):
            continue
        if not raw.startswith(" "):
            head = raw.split()
            section = head[0]
            if section == "NAME":
                name = head[1] if len(head) > 1 else ""
            elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"):
                raise ParseError(f"line {lineno}: unsupported section {section!r}")
            continue
        tok = raw.split()
        try:
            if section == "ROWS":
                code, rname = tok
                if code == "N":
                    obj_row = obj_row or rname
                else:
                    row_sense[rname] = _CODE_SENSE[code]
                    row_order.append(rname)
            elif section == "COLUMNS":
                if len(tok) == 3 and tok[1] == "'MARKER'":
                    integer = tok[2] == "'INTORG'"
                    continue
                var = tok[0]
                if var not in cols:
                    cols[var] = {}
                    kinds[var] = VarKind.BINARY if integer else VarKind.CONTINUOUS
                    bounds[var] = [0.0, 1.0 if integer else math.inf]
                for rname, val in zip(tok[1::2], tok[2::2]):
                    cols[var][rname] = cols[var].get(rname, 0.0) + float(val)
            elif section == "RHS":
                for rname, val in zip(tok[1::2], tok[2::2]):
                    rhs[rname] = float(val)
            elif section == "BOUNDS":
                code, var = tok[0], tok[2]
                b = bounds[var]
                val = float(tok[3]) if len(tok) > 3 else None
                if code == "UP":
                    b[1] = val
                elif code == "LO":
                    b[0] = val
                elif code == "FX":
                    b[0] = b[1] = val
                elif code == "FR":
                    b[0], b[1] = -math.inf, math.inf
                elif code == "MI":
                    b[0] = -math.inf
                elif code == "PL":
                    b[1] = math.inf
                elif code == "BV":
                    b[0], b[1] = 0.0, 1.0
                    kinds[var] = VarKind.BINARY
                else:
                    raise ParseError(f"line {lineno}: unsupported bound type {code!r}")
        except (ValueError, KeyError) as exc:
            raise ParseError(f"line {lineno}: malformed {section} entry: {raw.strip()!r}") from exc

    mb = ModelBuilder(name)
    index = {}
    for var in cols:
        index[var] = mb.add_var(var, kinds[var], *bounds[var])
    row_coefs: dict[str, dict[int, float]] = {r: {} for r in row_order}
    for var, entries in cols.items():
        for rname, val in entries.items():
            if rname == obj_row:
                mb.add_cost(index[var], val)
            elif rname in row_coefs:
                row_coefs[rname][index[var]] = val
            else:
                raise ParseError(f"column {var} references unknown row {rname!r}")
    for rname in row_order:
        mb.add_row(rname, row_coefs[rname], row_sense[rname], rhs.get(rname, 0.0))
    if obj_row in rhs:
        mb.constant = -rhs[obj_row]
    return mb.build()

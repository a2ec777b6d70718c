"""Free-format MPS export (and a reader for the same subset).

Columns are named ``C<k>`` and rows ``R<r>`` by position; the objective row
is ``OBJ``. Sections written: NAME, ROWS, COLUMNS, RHS, BOUNDS, ENDATA.
Lower bounds are written as ``LO`` (or ``FX`` for fixed columns) and finite
upper bounds as ``UP``. Numbers use ``repr`` so values round-trip exactly.
Any solver reading free MPS (HiGHS, GLPK, CBC) can load the file.
"""
from __future__ import annotations

import numpy as np

from .program import EQ, GE, LE, LPBuilder, LinearProgram

_ROW_TYPE = {LE: "L", GE: "G", EQ: "E"}
_SENSE = {v: k for k, v in _ROW_TYPE.items()}


def write_mps(lp: LinearProgram, name: str = "TIMESCHED") -> str:
    out = [f"NAME {name}", "ROWS", " N OBJ"]
    out += [f" {_ROW_TYPE[s]} R{r}" for r, s in enumerate(lp.sense)]
    out.append("COLUMNS")
    csc = lp.A.tocsc()
    for c in range(lp.num_vars):
        if lp.cost[c] != 0.0:
            out.append(f" C{c} OBJ {float(lp.cost[c])!r}")
        for k in range(csc.indptr[c], csc.indptr[c + 1]):
            out.append(f" C{c} R{csc.indices[k]} {float(csc.data[k])!r}")
    out.append("RHS")
    out += [f" RHS R{r} {float(v)!r}" for r, v in enumerate(lp.rhs) if v != 0.0]
    out.append("BOUNDS")
    for c in range(lp.num_vars):
        lo, hi = float(lp.lower[c]), float(lp.upper[c])
        if lo == hi:
            out.append(f" FX BND C{c} {lo!r}")
            continue
        if lo != 0.0:
            out.append(f" LO BND C{c} {lo!r}")
        if np.isfinite(hi):
            out.append(f" UP BND C{c} {hi!r}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def read_mps(text: str) -> LinearProgram:
    """Parse MPS produced by :func:`write_mps`; variable keys become column names."""
    section = None
    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    cols: dict[str, dict] = {}
    col_order: list[str] = []
    rhs: dict[str, float] = {}
    lower: dict[str, float] = {}
    upper: dict[str, float] = {}
    for raw in text.splitlines():
        if not raw.strip() or raw.startswith("*"):
            continue
        if not raw[0].isspace():
            section = raw.split()[0]
            continue
        toks = raw.split()
        if section == "ROWS":
            if toks[0] != "N":
                row_sense[toks[1]] = _SENSE[toks[0]]
                row_order.append(toks[1])
        elif section == "COLUMNS":
            col = toks[0]
            if col not in cols:
                cols[col] = {}
                col_order.append(col)
            for rname, val in zip(toks[1::2], toks[2::2]):
                cols[col][rname] = float(val)
        elif section == "RHS":
            for rname, val in zip(toks[1::2], toks[2::2]):
                rhs[rname] = float(val)
        elif section == "BOUNDS":
            kind, _, col, val = toks
            if col not in cols:
                cols[col] = {}
                col_order.append(col)
            if kind in ("LO", "FX"):
                lower[col] = float(val)
            if kind in ("UP", "FX"):
                upper[col] = float(val)
    b = LPBuilder()
    index = {}
    for col in col_order:
        index[col] = b.add_var(col, cols[col].get("OBJ", 0.0), lower.get(col, 0.0), upper.get(col, np.inf))
    row_entries: dict[str, list] = {r: [] for r in row_order}
    for col in col_order:
        for rname, val in cols[col].items():
            if rname != "OBJ":
                row_entries[rname].append((index[col], val))
    for r in row_order:
        b.add_row(row_entries[r], row_sense[r], rhs.get(r, 0.0), r)
    return b.build()

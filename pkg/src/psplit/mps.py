"""Free-format MPS export and import for :class:`~psplit.reformulate.FlatMip`.

Linear rows go through ROWS/COLUMNS/RHS as usual, binaries sit between
``MARKER INTORG`` / ``INTEND`` lines and every variable gets explicit LO and
UP bounds. A convex row is an ``L`` row whose linear part is written in
COLUMNS and whose diagonal curvature follows in its own ``QCMATRIX`` section.
The objective constant is stored as ``-constant`` on the objective's RHS
entry, the usual convention. Numbers are written with ``repr`` so a file
read back gives bit-identical coefficients.
"""

from __future__ import annotations

from pathlib import Path

from .model import UnivariateTerm
from .reformulate import BINARY, CONTINUOUS, ConvexRow, FlatMip, LinRow

__all__ = ["MpsError", "write_mps", "read_mps", "export_mps", "to_mps_text", "from_mps_text"]

OBJ = "obj"
_SENSE = {"<=": "L", ">=": "G", "==": "E", "=": "E"}
_UNSENSE = {"L": "<=", "G": ">=", "E": "=="}


class MpsError(ValueError):
    pass


def _num(v: float) -> str:
    return repr(float(v))


def to_mps_text(f: FlatMip, name: str | None = None) -> str:
    names = [v.name for v in f.variables]
    if len(set(names)) != len(names):
        raise MpsError("variable names are not unique")
    rows: list[tuple[str, str]] = []
    # column -> [(row, value)]
    cols: dict[int, list[tuple[str, float]]] = {k: [] for k in range(len(names))}
    for i, v in sorted(f.objective.items()):
        if v != 0.0:
            cols[i].append((OBJ, v))
    rhs: list[tuple[str, float]] = []
    if f.objective_constant != 0.0:
        rhs.append((OBJ, -f.objective_constant))
    for row in f.linear_rows:
        rows.append((_SENSE[row.sense], row.name))
        for i, v in sorted(row.coeffs.items()):
            if v != 0.0:
                cols[i].append((row.name, v))
        if row.rhs != 0.0:
            rhs.append((row.name, row.rhs))
    quads = []
    for row in f.convex_rows:
        quad, lin, r = row.canonical()
        rows.append(("L", row.name))
        for i, v in sorted(lin.items()):
            if v != 0.0:
                cols[i].append((row.name, v))
        if r != 0.0:
            rhs.append((row.name, r))
        quads.append((row.name, sorted(quad.items())))
    row_names = [n for _, n in rows]
    if len(set(row_names)) != len(row_names) or OBJ in row_names:
        raise MpsError("row names are not unique")

    out = [f"NAME {name or f.formulation or 'psplit'}", "ROWS", f" N {OBJ}"]
    out += [f" {s} {n}" for s, n in rows]
    out.append("COLUMNS")
    in_int = False
    marker = 0
    for k, var in enumerate(f.variables):
        is_int = var.kind == BINARY
        if is_int != in_int:
            tag = "'INTORG'" if is_int else "'INTEND'"
            out.append(f" MARKER{marker} 'MARKER' {tag}")
            marker += 1
            in_int = is_int
        entries = cols[k] or [(OBJ, 0.0)]
        out += [f" {var.name} {r} {_num(v)}" for r, v in entries]
    if in_int:
        out.append(f" MARKER{marker} 'MARKER' 'INTEND'")
    out.append("RHS")
    out += [f" RHS {r} {_num(v)}" for r, v in rhs]
    out.append("BOUNDS")
    for var in f.variables:
        out.append(f" LO BND {var.name} {_num(var.lower)}")
        out.append(f" UP BND {var.name} {_num(var.upper)}")
    for rname, entries in quads:
        out.append(f"QCMATRIX {rname}")
        out += [f" {names[i]} {names[i]} {_num(v)}" for i, v in entries]
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def from_mps_text(text: str) -> FlatMip:
    f = FlatMip()
    section = None
    senses: dict[str, str] = {}
    order: list[str] = []
    col_index: dict[str, int] = {}
    coeffs: dict[str, dict[int, float]] = {}
    rhs: dict[str, float] = {}
    quad: dict[str, dict[int, float]] = {}
    qrow = None
    integer = False
    name = ""

    def col(nm: str) -> int:
        if nm not in col_index:
            raise MpsError(f"unknown column {nm}")
        return col_index[nm]

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip()
        if not line or line.startswith("*"):
            continue
        tok = line.split()
        if not raw[0].isspace():
            section = tok[0].upper()
            if section == "NAME":
                name = tok[1] if len(tok) > 1 else ""
            elif section == "QCMATRIX":
                if len(tok) != 2 or tok[1] not in senses:
                    raise MpsError(f"line {lineno}: QCMATRIX needs a known row name")
                qrow = tok[1]
                quad[qrow] = {}
            elif section == "ENDATA":
                break
            elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "OBJSENSE"):
                raise MpsError(f"line {lineno}: unsupported section {section}")
            continue
        try:
            if section == "ROWS":
                s, rn = tok
                if s == "N":
                    continue
                if s not in _UNSENSE:
                    raise MpsError(f"line {lineno}: bad row type {s}")
                senses[rn] = s
                order.append(rn)
                coeffs[rn] = {}
            elif section == "COLUMNS":
                if len(tok) == 3 and tok[1] == "'MARKER'":
                    integer = tok[2] == "'INTORG'"
                    continue
                cn = tok[0]
                if cn not in col_index:
                    col_index[cn] = f.add_var(cn, 0.0, 0.0, BINARY if integer else CONTINUOUS)
                k = col_index[cn]
                for rn, val in zip(tok[1::2], tok[2::2]):
                    v = float(val)
                    if rn == OBJ:
                        if v != 0.0:
                            f.objective[k] = v
                    elif rn in coeffs:
                        coeffs[rn][k] = v
                    else:
                        raise MpsError(f"line {lineno}: unknown row {rn}")
            elif section == "RHS":
                for rn, val in zip(tok[1::2], tok[2::2]):
                    if rn == OBJ:
                        f.objective_constant = -float(val)
                    else:
                        rhs[rn] = float(val)
            elif section == "BOUNDS":
                kind, _, cn, *val = tok
                var = f.variables[col(cn)]
                if kind == "LO":
                    var.lower = float(val[0])
                elif kind == "UP":
                    var.upper = float(val[0])
                elif kind == "FX":
                    var.lower = var.upper = float(val[0])
                elif kind == "BV":
                    var.lower, var.upper = 0.0, 1.0
                else:
                    raise MpsError(f"line {lineno}: unsupported bound type {kind}")
            elif section == "QCMATRIX":
                c1, c2, val = tok
                if c1 != c2:
                    raise MpsError(f"line {lineno}: only diagonal curvature is supported")
                quad[qrow][col(c1)] = float(val)
            else:
                raise MpsError(f"line {lineno}: data outside a section")
        except (ValueError, IndexError) as exc:
            if isinstance(exc, MpsError):
                raise
            raise MpsError(f"line {lineno}: cannot parse {line.strip()!r}") from exc

    for rn in order:
        if rn in quad:
            if senses[rn] != "L":
                raise MpsError(f"quadratic row {rn} must be of type L")
            terms = {i: UnivariateTerm.quadratic(a) for i, a in quad[rn].items()}
            f.convex_rows.append(ConvexRow(terms, dict(coeffs[rn]), rhs.get(rn, 0.0), rn))
        else:
            f.linear_rows.append(LinRow(dict(coeffs[rn]), _UNSENSE[senses[rn]], rhs.get(rn, 0.0), rn))
    f.formulation = name
    f.n_model_vars = sum(1 for v in f.variables if v.name.startswith("x") and v.name[1:].isdigit())
    return f


def write_mps(f: FlatMip, path, name: str | None = None) -> Path:
    path = Path(path)
    try:
        path.write_text(to_mps_text(f, name))
    except OSError as exc:
        raise MpsError(f"cannot write {path}: {exc}") from exc
    return path


export_mps = write_mps


def read_mps(path) -> FlatMip:
    return from_mps_text(Path(path).read_text())

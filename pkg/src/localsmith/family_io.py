"""JSON wire format for matrix families, and exact report rendering helpers.

A family file carries grids of rational strings ("num/den" or "int"; plain
JSON integers are also accepted) keyed by power. Meromorphic inputs declare
a pole p and may then use powers down to -p; parsing normalizes them by the
usual eps^p multiplication, so the rest of the package only ever sees an
analytic family. Reports never contain floating point: every number is an
exact rational string.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .errors import InputError
from .matrix import Mat, format_rat, rat
from .recursion import ComplementPlan
from .series import MatLaurent, MatSeries

_FAMILY_FIELDS = {"rows", "cols", "kind", "trunc_or_degree", "declared_pole", "coefficients"}
_KINDS = {"polynomial", "truncated_series"}


@dataclass(frozen=True)
class FamilySpec:
    rows: int
    cols: int
    kind: str
    trunc_or_degree: int
    declared_pole: int
    coefficients: tuple[tuple[int, Mat], ...]  # sorted by power

    @property
    def is_polynomial(self) -> bool:
        return self.kind == "polynomial"


def _no_duplicates(pairs):
    seen = set()
    for key, _ in pairs:
        if key in seen:
            raise InputError(f"duplicate key {key!r} in JSON object")
        seen.add(key)
    return dict(pairs)


def grid_to_mat(grid, rows: int, cols: int, context: str = "matrix") -> Mat:
    if not isinstance(grid, list) or len(grid) != rows:
        raise InputError(f"{context}: expected {rows} rows")
    parsed = []
    for r, row in enumerate(grid):
        if not isinstance(row, list) or len(row) != cols:
            raise InputError(f"{context}: row {r} must have {cols} entries")
        out_row = []
        for c, cell in enumerate(row):
            if isinstance(cell, float):
                raise InputError(f"{context}: entry ({r},{c}) is a float; use rational strings")
            try:
                out_row.append(rat(cell))
            except ValueError as exc:
                raise InputError(f"{context}: entry ({r},{c}): {exc}") from exc
        parsed.append(out_row)
    return Mat(parsed, cols=cols)


def mat_to_grid(m: Mat) -> list[list[str]]:
    return [[format_rat(x) for x in row] for row in m.entries]


def parse_family(text: str) -> FamilySpec:
    try:
        obj = json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise InputError(f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise InputError("family file must contain a JSON object")
    unknown = set(obj) - _FAMILY_FIELDS
    if unknown:
        raise InputError(f"unknown fields: {sorted(unknown)}")
    for required in ("rows", "cols", "kind", "trunc_or_degree", "coefficients"):
        if required not in obj:
            raise InputError(f"missing field {required!r}")
    rows, cols = obj["rows"], obj["cols"]
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 1 or cols < 1:
        raise InputError("rows and cols must be positive integers")
    kind = obj["kind"]
    if kind not in _KINDS:
        raise InputError(f"kind must be one of {sorted(_KINDS)}")
    trunc = obj["trunc_or_degree"]
    if not isinstance(trunc, int) or trunc < 0:
        raise InputError("trunc_or_degree must be a nonnegative integer")
    pole = obj.get("declared_pole", 0)
    if not isinstance(pole, int) or pole < 0:
        raise InputError("declared_pole must be a nonnegative integer")
    raw = obj["coefficients"]
    if not isinstance(raw, dict):
        raise InputError("coefficients must map powers to grids")
    parsed: list[tuple[int, Mat]] = []
    for key, grid in raw.items():
        try:
            power = int(key)
        except ValueError as exc:
            raise InputError(f"coefficient key {key!r} is not an integer power") from exc
        if power < 0 and pole == 0:
            raise InputError(f"negative power {power} without a declared pole")
        if power < -pole or power > trunc:
            raise InputError(
                f"power {power} outside the allowed range [{-pole}, {trunc}]"
            )
        parsed.append((power, grid_to_mat(grid, rows, cols, context=f"coefficient {power}")))
    parsed.sort(key=lambda item: item[0])
    return FamilySpec(rows, cols, kind, trunc, pole, tuple(parsed))


def serialize_family(spec: FamilySpec) -> str:
    body = {
        "rows": spec.rows,
        "cols": spec.cols,
        "kind": spec.kind,
        "trunc_or_degree": spec.trunc_or_degree,
        "declared_pole": spec.declared_pole,
        "coefficients": {
            str(power): mat_to_grid(m) for power, m in spec.coefficients if not m.is_zero()
        },
    }
    return json.dumps(body, indent=2)


def spec_to_series(spec: FamilySpec) -> MatSeries:
    """The normalized analytic family: input times eps^declared_pole."""
    length = spec.trunc_or_degree + spec.declared_pole + 1
    coeffs = [Mat.zeros(spec.rows, spec.cols) for _ in range(length)]
    for power, m in spec.coefficients:
        idx = power + spec.declared_pole
        coeffs[idx] = coeffs[idx] + m
    return MatSeries(coeffs, exact=spec.is_polynomial)


def family_from_series(series: MatSeries, declared_pole: int = 0) -> FamilySpec:
    kind = "polynomial" if series.exact else "truncated_series"
    coeffs = tuple(
        (i - declared_pole, c) for i, c in enumerate(series.coeffs) if not c.is_zero()
    )
    return FamilySpec(
        series.rows, series.cols, kind, series.degree - declared_pole, declared_pole, coeffs
    )


def parse_complement_plan(text: str) -> ComplementPlan:
    """A "given" complement file: per stage, optional complement bases.

    Format: {"stages": [{"stage": 2, "domain_complement": [[..]..],
    "codomain_complement": [[..]..]}, ...]} with bases given as row-major
    grids whose columns are the chosen complement vectors.
    """
    try:
        obj = json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise InputError(f"complement file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict) or set(obj) - {"stages"}:
        raise InputError('complement file must be {"stages": [...]}')
    plan = ComplementPlan.empty()
    for entry in obj.get("stages", []):
        if not isinstance(entry, dict) or "stage" not in entry:
            raise InputError("each stage entry needs a 'stage' index")
        unknown = set(entry) - {"stage", "domain_complement", "codomain_complement"}
        if unknown:
            raise InputError(f"unknown stage fields: {sorted(unknown)}")
        index = entry["stage"]
        if not isinstance(index, int) or index < 1:
            raise InputError("stage index must be a positive integer")
        for field, store in (
            ("domain_complement", plan.nc_bases),
            ("codomain_complement", plan.rc_bases),
        ):
            grid = entry.get(field)
            if grid is None:
                continue
            if not isinstance(grid, list) or not grid:
                raise InputError(f"stage {index}: {field} must be a nonempty grid")
            height = len(grid)
            width = len(grid[0]) if isinstance(grid[0], list) else -1
            store[index] = grid_to_mat(grid, height, width, context=f"stage {index} {field}")
    return plan


# -- report rendering helpers ------------------------------------------------


def subspace_report(sub) -> dict:
    return {"dim": sub.dim, "basis": mat_to_grid(sub.basis)}


def series_listing(series: MatSeries, upto: int) -> list[dict]:
    return [
        {"power": i, "matrix": mat_to_grid(series.coefficient(i))}
        for i in range(upto + 1)
    ]


def laurent_listing(laurent: MatLaurent, upto: int | None = None) -> list[dict]:
    top = laurent.top_exponent if upto is None else upto
    return [
        {"power": e, "matrix": mat_to_grid(laurent.coefficient(e))}
        for e in range(-laurent.pole, top + 1)
    ]


def terms_listing(terms) -> list[dict]:
    return [{"power": power, "matrix": mat_to_grid(m)} for power, m in terms]


def _monomial(q: Fraction, power: int) -> str:
    if power == 0:
        return format_rat(q)
    if power == 1:
        eps = "eps"
    else:
        eps = f"eps^{power}"
    if q == 1:
        return eps
    if q == -1:
        return f"-{eps}"
    return f"{format_rat(q)}*{eps}"


def poly_entry_strings(terms) -> list[list[str]]:
    """Entry-wise eps-polynomial strings for a list of (power, Mat) terms."""
    terms = [(p, m) for p, m in terms]
    if not terms:
        return []
    rows, cols = terms[0][1].rows, terms[0][1].cols
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            pieces = []
            for power, m in sorted(terms, key=lambda item: item[0]):
                q = m.entries[i][j]
                if q == 0:
                    continue
                text = _monomial(q, power)
                if pieces:
                    text = f"+ {text}" if not text.startswith("-") else f"- {text[1:]}"
                pieces.append(text)
            row.append(" ".join(pieces) if pieces else "0")
        out.append(row)
    return out


def render_poly_matrix(terms, indent: str = "  ") -> str:
    grid = poly_entry_strings(terms)
    if not grid:
        return indent + "(empty)"
    widths = [max(len(grid[i][j]) for i in range(len(grid))) for j in range(len(grid[0]))]
    lines = []
    for row in grid:
        cells = "  ".join(cell.rjust(w) for cell, w in zip(row, widths))
        lines.append(f"{indent}[ {cells} ]")
    return "\n".join(lines)

"""Instance and solution file formats.

Instance files are UTF-8 text with LF line endings::

    nrap 1
    family=<quadratic|stratified|sampling|search|negentropy> n=<int> sense=<eq|le> b=<float>
    <per-index rows, space separated, n of them>

Row columns per family: quadratic ``a w c l u``; stratified
``a M rho l u``; sampling ``a c l u``; search ``a m bparam l u``;
negentropy ``c l u`` (its constraint coefficients are fixed to 1).
Floats are written with 17 significant digits so the round trip is
bit-exact.

Solution files are CSV with comment headers ``# alg=``, ``# mu=``,
``# status=``, ``# iters=`` followed by ``j,x`` rows (0-based j).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .families import FILE_COLUMNS, Family, Sense
from .problem import ProblemInstance, Solution, Status

__all__ = [
    "write_instance",
    "read_instance",
    "write_solution",
    "read_solution",
    "InstanceParseError",
]

FORMAT_NAME = "nrap"
FORMAT_VERSION = 1


class InstanceParseError(ValueError):
    """Malformed instance file; carries the offending line number."""

    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.line_no = line_no


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_instance(inst: ProblemInstance, path) -> None:
    cols = FILE_COLUMNS[inst.family]
    arrays = []
    for c in cols:
        if c == "a":
            arrays.append(inst.a)
        elif c == "l":
            arrays.append(inst.l)
        elif c == "u":
            arrays.append(inst.u)
        else:
            arrays.append(inst.params[c])
    lines = [f"{FORMAT_NAME} {FORMAT_VERSION}"]
    lines.append(
        f"family={inst.family.value} n={inst.n} sense={inst.sense.value} b={_fmt(inst.b)}"
    )
    for row in zip(*arrays):
        lines.append(" ".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _parse_header_fields(path, line_no: int, line: str) -> dict[str, str]:
    out = {}
    for item in line.split():
        if "=" not in item:
            raise InstanceParseError(path, line_no, f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k] = v
    return out


def read_instance(path) -> ProblemInstance:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise InstanceParseError(path, 1, "empty file")
    head = lines[0].split()
    if head != [FORMAT_NAME, str(FORMAT_VERSION)]:
        raise InstanceParseError(
            path, 1, f"unsupported format header {lines[0]!r} (expected '{FORMAT_NAME} {FORMAT_VERSION}')"
        )
    if len(lines) < 2:
        raise InstanceParseError(path, 2, "missing instance header")
    fields = _parse_header_fields(path, 2, lines[1])
    for key in ("family", "n", "sense", "b"):
        if key not in fields:
            raise InstanceParseError(path, 2, f"missing {key}=")
    try:
        family = Family(fields["family"])
    except ValueError:
        raise InstanceParseError(path, 2, f"unknown family {fields['family']!r}") from None
    try:
        sense = Sense(fields["sense"])
    except ValueError:
        raise InstanceParseError(path, 2, f"unknown sense {fields['sense']!r}") from None
    try:
        n = int(fields["n"])
        b = float(fields["b"])
    except ValueError as exc:
        raise InstanceParseError(path, 2, str(exc)) from None
    if n < 1:
        raise InstanceParseError(path, 2, f"n must be positive, got {n}")

    cols = FILE_COLUMNS[family]
    data = np.empty((n, len(cols)))
    for i in range(n):
        line_no = 3 + i
        if line_no - 1 >= len(lines) or not lines[line_no - 1].strip():
            raise InstanceParseError(path, line_no, f"expected data row {i + 1} of {n}")
        parts = lines[line_no - 1].split()
        if len(parts) != len(cols):
            raise InstanceParseError(
                path, line_no, f"expected {len(cols)} columns {cols}, got {len(parts)}"
            )
        try:
            data[i] = [float(p) for p in parts]
        except ValueError:
            raise InstanceParseError(path, line_no, f"bad float in row: {lines[line_no - 1]!r}") from None

    byname = {c: np.ascontiguousarray(data[:, k]) for k, c in enumerate(cols)}
    a = byname.pop("a", np.ones(n))
    l = byname.pop("l")
    u = byname.pop("u")
    return ProblemInstance(family=family, sense=sense, b=b, a=a, l=l, u=u, params=byname)


def write_solution(sol: Solution, path, alg: str) -> None:
    lines = [
        f"# alg={alg}",
        f"# mu={_fmt(sol.mu)}",
        f"# status={sol.status.value}",
        f"# iters={sol.iterations}",
    ]
    for j, v in enumerate(np.asarray(sol.x, dtype=float)):
        lines.append(f"{j},{_fmt(v)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_solution(path) -> tuple[str, Solution]:
    meta: dict[str, str] = {}
    rows: list[tuple[int, float]] = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("# ")
            if "=" in body:
                k, v = body.split("=", 1)
                meta[k.strip()] = v.strip()
            continue
        j_str, x_str = line.split(",", 1)
        rows.append((int(j_str), float(x_str)))
    rows.sort()
    x = np.array([v for _, v in rows])
    sol = Solution(
        x=x,
        mu=float(meta.get("mu", "nan")),
        status=Status(meta.get("status", "optimal")),
        iterations=int(meta.get("iters", "0")),
    )
    return meta.get("alg", "unknown"), sol

"""JSON/CSV encodings for operators, generators and spectral bases.

Floats are written with 17 significant digits so that every emitted number
round-trips exactly and identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from typing import Any

import numpy as np

from .lindblad import LindbladSpec, SpectralBasis
from .linops import DimensionError, as_operator


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot encode non-finite number {x!r} as JSON")
    if x == 0:
        return "0"  # avoids "-0"
    return "%.17g" % x


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," + pad if indent else ","
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [json.dumps(str(k)) + (": " if indent else ":") + _encode(v, indent, level + 1)
                 for k, v in obj.items()]
        return "{" + pad + sep.join(items) + end + "}"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # numeric vectors stay on one line
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ",".join(_encode(v, 0, 0) for v in obj) + "]"
        return "[" + pad + sep.join(_encode(v, indent, level + 1) for v in obj) + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON text with %.17g floats; Fractions become "p/q" strings."""
    return _encode(obj, indent, 0) + "\n"


def operator_to_json(a) -> dict:
    a = as_operator(a)
    flat = a.reshape(-1)
    return {"dim": int(a.shape[0]), "re": [float(x) for x in flat.real],
            "im": [float(x) for x in flat.imag]}


def operator_from_json(data: dict) -> np.ndarray:
    try:
        dim = int(data["dim"])
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros(dim * dim)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed operator JSON: {exc}") from exc
    if re.size != dim * dim or im.size != dim * dim:
        raise DimensionError(f"operator JSON needs {dim * dim} entries per part")
    return (re + 1j * im).reshape(dim, dim)


def spec_to_json(spec: LindbladSpec) -> dict:
    out = {"dim": spec.dim}
    if spec.hamiltonian is not None:
        out["hamiltonian"] = operator_to_json(spec.hamiltonian)
    out["jumps"] = [operator_to_json(j) for j in spec.jumps]
    return out


def spec_from_json(data: dict) -> LindbladSpec:
    if "dim" not in data:
        raise ValueError("generator JSON lacks 'dim'")
    h = operator_from_json(data["hamiltonian"]) if data.get("hamiltonian") is not None else None
    jumps = tuple(operator_from_json(j) for j in data.get("jumps", []))
    return LindbladSpec(int(data["dim"]), jumps, h)


def basis_to_json(basis: SpectralBasis) -> dict:
    return {"eigenvalues": [float(x) for x in basis.eigenvalues],
            "vectors": [operator_to_json(v) for v in basis.vectors]}


def basis_to_csv(basis: SpectralBasis) -> str:
    buf = io.StringIO()
    buf.write("index,eigenvalue\n")
    for k, lam in enumerate(basis.eigenvalues):
        buf.write(f"{k},{format_float(lam)}\n")
    return buf.getvalue()


def rows_to_csv(header: list[str], rows: list[list[Any]], comments: list[str] | None = None) -> str:
    buf = io.StringIO()
    for line in comments or []:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else str(v) for v in row])
    return buf.getvalue()


def rows_to_markdown(header: list[str], rows: list[list[Any]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for row in rows:
        lines.append("| " + " | ".join(str(v) for v in row) + " |")
    return "\n".join(lines) + "\n"

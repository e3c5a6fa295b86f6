"""Deterministic JSON and the solution CSV layout."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError, GridMismatch
from .grid import SphereGrid, build_grid
from .conformal import conformal_curvatures, to_conformal
from .spaceform import RadialGraph, SpaceForm, elementary_symmetric

__all__ = ["dumps", "write_json", "write_solution_csv", "read_solution_csv", "solution_columns"]


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    # keep a float marker so readers do not turn 1.0 into an int
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return [_plain(x) for x in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    return obj


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=True)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(x, (int, float, bool)) or x is None for x in obj):
            return "[" + ", ".join(_encode(x, indent, level + 1) for x in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(x, indent, level + 1) for x in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with insertion-ordered keys and floats at 17 significant digits.

    Non-finite floats are written as null.
    """
    return _encode(_plain(obj), indent, 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def solution_columns(grid: SphereGrid) -> list:
    n = grid.n
    return (
        ["node_index", *grid.coord_names, "z", "v"]
        + [f"lambda_{i + 1}" for i in range(n)]
        + [f"S_{j}" for j in range(1, n + 1)]
        + ["residual"]
    )


def write_solution_csv(path, graph: RadialGraph, psi, m: int) -> None:
    """One row per node; ``residual`` is S_m(lam) - binom(n, m) psi(u, z).

    Curvatures come from the conformal discretization, the one the solver
    drives to zero, so ``residual`` matches the reported solver residual.
    """
    grid = graph.grid
    cg = to_conformal(graph)
    lam = np.sort(conformal_curvatures(cg), axis=1)
    S = elementary_symmetric(lam)
    res = S[:, m] - math.comb(grid.n, m) * psi.value(graph.z, grid)
    v = cg.v
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(solution_columns(grid))
        for i in range(grid.size):
            row = [str(i)]
            row += [_format_float(float(x)) for x in grid.nodes[i]]
            row += [_format_float(float(graph.z[i])), _format_float(float(v[i]))]
            row += [_format_float(float(x)) for x in lam[i]]
            row += [_format_float(float(x)) for x in S[i, 1:]]
            row.append(_format_float(float(res[i])))
            w.writerow(row)


def read_solution_csv(path, K: int = -1) -> RadialGraph:
    """Rebuild the graph stored by :func:`write_solution_csv`.

    The grid is reconstructed from the coordinate columns and the node count;
    stored coordinates must match the rebuilt grid exactly.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"{path}: empty solution file")
    header, body = rows[0], rows[1:]
    if "z" not in header or "theta" not in header:
        raise ConfigError(f"{path}: not a solution file (missing theta/z columns)")
    n = 2 if "phi" in header else 1
    size = len(body)
    res = size if n == 1 else int(round(math.sqrt(size / 2)))
    if n == 2 and 2 * res * res != size:
        raise ConfigError(f"{path}: {size} rows do not form a latitude-longitude grid")
    try:
        grid = build_grid(n, res)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    cols = [header.index(c) for c in grid.coord_names]
    coords = np.array([[float(r[c]) for c in cols] for r in body])
    if coords.shape != grid.nodes.shape or not np.array_equal(coords, grid.nodes):
        raise GridMismatch(f"{path}: node coordinates do not match a standard grid")
    z = np.array([float(r[header.index("z")]) for r in body])
    return RadialGraph(z, grid, SpaceForm(K))

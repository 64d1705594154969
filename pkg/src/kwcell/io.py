"""Line-oriented text formats for graphs, parameters and cell systems.

Graph file::

    kwcell-graph 1
    vertex <id> ["label"]
    edge <id> <src> <dst> ["label"]

Cells file::

    kwcell-cells 1
    params N=<N> k=<k> omega_index=<i>
    U (v, w, [e,e], [e,e]) = <re>, <im>
    B (v, [e,...,e]) = <re>, <im>

Blank lines and lines starting with ``#`` are ignored.  Labels are JSON
string literals.  Complex values are written with 17 significant digits so
reading a file back reproduces every coefficient bit for bit.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .cells import BLoop, CellSystem, ULoop
from .graph import DirectedGraph, enumerate_B_loops, enumerate_U_loops, fp_eigenvector
from .qarith import Params

GRAPH_HEADER = "kwcell-graph 1"
CELLS_HEADER = "kwcell-cells 1"


class ParseError(ValueError):
    def __init__(self, source: str, line: int, message: str) -> None:
        super().__init__(f"{source}:{line}: {message}")
        self.source, self.line, self.message = source, line, message


class SupportError(ValueError):
    """Cell entries do not match the loops of the graph."""

    def __init__(self, missing: list[str], extra: list[str]) -> None:
        self.missing, self.extra = missing, extra
        parts = []
        if missing:
            parts.append(f"{len(missing)} missing loops (first: {', '.join(missing[:5])})")
        if extra:
            parts.append(f"{len(extra)} extra loops (first: {', '.join(extra[:5])})")
        super().__init__("; ".join(parts))


def format_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.17g}, {z.imag:.17g}"


def _lines(text: str) -> Iterable[tuple[int, str]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield number, line


# -- graph ---------------------------------------------------------------------------


def dump_graph(graph: DirectedGraph) -> str:
    out = [GRAPH_HEADER]
    for v in graph.vertices:
        label = graph.vertex_labels.get(v)
        out.append(f"vertex {v}" + (f" {json.dumps(label)}" if label is not None else ""))
    for e in graph.edges:
        label = graph.edge_labels.get(e.id)
        out.append(f"edge {e.id} {e.src} {e.dst}" + (f" {json.dumps(label)}" if label is not None else ""))
    return "\n".join(out) + "\n"


_VERTEX = re.compile(r"vertex\s+(-?\d+)(?:\s+(\".*\"))?$")
_EDGE = re.compile(r"edge\s+(-?\d+)\s+(-?\d+)\s+(-?\d+)(?:\s+(\".*\"))?$")


def _label(text: str | None, source: str, number: int) -> str | None:
    if text is None:
        return None
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(source, number, f"bad label literal: {exc.msg}") from None
    if not isinstance(value, str):
        raise ParseError(source, number, "label must be a string")
    return value


def parse_graph(text: str, source: str = "<graph>") -> DirectedGraph:
    lines = list(_lines(text))
    if not lines or lines[0][1] != GRAPH_HEADER:
        raise ParseError(source, lines[0][0] if lines else 1, f"expected header {GRAPH_HEADER!r}")
    vertices, edges, vlabels, elabels = [], [], {}, {}
    for number, line in lines[1:]:
        if m := _VERTEX.match(line):
            v = int(m.group(1))
            vertices.append(v)
            if (label := _label(m.group(2), source, number)) is not None:
                vlabels[v] = label
        elif m := _EDGE.match(line):
            e, s, t = (int(m.group(i)) for i in (1, 2, 3))
            edges.append((e, s, t))
            if (label := _label(m.group(4), source, number)) is not None:
                elabels[e] = label
        else:
            raise ParseError(source, number, f"unrecognised line {line!r}")
    try:
        return DirectedGraph(vertices, edges, vlabels, elabels)
    except (ValueError, KeyError) as exc:
        raise ParseError(source, lines[-1][0], f"invalid graph: {exc}") from None


# -- params and cells ----------------------------------------------------------------


def dump_params(params: Params) -> str:
    return f"params N={params.N} k={params.k} omega_index={params.omega_index}"


_PARAMS = re.compile(r"params\s+N=(\d+)\s+k=(\d+)\s+omega_index=(\d+)$")
_NUM = r"([-+]?(?:\d+\.?\d*(?:[eE][-+]?\d+)?|inf|nan))"
_U = re.compile(r"U\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*\[([\d\s,]*)\]\s*,\s*\[([\d\s,]*)\]\s*\)\s*=\s*" + _NUM + r"\s*,\s*" + _NUM + "$")
_B = re.compile(r"B\s*\(\s*(\d+)\s*,\s*\[([\d\s,]*)\]\s*\)\s*=\s*" + _NUM + r"\s*,\s*" + _NUM + "$")


def parse_params(line: str, source: str = "<params>", number: int = 1) -> Params:
    m = _PARAMS.match(line.strip())
    if not m:
        raise ParseError(source, number, "expected 'params N=<int> k=<int> omega_index=<int>'")
    try:
        return Params(int(m.group(1)), int(m.group(2)), int(m.group(3)))
    except ValueError as exc:
        raise ParseError(source, number, str(exc)) from None


def _edges(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _ids(path: Iterable[int]) -> str:
    return "[" + ",".join(str(e) for e in path) + "]"


def dump_cells(cells: CellSystem) -> str:
    """Every U loop (zeros included) and, when present, every B loop."""
    out = [CELLS_HEADER, dump_params(cells.params)]
    for v, w, p, q in enumerate_U_loops(cells.graph):
        out.append(f"U ({v}, {w}, {_ids(p)}, {_ids(q)}) = {format_complex(cells.u_cells.get((v, w, p, q), 0.0))}")
    if cells.b_cells is not None:
        for v, path in enumerate_B_loops(cells.graph, cells.params.N):
            out.append(f"B ({v}, {_ids(path)}) = {format_complex(cells.b_cells.get((v, path), 0.0))}")
    return "\n".join(out) + "\n"


@dataclass
class CellsDocument:
    params: Params
    u_cells: dict[ULoop, complex]
    b_cells: dict[BLoop, complex] | None


def parse_cells(text: str, source: str = "<cells>") -> CellsDocument:
    lines = list(_lines(text))
    if not lines or lines[0][1] != CELLS_HEADER:
        raise ParseError(source, lines[0][0] if lines else 1, f"expected header {CELLS_HEADER!r}")
    if len(lines) < 2:
        raise ParseError(source, lines[0][0], "missing params line")
    params = parse_params(lines[1][1], source, lines[1][0])
    u_cells: dict[ULoop, complex] = {}
    b_cells: dict[BLoop, complex] = {}
    for number, line in lines[2:]:
        if m := _U.match(line):
            key = (int(m.group(1)), int(m.group(2)), _edges(m.group(3)), _edges(m.group(4)))
            target = u_cells
            value = complex(float(m.group(5)), float(m.group(6)))
        elif m := _B.match(line):
            key = (int(m.group(1)), _edges(m.group(2)))
            target = b_cells
            value = complex(float(m.group(3)), float(m.group(4)))
        else:
            raise ParseError(source, number, f"unrecognised line {line[:60]!r}")
        if key in target:
            raise ParseError(source, number, "duplicate entry")
        target[key] = value
    return CellsDocument(params, u_cells, b_cells or None)


def check_support(graph: DirectedGraph, doc: CellsDocument) -> None:
    expected_u = set(enumerate_U_loops(graph))
    missing = sorted(str(x) for x in expected_u - doc.u_cells.keys())
    extra = sorted(str(x) for x in doc.u_cells.keys() - expected_u)
    if doc.b_cells is not None:
        expected_b = set(enumerate_B_loops(graph, doc.params.N))
        missing += sorted(str(x) for x in expected_b - doc.b_cells.keys())
        extra += sorted(str(x) for x in doc.b_cells.keys() - expected_b)
    if missing or extra:
        raise SupportError(missing, extra)


def build_cells(graph: DirectedGraph, doc: CellsDocument, params: Params | None = None) -> CellSystem:
    check_support(graph, doc)
    return CellSystem(params or doc.params, graph, fp_eigenvector(graph), doc.u_cells, doc.b_cells)


# -- files ---------------------------------------------------------------------------


def read_graph(path: str | Path) -> DirectedGraph:
    path = Path(path)
    return parse_graph(path.read_text(), str(path))


def write_graph(graph: DirectedGraph, path: str | Path) -> None:
    Path(path).write_text(dump_graph(graph))


def read_cells(path: str | Path) -> CellsDocument:
    path = Path(path)
    return parse_cells(path.read_text(), str(path))


def write_cells(cells: CellSystem, path: str | Path) -> None:
    Path(path).write_text(dump_cells(cells))


def load_system(graph_path: str | Path, cells_path: str | Path, params: Params | None = None) -> CellSystem:
    return build_cells(read_graph(graph_path), read_cells(cells_path), params)


def matrix_lines(matrix, labels: Mapping[int, str] | list[str]) -> list[str]:
    """Right-aligned integer table with the row label first."""
    rows = []
    names = list(labels.values()) if isinstance(labels, Mapping) else list(labels)
    width = max((len(n) for n in names), default=0)
    for name, row in zip(names, matrix):
        rows.append(f"{name:>{width}}  " + " ".join(f"{int(x):3d}" for x in row))
    return rows

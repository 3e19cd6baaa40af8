import logging
from pathlib import Path
from typing import Iterator

import numpy as np

from stokeseg.mesh.errors import ParseError, TopologyError
from stokeseg.mesh.simplicial_mesh import SimplicialMesh, validate_connectivity

logger = logging.getLogger(__name__)

SMESH = "smesh"


class _Lines:

    def __init__(self, text: str):
        self._lines: Iterator[tuple[int, list[str]]] = (
            (number, line.split("#", 1)[0].split())
            for number, line in enumerate(text.splitlines(), start=1)
        )
        self.line_number = 0

    def next_tokens(self) -> list[str]:
        for number, tokens in self._lines:
            self.line_number = number
            if tokens:
                return tokens
        raise ParseError(self.line_number + 1, "unexpected end of file")

    def peek_section(self) -> list[str] | None:
        try:
            return self.next_tokens()
        except ParseError:
            return None


def _header(lines: _Lines, keyword: str, tokens: list[str] | None = None) -> int:
    tokens = tokens if tokens is not None else lines.next_tokens()
    if tokens[0] != keyword:
        raise ParseError(lines.line_number, f"expected '{keyword}', found '{tokens[0]}'")
    if len(tokens) != 2:
        raise ParseError(lines.line_number, f"'{keyword}' takes exactly one count")
    try:
        count = int(tokens[1])
    except ValueError:
        raise ParseError(lines.line_number, f"'{keyword}' count is not an integer: {tokens[1]}")
    if count < 0:
        raise ParseError(lines.line_number, f"'{keyword}' count is negative")
    return count


def _row(lines: _Lines, width: int, kind: type, what: str) -> list:
    tokens = lines.next_tokens()
    if len(tokens) != width:
        raise ParseError(lines.line_number, f"{what} line needs {width} values, found {len(tokens)}")
    try:
        return [kind(token) for token in tokens]
    except ValueError:
        raise ParseError(lines.line_number, f"malformed {what} line: {' '.join(tokens)}")


def load_mesh(path, format: str = SMESH) -> SimplicialMesh:
    """
    Read a mesh in the ASCII ``.smesh`` format::

        dim <2|3>
        vertices <n>      followed by n lines of d floats
        cells <m>         followed by m lines of d+1 zero-based vertex indices
        boundary_markers <k>   (optional) k lines of facet vertex indices and an integer marker

    Blank lines and ``#`` comments are ignored. Boundary facets are the facets
    with a single incident cell.
    """
    if format != SMESH:
        raise ParseError(0, f"unsupported mesh format '{format}'")

    lines = _Lines(Path(path).read_text())

    tokens = lines.next_tokens()
    if tokens[0] != "dim" or len(tokens) != 2 or tokens[1] not in ("2", "3"):
        raise ParseError(lines.line_number, "first entry must be 'dim 2' or 'dim 3'")
    dim = int(tokens[1])

    n_vertices = _header(lines, "vertices")
    vertices = [_row(lines, dim, float, "vertex") for _ in range(n_vertices)]

    n_cells = _header(lines, "cells")
    cells = []
    for _ in range(n_cells):
        cell = _row(lines, dim + 1, int, "cell")
        if min(cell) < 0 or max(cell) >= n_vertices:
            raise ParseError(lines.line_number, f"cell refers to a vertex outside 0..{n_vertices - 1}")
        if len(set(cell)) != dim + 1:
            raise ParseError(lines.line_number, "cell repeats a vertex")
        cells.append(cell)

    markers: dict[tuple[int, ...], int] = {}
    tokens = lines.peek_section()
    if tokens is not None:
        if tokens[0] != "boundary_markers":
            raise ParseError(lines.line_number, f"unknown keyword '{tokens[0]}'")
        for _ in range(_header(lines, "boundary_markers", tokens)):
            row = _row(lines, dim + 1, int, "boundary marker")
            markers[tuple(sorted(row[:-1]))] = row[-1]
        trailing = lines.peek_section()
        if trailing is not None:
            raise ParseError(lines.line_number, f"unknown keyword '{trailing[0]}'")

    if not cells:
        raise ParseError(lines.line_number, "mesh has no cells")
    canonical = np.sort(np.asarray(cells), axis=1)
    unique, counts = np.unique(canonical, axis=0, return_counts=True)
    if np.any(counts > 1):
        raise TopologyError(f"cell {tuple(int(v) for v in unique[np.argmax(counts > 1)])} appears more than once")

    mesh = SimplicialMesh(vertices, cells, boundary_markers=markers)
    validate_connectivity(mesh)

    boundary = {tuple(int(v) for v in mesh.facet_vertices[f]) for f in mesh.boundary_facet_ids}
    stray = [facet for facet in markers if facet not in boundary]
    if stray:
        raise TopologyError(f"boundary marker on facet {stray[0]} which is not a boundary facet")

    logger.info("Loaded mesh", extra={"path": str(path), "dim": dim, "cells": mesh.n_cells})
    return mesh


def save_mesh(mesh: SimplicialMesh, path):
    lines = [f"dim {mesh.dim}", f"vertices {mesh.n_vertices}"]
    lines += [" ".join(repr(float(c)) for c in vertex) for vertex in mesh.vertices]
    lines.append(f"cells {mesh.n_cells}")
    lines += [" ".join(str(int(v)) for v in cell) for cell in mesh.cells]
    if mesh.boundary_markers:
        lines.append(f"boundary_markers {len(mesh.boundary_markers)}")
        lines += [" ".join(str(v) for v in (*facet, marker)) for facet, marker in sorted(mesh.boundary_markers.items())]
    Path(path).write_text("\n".join(lines) + "\n")

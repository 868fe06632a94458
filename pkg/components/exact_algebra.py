"""Exact integer linear algebra for Matrix-Tree counts.

Nothing in this module touches floating point: determinants are computed
with fraction-free (Bareiss) elimination over Python integers.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator, List, Sequence, Tuple

import networkx as nx
import numpy as np

from components.errors import PreconditionError, SizeGuardError
from components.graph_core import Edge, Graph, to_networkx

if TYPE_CHECKING:
    from components.counting import Orientation

logger = logging.getLogger(__name__)

MAX_DENSE_ORDER = 2000
MAX_TREE_ENUMERATION_ORDER = 8


@dataclass(frozen=True)
class IntMatrix:
    """Rectangular matrix of arbitrary-precision integers (row-major)."""

    rows: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        widths = {len(row) for row in self.rows}
        if len(widths) > 1:
            raise PreconditionError("matrix rows have different lengths")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "IntMatrix":
        return cls(tuple(tuple(int(x) for x in row) for row in rows))

    @property
    def shape(self) -> Tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def __getitem__(self, index: Tuple[int, int]) -> int:
        i, j = index
        return self.rows[i][j]

    def to_list(self) -> List[List[int]]:
        return [list(row) for row in self.rows]

    def to_array(self, dtype=float) -> np.ndarray:
        """Floating (or object) numpy copy for the spectral routines."""
        if dtype is object:
            return np.array(self.to_list(), dtype=object)
        return np.array([[float(x) for x in row] for row in self.rows], dtype=dtype)


def laplacian(g: Graph) -> IntMatrix:
    """Laplacian Q: degrees on the diagonal, -1 on edges.

    Args:
        g: Graph

    Returns:
        IntMatrix: The n x n Laplacian
    """
    if g.n > MAX_DENSE_ORDER:
        raise SizeGuardError(f"n={g.n} exceeds the dense limit {MAX_DENSE_ORDER}")
    rows = [[0] * g.n for _ in range(g.n)]
    for j, d in enumerate(g.degrees):
        rows[j][j] = d
    for u, v in g.edges:
        rows[u][v] = -1
        rows[v][u] = -1
    return IntMatrix.from_rows(rows)


def q_hat(Q: IntMatrix) -> IntMatrix:
    """Q + J, where J is the all-ones matrix."""
    rows, cols = Q.shape
    if rows != cols:
        raise PreconditionError(f"q_hat needs a square matrix, got {rows}x{cols}")
    return IntMatrix.from_rows([[x + 1 for x in row] for row in Q.rows])


def principal_minor(M: IntMatrix, index: int) -> IntMatrix:
    """Delete row ``index`` and column ``index``."""
    return IntMatrix.from_rows(
        [[x for j, x in enumerate(row) if j != index] for i, row in enumerate(M.rows) if i != index]
    )


def det_exact(M: IntMatrix) -> int:
    """Exact determinant by Bareiss fraction-free elimination.

    Every intermediate division is exact, so the result carries no rounding.

    Args:
        M: Square integer matrix

    Returns:
        int: det(M), 0 for singular matrices
    """
    n, cols = M.shape
    if n != cols:
        raise PreconditionError(f"determinant of non-square {n}x{cols} matrix")
    if n == 0:
        return 1
    a = M.to_list()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            # look for a pivot in the current column
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            row_i = a[i]
            factor = row_i[k]
            row_k = a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - factor * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * a[n - 1][n - 1]


def spanning_tree_count(g: Graph) -> int:
    """Number of spanning trees t(G), as the (0, 0) cofactor of the Laplacian.

    Returns 0 for disconnected graphs.
    """
    if g.n == 1:
        return 1
    return det_exact(principal_minor(laplacian(g), 0))


def out_degree_laplacian(n: int, arcs: Sequence[Edge]) -> IntMatrix:
    """D_out - A for a digraph given as (tail, head) arcs."""
    rows = [[0] * n for _ in range(n)]
    for tail, head in arcs:
        rows[tail][tail] += 1
        rows[tail][head] -= 1
    return IntMatrix.from_rows(rows)


def arborescence_count(d: "Orientation", root: int) -> int:
    """Directed spanning trees of an orientation with every arc pointing toward ``root``.

    Args:
        d: Orientation of a connected graph
        root: 0-indexed root vertex

    Returns:
        int: t_root(D) from the directed Matrix-Tree theorem
    """
    n = d.base.n
    if not 0 <= root < n:
        raise PreconditionError(f"root {root} out of range for n={n}")
    return det_exact(principal_minor(out_degree_laplacian(n, d.arcs), root))


def spanning_trees(g: Graph, max_order: int = MAX_TREE_ENUMERATION_ORDER) -> Iterator[Tuple[Edge, ...]]:
    """Enumerate every spanning tree as a tuple of edges.

    All edges weigh the same, so networkx's partition-based iterator yields
    each spanning tree exactly once.

    Args:
        g: Graph
        max_order: Refuse graphs with more vertices than this

    Yields:
        tuple: Edges of one spanning tree, in sorted order
    """
    if g.n > max_order:
        raise SizeGuardError(f"spanning-tree enumeration limited to n <= {max_order}, got n={g.n}")
    if g.n == 1:
        yield ()
        return
    nx_graph = to_networkx(g)
    # the iterator would hand back a spanning forest
    if not nx.is_connected(nx_graph):
        return
    for tree in nx.SpanningTreeIterator(nx_graph):
        yield tuple(sorted((min(u, v), max(u, v)) for u, v in tree.edges()))

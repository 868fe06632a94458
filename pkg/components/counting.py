import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, Sequence, Tuple

from components.errors import ConsistencyError, PreconditionError, SizeGuardError
from components.exact_algebra import arborescence_count, spanning_tree_count
from components.graph_core import Edge, Graph, classify
from components.utils import log2_factorial

logger = logging.getLogger(__name__)

MAX_ORIENTATION_EDGES = 40
MAX_BACKTRACK_EDGES = 24
PARALLEL_PREFIX_EDGES = 6


@dataclass(frozen=True)
class Orientation:
    """A direction (tail, head) for every edge of ``base``, aligned with base.edges."""

    base: Graph
    arcs: Tuple[Edge, ...]

    def __post_init__(self):
        if len(self.arcs) != self.base.E:
            raise PreconditionError("orientation must direct every edge exactly once")
        for (u, v), (tail, head) in zip(self.base.edges, self.arcs):
            if {tail, head} != {u, v}:
                raise PreconditionError(f"arc ({tail}, {head}) does not orient edge ({u}, {v})")

    @property
    def out_degrees(self) -> Tuple[int, ...]:
        out = [0] * self.base.n
        for tail, _ in self.arcs:
            out[tail] += 1
        return tuple(out)

    @property
    def in_degrees(self) -> Tuple[int, ...]:
        into = [0] * self.base.n
        for _, head in self.arcs:
            into[head] += 1
        return tuple(into)

    def is_eulerian(self) -> bool:
        return self.out_degrees == self.in_degrees

    def reversed(self) -> "Orientation":
        return Orientation(self.base, tuple((head, tail) for tail, head in self.arcs))


class CountMethod(str, Enum):
    BEST_SUM = "best_sum"
    BACKTRACK = "backtrack"


@dataclass(frozen=True)
class EulCountResult:
    eul: int
    orientation_count: int
    tree_count: int
    method: CountMethod


def _require_even_connected(g: Graph) -> None:
    report = classify(g)
    if not report.all_even:
        odd = [v + 1 for v, d in enumerate(g.degrees) if d % 2]
        raise PreconditionError(f"vertices {odd} have odd degree", code="ODD_DEGREE")
    if not report.is_connected:
        raise PreconditionError("graph is not connected", code="NOT_CONNECTED")
    if g.E == 0:
        raise PreconditionError("graph has no edges", code="NOT_CONNECTED")


def _orientations_from(g: Graph, prefix: Sequence[bool]) -> Iterator[Orientation]:
    """Depth-first enumeration continuing from fixed first direction choices.

    ``True`` means the edge keeps its listed direction u -> v. A branch is cut
    as soon as some vertex exceeds half its degree in either direction; the
    remaining incident edges then always close the deficit exactly.
    """
    edges = g.edges
    half = [d // 2 for d in g.degrees]
    out = [0] * g.n
    into = [0] * g.n
    arcs: List[Edge] = []

    def place(tail: int, head: int) -> bool:
        if out[tail] == half[tail] or into[head] == half[head]:
            return False
        out[tail] += 1
        into[head] += 1
        arcs.append((tail, head))
        return True

    def unplace() -> None:
        tail, head = arcs.pop()
        out[tail] -= 1
        into[head] -= 1

    for idx, forward in enumerate(prefix):
        u, v = edges[idx]
        if not (place(u, v) if forward else place(v, u)):
            return

    def extend(idx: int) -> Iterator[Orientation]:
        if idx == len(edges):
            yield Orientation(g, tuple(arcs))
            return
        u, v = edges[idx]
        if place(u, v):
            yield from extend(idx + 1)
            unplace()
        if place(v, u):
            yield from extend(idx + 1)
            unplace()

    yield from extend(len(prefix))


def eulerian_orientations(g: Graph, max_edges: int = MAX_ORIENTATION_EDGES) -> Iterator[Orientation]:
    """Every Eulerian orientation of g, each exactly once, in a fixed order.

    Edges are processed in sorted order; the listed direction is tried
    before the reversed one.

    Args:
        g: Connected graph with all degrees even
        max_edges: Size guard

    Yields:
        Orientation: An orientation with in-degree = out-degree everywhere
    """
    _require_even_connected(g)
    if g.E > max_edges:
        raise SizeGuardError(f"orientation enumeration limited to {max_edges} edges, got {g.E}")
    yield from _orientations_from(g, ())


def degree_factorial_product(g: Graph) -> int:
    """prod_j (d_j/2 - 1)! over the undirected degrees."""
    return math.prod(math.factorial(d // 2 - 1) for d in g.degrees)


def best_count(d: Orientation, root: int = 0) -> int:
    """Eulerian circuits of an Eulerian digraph via the BEST theorem.

    Args:
        d: Eulerian orientation of a connected graph
        root: Root used for the arborescence count

    Returns:
        int: t_root(D) * prod_j (out_j - 1)!
    """
    if not d.is_eulerian():
        raise PreconditionError("orientation is not Eulerian", code="NOT_EULERIAN")
    outs = d.out_degrees
    if any(k == 0 for k in outs):
        raise PreconditionError("orientation has a vertex without arcs", code="NOT_CONNECTED")
    trees = arborescence_count(d, root)
    return trees * math.prod(math.factorial(k - 1) for k in outs)


def _tree_sum(g: Graph, prefix: Sequence[bool], root: int) -> Tuple[int, int]:
    total = 0
    orientations = 0
    for d in _orientations_from(g, prefix):
        total += arborescence_count(d, root)
        orientations += 1
    return total, orientations


def _direction_prefixes(length: int) -> List[Tuple[bool, ...]]:
    prefixes: List[Tuple[bool, ...]] = [()]
    for _ in range(length):
        prefixes = [p + (choice,) for p in prefixes for choice in (True, False)]
    return prefixes


def eul_exact(g: Graph, root: int = 0, threads: int = 1, max_edges: int = MAX_ORIENTATION_EDGES) -> EulCountResult:
    """Exact Eul(G) as the sum of BEST counts over all Eulerian orientations.

    The factorial product is the same for every orientation, so the sum is
    taken over arborescence counts and multiplied once.

    Args:
        g: Connected even graph
        root: Root vertex for every arborescence count
        threads: Worker threads; the result does not depend on it
        max_edges: Size guard for the enumeration

    Returns:
        EulCountResult: Exact counts with method best_sum
    """
    _require_even_connected(g)
    if g.E > max_edges:
        raise SizeGuardError(f"orientation enumeration limited to {max_edges} edges, got {g.E}")
    if not 0 <= root < g.n:
        raise PreconditionError(f"root {root} out of range for n={g.n}")

    if threads > 1:
        prefixes = _direction_prefixes(min(PARALLEL_PREFIX_EDGES, g.E))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda p: _tree_sum(g, p, root), prefixes))
        tree_sum = sum(part[0] for part in parts)
        orientations = sum(part[1] for part in parts)
    else:
        tree_sum, orientations = _tree_sum(g, (), root)

    eul = tree_sum * degree_factorial_product(g)
    logger.info("eul_exact: n=%d E=%d orientations=%d eul=%d", g.n, g.E, orientations, eul)
    return EulCountResult(
        eul=eul,
        orientation_count=orientations,
        tree_count=spanning_tree_count(g),
        method=CountMethod.BEST_SUM,
    )


def eul_backtrack(g: Graph, max_edges: int = MAX_BACKTRACK_EDGES) -> int:
    """Independent count of Eulerian circuits by exhaustive trail search.

    Counts linear closed trails from the lowest-index non-isolated vertex v0
    that use every edge once, then divides by d0/2: a circuit class passes
    through v0 exactly d0/2 times, once per rotation starting there.

    Args:
        g: Connected even graph
        max_edges: Size guard

    Returns:
        int: Eul(G) under the reversal-distinct convention
    """
    _require_even_connected(g)
    if g.E > max_edges:
        raise SizeGuardError(f"backtracking oracle limited to {max_edges} edges, got {g.E}")

    incident: List[List[Tuple[int, int]]] = [[] for _ in range(g.n)]
    for idx, (u, v) in enumerate(g.edges):
        incident[u].append((v, idx))
        incident[v].append((u, idx))
    used = [False] * g.E
    start = next(v for v in range(g.n) if g.degrees[v] > 0)

    def trails(vertex: int, remaining: int) -> int:
        if remaining == 0:
            return 1 if vertex == start else 0
        found = 0
        for other, idx in incident[vertex]:
            if used[idx]:
                continue
            used[idx] = True
            found += trails(other, remaining - 1)
            used[idx] = False
        return found

    linear = trails(start, g.E)
    visits = g.degrees[start] // 2
    count, remainder = divmod(linear, visits)
    if remainder:
        raise ConsistencyError(f"{linear} linear trails are not divisible by {visits} visits to the start vertex")
    return count


def integral_from_count(g: Graph, eul: int) -> float:
    """Back-solve the angular integral S from an exact circuit count.

    S = Eul(G) * pi^n / (2^(E - n + 1) * prod_j (d_j/2 - 1)!), evaluated in
    log space.
    """
    if eul <= 0:
        raise PreconditionError("circuit count must be positive")
    log2_value = (
        math.log2(eul)
        + g.n * math.log2(math.pi)
        - (g.E - g.n + 1)
        - sum(log2_factorial(d // 2 - 1) for d in g.degrees)
    )
    if log2_value > 1023:
        return math.inf
    return 2.0 ** log2_value

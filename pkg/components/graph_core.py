import logging
import random
from dataclasses import dataclass
from functools import cached_property
from typing import FrozenSet, Iterable, List, Sequence, Tuple

import networkx as nx
import numpy as np

from components.errors import GraphError, GraphParseError, PreconditionError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]

MAX_VERTICES = 2000
GENERATION_RETRIES = 100


def _normalize(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1.

    Edges are stored as sorted (u, v) pairs with u < v. Instances are
    immutable and validated on construction.
    """

    n: int
    edges: Tuple[Edge, ...]
    degrees: Tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise GraphError(f"a graph needs at least one vertex, got n={self.n}")
        if self.n > MAX_VERTICES:
            raise GraphError(f"n={self.n} exceeds the dense-matrix limit {MAX_VERTICES}")
        seen = set()
        counted = [0] * self.n
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={self.n}")
            if u > v:
                raise GraphError(f"edge ({u}, {v}) is not normalized")
            if (u, v) in seen:
                raise GraphError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
            counted[u] += 1
            counted[v] += 1
        if tuple(counted) != tuple(self.degrees):
            raise GraphError("degree cache does not match the edge set")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        """Build a graph from 0-indexed vertex pairs in any order or orientation.

        Args:
            n: Vertex count
            edges: Iterable of (u, v) pairs

        Returns:
            Graph: Validated graph with sorted edges
        """
        normalized = []
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            normalized.append(_normalize(u, v))
        if len(set(normalized)) != len(normalized):
            raise GraphError("duplicate edge in edge list")
        normalized.sort()
        degrees = [0] * n
        for u, v in normalized:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            degrees[u] += 1
            degrees[v] += 1
        return cls(n=n, edges=tuple(normalized), degrees=tuple(degrees))

    @property
    def E(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_set(self) -> FrozenSet[Edge]:
        return frozenset(self.edges)

    @cached_property
    def adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        neighbours: List[List[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            neighbours[u].append(v)
            neighbours[v].append(u)
        return tuple(tuple(sorted(adj)) for adj in neighbours)

    def has_edge(self, u: int, v: int) -> bool:
        return _normalize(u, v) in self.edge_set


@dataclass(frozen=True)
class GraphClassReport:
    is_simple: bool
    is_connected: bool
    all_even: bool


def to_networkx(g: Graph) -> nx.Graph:
    nx_graph = nx.Graph()
    nx_graph.add_nodes_from(range(g.n))
    nx_graph.add_edges_from(g.edges)
    return nx_graph


def from_networkx(nx_graph: nx.Graph) -> Graph:
    """Convert a networkx graph, relabelling nodes densely in sorted order."""
    nodes = sorted(nx_graph.nodes())
    index = {node: i for i, node in enumerate(nodes)}
    return Graph.from_edges(len(nodes), ((index[u], index[v]) for u, v in nx_graph.edges()))


def parse_graph(text: str) -> Graph:
    """Parse an edge-list document.

    The first line holds "n m", followed by m lines "u v" with 1-indexed
    vertices. Blank trailing lines are ignored.

    Args:
        text: Document contents

    Returns:
        Graph: The parsed graph (0-indexed internally)
    """
    lines = text.split("\n")
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise GraphParseError("empty document, expected header 'n m'", line=1)

    header = lines[0].split()
    if len(header) != 2 or not all(tok.lstrip("-").isdigit() for tok in header):
        raise GraphParseError(f"expected header 'n m', got {lines[0]!r}", line=1)
    n, m = int(header[0]), int(header[1])
    if n < 1 or m < 0:
        raise GraphParseError(f"invalid header values n={n}, m={m}", line=1)
    if len(lines) - 1 != m:
        raise GraphParseError(f"header announces {m} edges but {len(lines) - 1} edge lines follow", line=1)

    seen = set()
    edges: List[Edge] = []
    for offset, raw in enumerate(lines[1:]):
        line_no = offset + 2
        parts = raw.split()
        if len(parts) != 2 or not all(tok.lstrip("-").isdigit() for tok in parts):
            raise GraphParseError(f"expected 'u v', got {raw!r}", line=line_no)
        u, v = int(parts[0]), int(parts[1])
        for vertex in (u, v):
            if not 1 <= vertex <= n:
                raise GraphParseError(f"vertex {vertex} out of range [1, {n}]", line=line_no, code="VERTEX_OUT_OF_RANGE")
        if u == v:
            raise GraphParseError(f"self-loop at vertex {u}", line=line_no, code="SELF_LOOP")
        edge = _normalize(u - 1, v - 1)
        if edge in seen:
            raise GraphParseError(f"duplicate edge {u} {v}", line=line_no, code="DUPLICATE_EDGE")
        seen.add(edge)
        edges.append(edge)

    return Graph.from_edges(n, edges)


def serialize_graph(g: Graph) -> str:
    """Serialize to the edge-list format with lexicographically sorted edges."""
    out = [f"{g.n} {g.E}"]
    out.extend(f"{u + 1} {v + 1}" for u, v in g.edges)
    return "\n".join(out) + "\n"


def classify(g: Graph) -> GraphClassReport:
    """Recompute simplicity, connectivity and degree parity of a graph.

    Args:
        g: Graph to classify

    Returns:
        GraphClassReport: The three flags
    """
    is_simple = all(u != v for u, v in g.edges) and len(set(g.edges)) == len(g.edges)
    is_connected = nx.is_connected(to_networkx(g))
    all_even = all(d % 2 == 0 for d in g.degrees)
    return GraphClassReport(is_simple=is_simple, is_connected=is_connected, all_even=all_even)


def delete_vertices(g: Graph, removed: Iterable[int]) -> Graph:
    """Induced subgraph on the remaining vertices, re-indexed in order.

    Args:
        g: Source graph
        removed: 0-indexed vertices to delete

    Returns:
        Graph: The graph with the vertices and their incident edges removed
    """
    removed = set(removed)
    if not removed <= set(range(g.n)):
        raise GraphError(f"vertices {sorted(removed - set(range(g.n)))} are not in the graph")
    if len(removed) == g.n:
        raise GraphError("deleting every vertex leaves an empty graph", code="EMPTY_RESULT")
    keep = [v for v in range(g.n) if v not in removed]
    index = {v: i for i, v in enumerate(keep)}
    edges = [(index[u], index[v]) for u, v in g.edges if u in index and v in index]
    return Graph.from_edges(len(keep), edges)


def is_spanning_tree(g: Graph, tree: Iterable[Sequence[int]]) -> bool:
    tree_edges = [_normalize(int(u), int(v)) for u, v in tree]
    if len(tree_edges) != g.n - 1 or len(set(tree_edges)) != len(tree_edges):
        return False
    if not set(tree_edges) <= g.edge_set:
        return False
    forest = nx.Graph()
    forest.add_nodes_from(range(g.n))
    forest.add_edges_from(tree_edges)
    return nx.is_tree(forest)


def delete_tree_edges(g: Graph, tree: Iterable[Sequence[int]]) -> Graph:
    """Remove the edges of a spanning tree, keeping all n vertices.

    Args:
        g: Source graph
        tree: Edges of a spanning tree of g

    Returns:
        Graph: Same vertex set, edge set EG minus the tree
    """
    tree_edges = [_normalize(int(u), int(v)) for u, v in tree]
    if not is_spanning_tree(g, tree_edges):
        raise GraphError("edge set is not a spanning tree of the graph", code="NOT_SPANNING_TREE")
    removed = set(tree_edges)
    return Graph.from_edges(g.n, (e for e in g.edges if e not in removed))


def _toggle(edges: set, u: int, v: int) -> None:
    edge = _normalize(u, v)
    if edge in edges:
        edges.remove(edge)
    else:
        edges.add(edge)


def gen_even_graph(n: int, p: float, seed: int) -> Graph:
    """Draw a connected simple graph with all degrees even.

    Draws G(n, p), pairs the odd-degree vertices at random and toggles edge
    presence along a short path between each pair. Disconnected results are
    rejected and redrawn with a fresh sub-seed.

    Args:
        n: Vertex count (>= 3)
        p: Edge probability in (0, 1]
        seed: Base seed; the output is a deterministic function of (n, p, seed)

    Returns:
        Graph: Connected even simple graph
    """
    if n < 3:
        raise PreconditionError(f"gen_even_graph needs n >= 3, got {n}")
    if not 0.0 < p <= 1.0:
        raise PreconditionError(f"edge probability must lie in (0, 1], got {p}")

    for attempt in range(GENERATION_RETRIES + 1):
        sub_seed = int(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, attempt]).generate_state(1, dtype=np.uint64)[0])
        rng = random.Random(sub_seed)
        base = nx.gnp_random_graph(n, p, seed=sub_seed)
        edges = {_normalize(u, v) for u, v in base.edges()}

        degree = [0] * n
        for u, v in edges:
            degree[u] += 1
            degree[v] += 1
        odd = [v for v in range(n) if degree[v] % 2 == 1]
        rng.shuffle(odd)

        # Interior path vertices flip parity twice, the endpoints once.
        for u, v in zip(odd[0::2], odd[1::2]):
            if rng.random() < 0.5:
                _toggle(edges, u, v)
            else:
                middle = rng.choice([w for w in range(n) if w not in (u, v)])
                _toggle(edges, u, middle)
                _toggle(edges, middle, v)

        candidate = Graph.from_edges(n, edges)
        report = classify(candidate)
        if report.is_simple and report.is_connected and report.all_even:
            if attempt:
                logger.info("gen_even_graph(n=%d, p=%s, seed=%d) accepted after %d retries", n, p, seed, attempt)
            return candidate
        logger.debug("attempt %d rejected: connected=%s even=%s", attempt, report.is_connected, report.all_even)

    raise GraphError(
        f"no connected even graph after {GENERATION_RETRIES} retries (n={n}, p={p}, seed={seed})",
        code="GENERATION_FAILED",
    )


def complete_graph(n: int) -> Graph:
    return from_networkx(nx.complete_graph(n))


def cycle_graph(n: int) -> Graph:
    return from_networkx(nx.cycle_graph(n))


def path_graph(n: int) -> Graph:
    return from_networkx(nx.path_graph(n))


def star_graph(leaves: int) -> Graph:
    """Star with one centre (vertex 0) and the given number of leaves."""
    return from_networkx(nx.star_graph(leaves))


def bowtie() -> Graph:
    """Two triangles sharing vertex 0."""
    return Graph.from_edges(5, [(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)])


def small_even_graphs(max_n: int = 6) -> List[Graph]:
    """All connected even simple graphs with 3 <= n <= max_n, up to isomorphism.

    Args:
        max_n: Largest order, at most 7 (the extent of the graph atlas)

    Returns:
        list: One representative per isomorphism class
    """
    if max_n > 7:
        raise PreconditionError("the graph atlas only covers graphs with up to 7 vertices")
    graphs = []
    for atlas_graph in nx.graph_atlas_g():
        order = atlas_graph.number_of_nodes()
        if order < 3 or order > max_n:
            continue
        if not nx.is_connected(atlas_graph):
            continue
        if any(d % 2 for _, d in atlas_graph.degree()):
            continue
        graphs.append(from_networkx(atlas_graph))
    return graphs

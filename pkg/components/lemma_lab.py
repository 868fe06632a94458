"""Numerical checks of the Laplacian inequalities behind the asymptotic count.

Inequalities with explicit constants are asserted: a verdict ``holds`` when
the inequality is satisfied up to a relative slack of 1e-9. Constants that
are only known to exist are measured and reported in ``constant``.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd
import scipy.linalg

from components.errors import (
    EulCountError,
    GraphError,
    HypothesisError,
    LevelConstructionError,
    PreconditionError,
    SizeGuardError,
)
from components.exact_algebra import det_exact, laplacian, principal_minor, q_hat, spanning_tree_count, spanning_trees
from components.graph_core import (
    Edge,
    Graph,
    classify,
    delete_tree_edges,
    delete_vertices,
    gen_even_graph,
    to_networkx,
)
from components.spectral import (
    det_lower_bound_check,
    eigen_spectrum,
    laplacian_spectrum,
    log_det_expansion,
    lower_bound_holds,
    norms,
    symmetrized_product,
)
from components.utils import LN2, exact_ratio, log2_factorial, log2_int, to_float

logger = logging.getLogger(__name__)

REL_SLACK = 1e-9
DELETION_SUBSETS = 5
TREE_DRAWS = 50
# networkx totals spanning-tree weights in floating point once per edge
MAX_SAMPLED_TREE_ORDER = 40
CORPUS_SIZE = 100
CORPUS_ORDERS = (6, 30)
CORPUS_PROBS = (0.5, 0.7, 0.9)
LEVEL_SEED_FRACTION = 0.3
TAIL_DEGREE = 3
TAIL_MAX_ORDER = 8
LOG_DET_TRIALS = 1000

STATUS_OK = "ok"
STATUS_OUT = "out_of_hypothesis"
STATUS_SKIPPED = "skipped"

TREE_LEMMAS = (
    "tree_removal_weyl",
    "tree_removal_connectivity",
    "tree_removal_det",
    "tree_trace_bound",
    "det_lower_bound",
)


@dataclass(frozen=True)
class LemmaVerdict:
    lemma: str
    graph_id: str
    lhs: Optional[float]
    rhs: Optional[float]
    holds: bool
    slack: Optional[float]
    params: Dict[str, Any] = field(default_factory=dict)
    status: str = STATUS_OK
    constant: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key in ("lhs", "rhs", "slack", "constant"):
            value = data[key]
            if isinstance(value, float) and not math.isfinite(value):
                data[key] = None
        return data


def _tolerance(lhs: float, rhs: float) -> float:
    return REL_SLACK * max(1.0, abs(lhs), abs(rhs))


def at_most(lemma: str, graph_id: str, lhs: float, rhs: float, **kwargs) -> LemmaVerdict:
    """Verdict for lhs <= rhs."""
    return LemmaVerdict(lemma, graph_id, lhs, rhs, lhs <= rhs + _tolerance(lhs, rhs), rhs - lhs, **kwargs)


def at_least(lemma: str, graph_id: str, lhs: float, rhs: float, **kwargs) -> LemmaVerdict:
    """Verdict for lhs >= rhs."""
    return LemmaVerdict(lemma, graph_id, lhs, rhs, lhs >= rhs - _tolerance(lhs, rhs), lhs - rhs, **kwargs)


def _require_order(g: Graph, minimum: int = 2) -> None:
    if g.n < minimum:
        raise PreconditionError(f"need at least {minimum} vertices, got n={g.n}")


def _resolve_sigma(g: Graph, sigma: Optional[float]) -> Tuple[float, float]:
    """Return (sigma used, sigma_hat of g)."""
    sigma_hat = laplacian_spectrum(g).sigma_hat
    return (sigma_hat if sigma is None else sigma), sigma_hat


def _in_hypothesis(sigma: float, sigma_hat: float) -> bool:
    return sigma_hat >= sigma * (1.0 - REL_SLACK)


def verify_fiedler_bounds(
    g: Graph,
    seed: int = 0,
    subsets: Optional[Sequence[Sequence[int]]] = None,
    graph_id: str = "g",
) -> List[LemmaVerdict]:
    """Check the three min-degree and vertex-deletion bounds on lambda1.

    lambda1(G) <= n/(n-1) min d, lambda1(G) >= 2 min d - n + 2 and
    lambda1(G - r vertices) >= lambda1(G) - r. The deletion bound is
    evaluated on every subset and reported for the tightest one, which is
    stricter than the average; params carry the mean slack over all subsets.

    Args:
        g: Connected graph
        seed: Seed for the random subsets
        subsets: Explicit vertex subsets to delete instead of random ones
        graph_id: Label copied into the verdicts

    Returns:
        list: Three verdicts
    """
    _require_order(g)
    n = g.n
    lambda1 = laplacian_spectrum(g).lambda1
    min_degree = min(g.degrees)
    verdicts = [
        at_most("fiedler_upper_min_degree", graph_id, lambda1, n / (n - 1) * min_degree, params={"min_degree": min_degree}),
        at_least("fiedler_lower_min_degree", graph_id, lambda1, 2 * min_degree - n + 2, params={"min_degree": min_degree}),
    ]

    if subsets is None:
        if n < 3:
            verdicts.append(
                LemmaVerdict("fiedler_vertex_deletion", graph_id, None, None, True, None, {"reason": "n < 3"}, STATUS_SKIPPED)
            )
            return verdicts
        rng = np.random.default_rng(seed)
        subsets = []
        for _ in range(DELETION_SUBSETS):
            r = int(rng.integers(1, n - 1))
            subsets.append(sorted(int(v) for v in rng.choice(n, size=r, replace=False)))

    worst: Optional[LemmaVerdict] = None
    slacks = []
    for subset in subsets:
        reduced = delete_vertices(g, subset)
        reduced_lambda1 = eigen_spectrum(laplacian(reduced).to_array()).lambda1
        verdict = at_least(
            "fiedler_vertex_deletion",
            graph_id,
            reduced_lambda1,
            lambda1 - len(subset),
            params={"removed": [int(v) for v in subset], "r": len(subset), "subsets": len(subsets)},
        )
        slacks.append(verdict.slack)
        if worst is None or verdict.slack < worst.slack:
            worst = verdict
    worst.params["mean_slack"] = float(np.mean(slacks))
    verdicts.append(worst)
    return verdicts


def verify_spectral_radius(g: Graph, graph_id: str = "g") -> LemmaVerdict:
    """lambda_max(Q) <= n, checked with the per-vertex eigensolver tolerance."""
    summary = eigen_spectrum(laplacian(g).to_array())
    return at_most("laplacian_spectral_radius", graph_id, summary.lambda_max, g.n * (1 + 1e-8))


def verify_qhat_inverse_norm(g: Graph, sigma: Optional[float] = None, graph_id: str = "g") -> LemmaVerdict:
    """Measure c_inf = n ||Qhat^-1||_inf and check ||Qhat^-1||_1 = ||Qhat^-1||_inf.

    Args:
        g: Connected graph
        sigma: Hypothesis level; defaults to the graph's own lambda1 / n
        graph_id: Label copied into the verdict

    Returns:
        LemmaVerdict: Equality of the two norms; out_of_hypothesis when lambda1 < sigma n
    """
    _require_order(g)
    sigma, sigma_hat = _resolve_sigma(g, sigma)
    inverse = scipy.linalg.inv(q_hat(laplacian(g)).to_array())
    report = norms(inverse)
    c_inf = g.n * report.norm_inf
    tol = 1e-12 * max(1.0, report.norm_inf)
    holds = abs(report.norm1 - report.norm_inf) <= tol and math.isfinite(c_inf)
    return LemmaVerdict(
        "qhat_inverse_norm",
        graph_id,
        report.norm1,
        report.norm_inf,
        holds,
        report.norm_inf - report.norm1,
        {"sigma": sigma, "sigma_hat": sigma_hat},
        STATUS_OK if _in_hypothesis(sigma, sigma_hat) else STATUS_OUT,
        c_inf,
    )


def random_spanning_tree(
    g: Graph, rng: np.random.Generator, max_order: int = MAX_SAMPLED_TREE_ORDER
) -> Tuple[Edge, ...]:
    """Uniform spanning tree drawn by networkx.

    Args:
        g: Connected graph
        rng: Source of the networkx seed, so draws follow the caller's stream
        max_order: Refuse graphs with more vertices than this

    Returns:
        tuple: Sorted edges of the tree
    """
    if g.n > max_order:
        raise SizeGuardError(f"uniform tree sampling limited to n <= {max_order}, got n={g.n}")
    if not classify(g).is_connected:
        raise PreconditionError("graph is not connected", code="NOT_CONNECTED")
    tree = nx.random_spanning_tree(to_networkx(g), None, seed=int(rng.integers(2**32)))
    return tuple(sorted((min(u, v), max(u, v)) for u, v in tree.edges()))


def tree_max_degree(n: int, tree: Iterable[Edge]) -> int:
    degree = [0] * n
    for u, v in tree:
        degree[u] += 1
        degree[v] += 1
    return max(degree)


def _find_low_degree_tree(
    g: Graph, limit: float, rng: np.random.Generator, draws: int
) -> Tuple[Tuple[Edge, ...], bool, int]:
    tree: Tuple[Edge, ...] = ()
    for draw in range(1, draws + 1):
        tree = random_spanning_tree(g, rng)
        if tree_max_degree(g.n, tree) <= limit:
            return tree, True, draw
    return tree, False, draws


def _log_det_qhat(g: Graph) -> Tuple[int, float]:
    det = det_exact(q_hat(laplacian(g)))
    return det, log2_int(det) * LN2


def verify_minor_and_deletion(
    g: Graph,
    sigma: Optional[float] = None,
    r: int = 1,
    tree: Optional[Sequence[Edge]] = None,
    seed: int = 0,
    graph_id: str = "g",
    draws: int = TREE_DRAWS,
) -> List[LemmaVerdict]:
    """Determinant bounds for the principal minor, vertex deletion and tree removal.

    Reports the empirical constants c1 = n det M11 / det Qhat,
    c2 = (det Qhat(G) / det Qhat(G_r))^(1/r) / n and
    c4 = det Qhat(G_T) / det Qhat(G). For the removed tree T it asserts
    lambda1(G_T) >= lambda1(G) - ||Q(T)||_2, the trace bound
    tr(Q(T) Qhat^-1) <= tr(Q(T)) ||Qhat^-1||_2 and the lower bound on
    det(I - X) for X = Qhat^(-1/2) Q(T) Qhat^(-1/2). The stronger
    lambda1(G_T) >= sigma n / 2 is asserted only when lambda1 >= sigma n and
    the tree has maximum degree at most sigma n / 4.

    Args:
        g: Connected graph
        sigma: Hypothesis level; defaults to lambda1 / n
        r: Number of leading vertices removed for the deletion bound
        tree: Spanning tree to remove; sampled uniformly when omitted, and the
            tree verdicts are skipped above MAX_SAMPLED_TREE_ORDER vertices
        seed: Seed for tree sampling
        graph_id: Label copied into the verdicts
        draws: Uniform trees tried when searching for a low-degree tree

    Returns:
        list: Verdicts for every bound above
    """
    _require_order(g)
    n = g.n
    if not 1 <= r <= n - 1:
        raise PreconditionError(f"r must lie in [1, {n - 1}], got {r}")
    sigma, sigma_hat = _resolve_sigma(g, sigma)
    status = STATUS_OK if _in_hypothesis(sigma, sigma_hat) else STATUS_OUT
    params = {"sigma": sigma, "sigma_hat": sigma_hat}

    qhat = q_hat(laplacian(g))
    det_qhat, log_det_qhat = _log_det_qhat(g)
    minor = det_exact(principal_minor(qhat, 0))
    c1 = n * exact_ratio(minor, det_qhat)
    verdicts = [
        LemmaVerdict(
            "principal_minor_bound", graph_id, to_float(minor * n), to_float(det_qhat),
            minor > 0 and math.isfinite(c1), None, dict(params), status, c1,
        )
    ]

    lambda1 = sigma_hat * n
    # lambda1(G - S) >= lambda1 - |S| keeps G - S connected only while lambda1 > r
    deletion_status = status if lambda1 > r * (1.0 + REL_SLACK) else STATUS_OUT
    reduced = delete_vertices(g, range(r))
    det_reduced, log_det_reduced = _log_det_qhat(reduced)
    if det_reduced > 0:
        c2 = math.exp((log_det_qhat - log_det_reduced) / r) / n
    else:
        c2 = math.inf
    verdicts.append(
        LemmaVerdict(
            "vertex_deletion_det", graph_id, to_float(det_reduced), to_float(det_qhat),
            det_reduced > 0, None, {**params, "r": r}, deletion_status, c2,
        )
    )

    limit = sigma * n / 4
    tree_params: Dict[str, Any] = dict(params)
    if tree is None and n > MAX_SAMPLED_TREE_ORDER:
        reason = f"uniform tree sampling limited to n <= {MAX_SAMPLED_TREE_ORDER}"
        verdicts.extend(
            LemmaVerdict(lemma, graph_id, None, None, True, None, {**tree_params, "reason": reason}, STATUS_SKIPPED)
            for lemma in TREE_LEMMAS
        )
        return verdicts
    if tree is None:
        rng = np.random.default_rng(seed)
        tree, low_degree, used = _find_low_degree_tree(g, limit, rng, draws)
        tree_params["draws"] = used
    else:
        tree = tuple(tree)
        low_degree = tree_max_degree(n, tree) <= limit
    max_degree = tree_max_degree(n, tree)
    tree_params.update(tree_max_degree=max_degree, tree_degree_limit=limit)

    removed = delete_tree_edges(g, tree)
    removed_lambda1 = eigen_spectrum(laplacian(removed).to_array()).lambda1
    tree_laplacian = laplacian(Graph.from_edges(n, tree)).to_array()
    tree_norm = norms(tree_laplacian).norm2

    verdicts.append(
        at_least("tree_removal_weyl", graph_id, removed_lambda1, lambda1 - tree_norm, params=dict(tree_params))
    )

    if status == STATUS_OK and low_degree:
        connectivity = at_least(
            "tree_removal_connectivity", graph_id, removed_lambda1, sigma * n / 2, params=dict(tree_params)
        )
    else:
        reason = "lambda1 < sigma n" if status != STATUS_OK else "no tree with max degree <= sigma n / 4"
        connectivity = LemmaVerdict(
            "tree_removal_connectivity", graph_id, removed_lambda1, sigma * n / 2, True, None,
            {**tree_params, "reason": reason}, STATUS_OUT if status != STATUS_OK else STATUS_SKIPPED,
        )
    verdicts.append(connectivity)

    det_removed = det_exact(q_hat(laplacian(removed)))
    removal_status = status if lambda1 - tree_norm > _tolerance(lambda1, tree_norm) else STATUS_OUT
    c4 = exact_ratio(det_removed, det_qhat)
    verdicts.append(
        LemmaVerdict(
            "tree_removal_det", graph_id, to_float(det_removed), to_float(det_qhat),
            det_removed > 0, None, dict(tree_params), removal_status, c4,
        )
    )

    qhat_array = qhat.to_array()
    X = symmetrized_product(tree_laplacian, qhat_array)
    qhat_inverse_norm = 1.0 / float(scipy.linalg.eigh(qhat_array, eigvals_only=True)[0])
    verdicts.append(
        at_most(
            "tree_trace_bound", graph_id, float(np.trace(X)),
            float(np.trace(tree_laplacian)) * qhat_inverse_norm, params=dict(tree_params),
        )
    )

    contraction = norms(X).norm2
    if contraction < 1.0:
        lhs, rhs = det_lower_bound_check(X)
        # det(I - X) must agree with the exact determinant ratio
        if math.isfinite(c4) and c4 > 0 and abs(lhs - c4) > 1e-6 * c4:
            logger.warning("%s: det(I - X) = %.6g but exact ratio is %.6g", graph_id, lhs, c4)
        verdicts.append(
            LemmaVerdict(
                "det_lower_bound", graph_id, lhs, rhs, lower_bound_holds(lhs, rhs), lhs - rhs,
                {**tree_params, "norm2": contraction},
            )
        )
    else:
        verdicts.append(
            LemmaVerdict(
                "det_lower_bound", graph_id, None, None, True, None,
                {**tree_params, "norm2": contraction, "reason": "||X||_2 >= 1"}, STATUS_OUT,
            )
        )
    return verdicts


def verify_tree_degree_tail(g: Graph, d: int, graph_id: str = "g") -> LemmaVerdict:
    """Count spanning trees with maximum degree above d and measure c3.

    c3 = (count d! / det Qhat)^(1/n). The verdict asserts count <= t(G) and
    count = 0 once d >= n - 1.
    """
    if d < 0:
        raise PreconditionError(f"degree threshold must be nonnegative, got {d}")
    count = sum(1 for tree in spanning_trees(g, max_order=TAIL_MAX_ORDER) if tree_max_degree(g.n, tree) > d)
    total = spanning_tree_count(g)
    det_qhat, log_det_qhat = _log_det_qhat(g)
    if count and det_qhat > 0:
        c3 = math.exp((math.log(count) + log2_factorial(d) * LN2 - log_det_qhat) / g.n)
    else:
        c3 = 0.0
    holds = count <= total and (d < g.n - 1 or count == 0)
    return LemmaVerdict(
        "tree_degree_tail", graph_id, float(count), float(total), holds, float(total - count),
        {"d": d, "n": g.n}, STATUS_OK, c3,
    )


@dataclass(frozen=True)
class LevelFunction:
    """Levels h with h = 0 on A and enough lower neighbours everywhere else."""

    h: Tuple[int, ...]
    H: int
    alpha: float
    A: FrozenSet[int]

    @property
    def required(self) -> int:
        return required_neighbours(self.alpha, len(self.h))

    def lower_neighbour_counts(self, g: Graph) -> Dict[int, int]:
        return {
            v: sum(1 for w in g.adjacency[v] if self.h[w] < self.h[v])
            for v in range(g.n)
            if v not in self.A
        }

    def check(self, g: Graph) -> bool:
        if any(self.h[v] != 0 for v in self.A):
            return False
        if any(level > self.H for level in self.h):
            return False
        return all(count >= self.required for count in self.lower_neighbour_counts(g).values())


def required_neighbours(alpha: float, n: int) -> int:
    return max(1, math.ceil(alpha * n - 1e-12))


def build_level_function(g: Graph, A: Iterable[int], sigma: float, a: float) -> LevelFunction:
    """Greedy layering from a seed set A.

    If |A| > n - sigma n / 4 every other vertex goes to level 1 with
    alpha = sigma / 4. Otherwise alpha = a sigma^3 / 32 and level k holds
    every unplaced vertex with at least ceil(alpha n) neighbours already
    placed.

    Args:
        g: Connected graph with lambda1 >= sigma n
        A: Seed set, |A| >= a n
        sigma: Connectivity level
        a: Seed fraction

    Returns:
        LevelFunction: The constructed levels
    """
    n = g.n
    seeds = frozenset(int(v) for v in A)
    if not seeds <= set(range(n)):
        raise PreconditionError("seed set contains vertices outside the graph")
    if not 0 < a <= 1 or len(seeds) < a * n - 1e-12:
        raise PreconditionError(f"seed set of size {len(seeds)} is smaller than a n = {a * n:.4g}")
    if not 0 < sigma <= 1 + REL_SLACK:
        raise PreconditionError(f"sigma must lie in (0, 1], got {sigma}")
    lambda1 = laplacian_spectrum(g).lambda1
    if lambda1 < sigma * n * (1.0 - REL_SLACK):
        raise HypothesisError(f"lambda1 = {lambda1:.6g} is below sigma n = {sigma * n:.6g}")

    alpha = sigma / 4 if len(seeds) > n - sigma * n / 4 else a * sigma ** 3 / 32
    need = required_neighbours(alpha, n)
    levels = [0] * n
    placed = set(seeds)
    level = 0
    while len(placed) < n:
        level += 1
        layer = [
            v for v in range(n)
            if v not in placed and sum(1 for w in g.adjacency[v] if w in placed) >= need
        ]
        if not layer:
            stuck = frozenset(v for v in range(n) if v not in placed)
            raise LevelConstructionError(
                f"level {level}: {len(stuck)} vertices have fewer than {need} placed neighbours", stuck
            )
        for v in layer:
            levels[v] = level
        placed.update(layer)

    if level > math.ceil(1 / alpha):
        logger.warning("level function used %d levels, more than 1/alpha = %.3g", level, 1 / alpha)
    return LevelFunction(h=tuple(levels), H=level, alpha=alpha, A=seeds)


def verify_level_function(
    g: Graph, sigma: Optional[float] = None, a: float = LEVEL_SEED_FRACTION, graph_id: str = "g"
) -> LemmaVerdict:
    """Build a level function from the first ceil(a n) vertices and check it."""
    sigma, sigma_hat = _resolve_sigma(g, sigma)
    seeds = range(math.ceil(a * g.n - 1e-12))
    params = {"sigma": sigma, "a": a}
    if not _in_hypothesis(sigma, sigma_hat):
        return LemmaVerdict("level_function", graph_id, None, None, True, None, params, STATUS_OUT)
    try:
        result = build_level_function(g, seeds, sigma, a)
    except LevelConstructionError as exc:
        return LemmaVerdict(
            "level_function", graph_id, None, None, False, None,
            {**params, "stuck": sorted(exc.stuck)}, STATUS_OK,
        )
    counts = result.lower_neighbour_counts(g)
    fewest = min(counts.values()) if counts else result.required
    return LemmaVerdict(
        "level_function", graph_id, float(fewest), float(result.required), result.check(g),
        float(fewest - result.required), {**params, "alpha": result.alpha, "H": result.H}, STATUS_OK,
    )


def _random_contraction(rng: np.random.Generator, n: int) -> np.ndarray:
    X = rng.standard_normal((n, n))
    target = rng.uniform(0.05, 0.95)
    return X * (target / norms(X).norm2)


def verify_log_det_expansion(
    trials: int = LOG_DET_TRIALS, seed: int = 0, orders: Sequence[int] = (2, 3, 4), max_dim: int = 8
) -> List[LemmaVerdict]:
    """Check |log det(I + X) - truncated trace series| <= (n/m) ||X||^m / (1 - ||X||).

    Each trial draws a random square contraction and a truncation order.
    """
    rng = np.random.default_rng(seed)
    verdicts = []
    for trial in range(trials):
        dim = int(rng.integers(1, max_dim + 1))
        m = int(orders[int(rng.integers(len(orders)))])
        X = _random_contraction(rng, dim)
        series, bound = log_det_expansion(X, m)
        sign, log_det = np.linalg.slogdet(np.eye(dim) + X)
        error = abs(float(log_det) - math.log(series)) if sign > 0 else math.inf
        verdicts.append(
            LemmaVerdict(
                "log_det_expansion", f"contraction-{trial}", error, bound,
                error <= bound * (1 + REL_SLACK) + 1e-12, bound - error, {"dim": dim, "m": m},
            )
        )
    return verdicts


@dataclass(frozen=True)
class CorpusEntry:
    graph_id: str
    graph: Graph
    seed: int
    p: float


def build_corpus(
    count: int = CORPUS_SIZE,
    orders: Tuple[int, int] = CORPUS_ORDERS,
    probs: Sequence[float] = CORPUS_PROBS,
    first_seed: int = 1,
) -> List[CorpusEntry]:
    """Fixed-seed corpus of connected even graphs.

    Seed s picks n uniformly in ``orders`` and p from ``probs`` with its own
    generator, then draws gen_even_graph(n, p, s).
    """
    corpus = []
    for seed in range(first_seed, first_seed + count):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(orders[0], orders[1] + 1))
        p = float(probs[int(rng.integers(len(probs)))])
        try:
            graph = gen_even_graph(n, p, seed)
        except GraphError as exc:
            logger.warning("corpus seed %d skipped: %s", seed, exc.one_line())
            continue
        corpus.append(CorpusEntry(graph_id=f"seed{seed}-n{n}-p{p}", graph=graph, seed=seed, p=p))
    return corpus


def _guarded(lemma: str, graph_id: str, check: Callable[[], Any]) -> List[LemmaVerdict]:
    try:
        result = check()
    except EulCountError as exc:
        logger.warning("%s on %s failed: %s", lemma, graph_id, exc.one_line())
        return [LemmaVerdict(lemma, graph_id, None, None, False, None, {"error": exc.one_line()}, exc.code)]
    return list(result) if isinstance(result, list) else [result]


def _graph_verdicts(entry: CorpusEntry, sigma: Optional[float], a: float, tail_degree: int) -> List[LemmaVerdict]:
    g, gid, seed = entry.graph, entry.graph_id, entry.seed
    verdicts: List[LemmaVerdict] = []
    verdicts += _guarded("fiedler_bounds", gid, lambda: verify_fiedler_bounds(g, seed=seed, graph_id=gid))
    verdicts += _guarded("laplacian_spectral_radius", gid, lambda: verify_spectral_radius(g, graph_id=gid))
    verdicts += _guarded("qhat_inverse_norm", gid, lambda: verify_qhat_inverse_norm(g, sigma, graph_id=gid))
    verdicts += _guarded(
        "minor_and_deletion", gid, lambda: verify_minor_and_deletion(g, sigma, seed=seed, graph_id=gid)
    )
    if g.n <= TAIL_MAX_ORDER:
        verdicts += _guarded("tree_degree_tail", gid, lambda: verify_tree_degree_tail(g, tail_degree, graph_id=gid))
    verdicts += _guarded("level_function", gid, lambda: verify_level_function(g, sigma, a, graph_id=gid))
    return verdicts


def run_suite(
    corpus: Sequence[CorpusEntry],
    sigma: Optional[float] = None,
    a: float = LEVEL_SEED_FRACTION,
    tail_degree: int = TAIL_DEGREE,
    log_det_trials: int = LOG_DET_TRIALS,
    seed: int = 0,
    threads: int = 1,
) -> List[LemmaVerdict]:
    """Every check on every corpus graph, then the random-contraction trials.

    Verdict order follows the corpus order whatever the thread count.
    """
    def work(entry: CorpusEntry) -> List[LemmaVerdict]:
        return _graph_verdicts(entry, sigma, a, tail_degree)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_graph = list(pool.map(work, corpus))
    else:
        per_graph = [work(entry) for entry in corpus]
    verdicts = [v for group in per_graph for v in group]
    if log_det_trials:
        verdicts += verify_log_det_expansion(log_det_trials, seed=seed)
    return verdicts


SUMMARY_COLUMNS = ["lemma", "verdicts", "passed", "violations", "out_of_hypothesis", "skipped", "errors", "max_constant"]


def summarize(verdicts: Sequence[LemmaVerdict]) -> pd.DataFrame:
    """Per-lemma pass counts and the largest measured constant."""
    if not verdicts:
        return pd.DataFrame(columns=SUMMARY_COLUMNS)
    frame = pd.DataFrame(
        [
            {"lemma": v.lemma, "status": v.status, "holds": v.holds, "constant": v.constant}
            for v in verdicts
        ]
    )
    checked = frame["status"] == STATUS_OK
    frame["passed"] = checked & frame["holds"]
    frame["violation"] = checked & ~frame["holds"].astype(bool)
    frame["out"] = frame["status"] == STATUS_OUT
    frame["skip"] = frame["status"] == STATUS_SKIPPED
    frame["error"] = ~frame["status"].isin([STATUS_OK, STATUS_OUT, STATUS_SKIPPED])
    frame["constant"] = pd.to_numeric(frame["constant"], errors="coerce")
    grouped = frame.groupby("lemma", sort=False)
    summary = pd.DataFrame(
        {
            "verdicts": grouped.size(),
            "passed": grouped["passed"].sum(),
            "violations": grouped["violation"].sum(),
            "out_of_hypothesis": grouped["out"].sum(),
            "skipped": grouped["skip"].sum(),
            "errors": grouped["error"].sum(),
            "max_constant": grouped["constant"].max(),
        }
    ).reset_index()
    return summary[SUMMARY_COLUMNS]

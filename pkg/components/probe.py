"""Numerical probes of the angular-integral representation of Eul(G).

The integrand is evaluated through the weighted Matrix-Tree identity
sum_r M_r = det(Qhat + iB) / n, and integrated over the slice of the
hyperplane L (theta orthogonal to the all-ones vector) inside the box
|theta_j| <= delta by uniform rejection sampling.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from components.errors import PreconditionError, ProbeError, SizeGuardError
from components.exact_algebra import det_exact, laplacian, q_hat, spanning_trees
from components.graph_core import Edge, Graph, classify
from components.utils import LN2, log2_int

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.1
DEFAULT_SAMPLES = 100_000
MIN_SAMPLES = 100
MIN_ACCEPTANCE = 1e-4
MAX_BRUTE_ORDER = 7
CHUNK_SIZE = 8192
GAUSSIAN_COVER = 8.0

_SEED_MASK = (1 << 64) - 1

BatchIntegrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class ThetaPoint:
    """An angle vector with the derived quantities the integrand needs."""

    theta: np.ndarray
    delta: Dict[Edge, float]
    b_matrix: np.ndarray
    lambda_diag: np.ndarray
    mean: float


@dataclass(frozen=True)
class SliceIntegral:
    value: complex
    std_error: float
    measure: float
    measure_std_error: float
    acceptance: float
    samples: int


@dataclass(frozen=True)
class McEstimate:
    mean: complex
    std_error: float
    samples: int
    region_volume: float
    epsilon: float
    seed: int
    region_volume_std_error: float
    acceptance: float

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("mean")
        data["mean_re"] = float(self.mean.real)
        data["mean_im"] = float(self.mean.imag)
        return data


def _b_matrix(g: Graph, theta: np.ndarray) -> np.ndarray:
    B = np.zeros((g.n, g.n))
    for u, v in g.edges:
        t = math.tan(theta[u] - theta[v])
        B[u, v] = -t
        B[v, u] = t
        B[u, u] += t
        B[v, v] -= t
    return B


def make_theta(g: Graph, theta: Sequence[float]) -> ThetaPoint:
    """Wrap an angle vector for ``g``.

    Args:
        g: Graph the angles belong to
        theta: One angle per vertex

    Returns:
        ThetaPoint: theta with Delta on every edge, B, the diagonal of
        Q theta and the mean angle
    """
    values = np.asarray(theta, dtype=float)
    if values.shape != (g.n,):
        raise PreconditionError(f"theta must have {g.n} components, got shape {values.shape}")
    Q = laplacian(g).to_array()
    return ThetaPoint(
        theta=values,
        delta={(u, v): float(values[u] - values[v]) for u, v in g.edges},
        b_matrix=_b_matrix(g, values),
        lambda_diag=Q @ values,
        mean=float(values.mean()),
    )


def _qhat_array(g: Graph) -> np.ndarray:
    return q_hat(laplacian(g)).to_array()


def tree_sum_det(g: Graph, theta: ThetaPoint) -> complex:
    """Root-summed weighted tree sum as det(Qhat + iB) / n.

    The determinant comes from a complex LU factorisation; a singular matrix
    gives 0.
    """
    M = _qhat_array(g) + 1j * theta.b_matrix
    lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    swaps = int(np.count_nonzero(piv != np.arange(g.n)))
    det = complex(np.prod(np.diag(lu))) * (-1) ** swaps
    return det / g.n


def tree_sum_brute(g: Graph, theta: ThetaPoint, trees: Optional[Sequence[Tuple[Edge, ...]]] = None) -> complex:
    """Sum over roots r and spanning trees T of prod (1 + i tan(theta_j - theta_k)).

    Each tree is oriented toward r, so every non-root vertex j contributes
    the arc from j to its parent k.

    Args:
        g: Graph with at most MAX_BRUTE_ORDER vertices
        theta: Angles
        trees: Spanning trees of g, when the caller already enumerated them

    Returns:
        complex: The tree sum by explicit enumeration
    """
    if g.n > MAX_BRUTE_ORDER:
        raise SizeGuardError(f"brute-force tree sum limited to n <= {MAX_BRUTE_ORDER}, got n={g.n}")
    angles = theta.theta
    total = 0j
    if trees is None:
        trees = spanning_trees(g, max_order=MAX_BRUTE_ORDER)
    for tree in trees:
        neighbours: List[List[int]] = [[] for _ in range(g.n)]
        for u, v in tree:
            neighbours[u].append(v)
            neighbours[v].append(u)
        for root in range(g.n):
            product = 1 + 0j
            stack = [(root, -1)]
            while stack:
                vertex, parent = stack.pop()
                if parent >= 0:
                    product *= 1 + 1j * math.tan(angles[vertex] - angles[parent])
                stack.extend((w, vertex) for w in neighbours[vertex] if w != parent)
            total += product
    return total


def integrand_F(g: Graph, theta: ThetaPoint) -> complex:
    """prod over edges of cos(Delta) times the root-summed tree sum."""
    worst = max((abs(d) for d in theta.delta.values()), default=0.0)
    if worst >= math.pi / 2:
        raise ProbeError(f"|Delta| = {worst:.6g} reaches pi/2", code="TAN_SINGULARITY")
    cosines = math.prod(math.cos(d) for d in theta.delta.values())
    return cosines * tree_sum_det(g, theta)


def _edge_index(g: Graph) -> Tuple[np.ndarray, np.ndarray]:
    if not g.edges:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    u, v = zip(*g.edges)
    return np.array(u), np.array(v)


def integrand_batch(g: Graph) -> BatchIntegrand:
    """Vectorised integrand_F over a stack of angle vectors (rows)."""
    u, v = _edge_index(g)
    qhat = _qhat_array(g)
    n = g.n

    def evaluate(thetas: np.ndarray) -> np.ndarray:
        deltas = thetas[:, u] - thetas[:, v]
        tangents = np.tan(deltas)
        rows = np.arange(thetas.shape[0])[:, None]
        B = np.zeros((thetas.shape[0], n, n))
        B[rows, u, v] = -tangents
        B[rows, v, u] = tangents
        diagonal = np.zeros((thetas.shape[0], n))
        np.add.at(diagonal, (rows, u), tangents)
        np.add.at(diagonal, (rows, v), -tangents)
        B[:, np.arange(n), np.arange(n)] = diagonal
        dets = np.linalg.det(qhat[None, :, :] + 1j * B)
        values = np.prod(np.cos(deltas), axis=1) * dets / n
        if not np.all(np.isfinite(values)):
            raise ProbeError("integrand is not finite at a sampled point", code="TAN_SINGULARITY")
        return values

    return evaluate


def gaussian_integrand(g: Graph, a: float) -> BatchIntegrand:
    """exp(-a theta^T Qhat theta), which on L equals exp(-a sum of Delta^2)."""
    if a <= 0:
        raise PreconditionError(f"Gaussian scale must be positive, got {a}")
    qhat = _qhat_array(g)

    def evaluate(thetas: np.ndarray) -> np.ndarray:
        quad = np.einsum("ij,jk,ik->i", thetas, qhat, thetas)
        return np.exp(-a * quad).astype(complex)

    return evaluate


def _philox_key(seed: int, chunk: int) -> int:
    return (chunk << 64) | (seed & _SEED_MASK)


def integrate_on_slice(
    n: int,
    integrand: BatchIntegrand,
    half_width: float,
    samples: int,
    seed: int,
    threads: int = 1,
) -> SliceIntegral:
    """Integrate over L intersected with the box |theta_j| <= half_width.

    The first n-1 coordinates are drawn uniformly from the (n-1)-dimensional
    box and the last one closes the vector onto L; draws whose last
    coordinate leaves the box are rejected. This chart is uniform on the
    slice with constant volume factor sqrt(n).

    Samples are drawn in fixed-size chunks, each from its own Philox stream
    keyed by (seed, chunk), so the result does not depend on ``threads``.

    Args:
        n: Dimension, at least 2
        integrand: Maps an (m, n) array of points on L to m complex values
        half_width: Box half-width
        samples: Number of draws
        seed: Base seed
        threads: Worker threads

    Returns:
        SliceIntegral: Integral and slice measure with standard errors
    """
    if n < 2:
        raise PreconditionError("the slice is a single point for n < 2")
    if samples < 2:
        raise PreconditionError(f"need at least 2 samples, got {samples}")
    if half_width <= 0:
        raise PreconditionError(f"half width must be positive, got {half_width}")

    def draw(chunk: int) -> Tuple[np.ndarray, np.ndarray]:
        size = min(CHUNK_SIZE, samples - chunk * CHUNK_SIZE)
        rng = np.random.Generator(np.random.Philox(key=_philox_key(seed, chunk)))
        head = rng.uniform(-half_width, half_width, size=(size, n - 1))
        last = -head.sum(axis=1)
        accepted = np.abs(last) <= half_width
        values = np.zeros(size, dtype=complex)
        if accepted.any():
            values[accepted] = integrand(np.column_stack([head[accepted], last[accepted]]))
        return values, accepted

    chunks = range((samples + CHUNK_SIZE - 1) // CHUNK_SIZE)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(draw, chunks))
    else:
        parts = [draw(c) for c in chunks]

    values = np.concatenate([p[0] for p in parts])
    accepted = np.concatenate([p[1] for p in parts]).astype(float)
    acceptance = float(accepted.mean())
    logger.info("slice sampler: n=%d samples=%d acceptance=%.4f", n, samples, acceptance)
    if acceptance < MIN_ACCEPTANCE:
        raise ProbeError(
            f"acceptance rate {acceptance:.3g} below {MIN_ACCEPTANCE:g} (n={n}, half_width={half_width:.4g})"
        )

    chart_volume = math.sqrt(n) * (2.0 * half_width) ** (n - 1)
    scaled = chart_volume * values
    root_n = math.sqrt(samples)
    return SliceIntegral(
        value=complex(scaled.mean()),
        std_error=float(np.std(scaled, ddof=1)) / root_n,
        measure=chart_volume * acceptance,
        measure_std_error=chart_volume * float(np.std(accepted, ddof=1)) / root_n,
        acceptance=acceptance,
        samples=samples,
    )


def region_half_width(n: int, epsilon: float) -> float:
    """n^(-1/2 + epsilon), the half-width of the dominant region."""
    return n ** (-0.5 + epsilon)


def mc_S0(
    g: Graph,
    epsilon: float = DEFAULT_EPSILON,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    threads: int = 1,
    integrand: Optional[BatchIntegrand] = None,
) -> McEstimate:
    """Monte Carlo estimate of S0 = pi sqrt(n) times the integral over L and the region.

    The default integrand is integrand_F / n, the root average of the tree
    sum. Passing ``integrand`` replaces that average, e.g. a constant for
    volume calibration.

    Args:
        g: Connected even graph
        epsilon: Region exponent; half-width is n^(-1/2 + epsilon)
        samples: Draws, at least MIN_SAMPLES
        seed: Base seed
        threads: Worker threads; the estimate does not depend on it
        integrand: Optional replacement integrand

    Returns:
        McEstimate: S0 estimate with standard error and region volume
    """
    report = classify(g)
    if not report.all_even:
        raise PreconditionError("graph has odd-degree vertices", code="ODD_DEGREE")
    if not report.is_connected:
        raise PreconditionError("graph is not connected", code="NOT_CONNECTED")
    if samples < MIN_SAMPLES:
        raise PreconditionError(f"mc_S0 needs at least {MIN_SAMPLES} samples, got {samples}")
    if epsilon <= 0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon}")
    half_width = region_half_width(g.n, epsilon)
    # the mod-pi folding of the region is only ignorable below pi/2
    if half_width >= math.pi / 2:
        raise PreconditionError(f"half width {half_width:.4g} is not below pi/2; lower epsilon")

    if integrand is None:
        tree_integrand = integrand_batch(g)
        n = g.n

        def integrand(thetas: np.ndarray) -> np.ndarray:
            return tree_integrand(thetas) / n

    result = integrate_on_slice(g.n, integrand, half_width, samples, seed, threads)
    scale = math.pi * math.sqrt(g.n)
    return McEstimate(
        mean=scale * result.value,
        std_error=scale * result.std_error,
        samples=samples,
        region_volume=result.measure,
        epsilon=epsilon,
        seed=seed,
        region_volume_std_error=result.measure_std_error,
        acceptance=result.acceptance,
    )


def _log_det_qhat(g: Graph) -> float:
    return log2_int(det_exact(q_hat(laplacian(g)))) * LN2


def _safe_exp(log_value: float) -> float:
    try:
        return math.exp(log_value)
    except OverflowError:
        return math.inf


def gaussian_reference(g: Graph, a: float, whole_space: bool = False) -> float:
    """Closed-form Gaussian integral of exp(-a theta^T Qhat theta).

    Over L the value is pi^((n-1)/2) a^(-(n-1)/2) n^(1/2) / sqrt(det Qhat);
    over all of R^n it is pi^(n/2) a^(-n/2) / sqrt(det Qhat). The determinant
    is exact and enters in log space.
    """
    if a <= 0:
        raise PreconditionError(f"Gaussian scale must be positive, got {a}")
    n = g.n
    log_det = _log_det_qhat(g)
    if whole_space:
        log_value = n / 2 * math.log(math.pi / a) - 0.5 * log_det
    else:
        log_value = (n - 1) / 2 * math.log(math.pi / a) + 0.5 * math.log(n) - 0.5 * log_det
    return _safe_exp(log_value)


def gaussian_half_width(g: Graph, a: float) -> float:
    """Box half-width holding essentially all Gaussian mass on L."""
    qhat = _qhat_array(g)
    smallest = float(scipy.linalg.eigh(qhat, eigvals_only=True)[0])
    return GAUSSIAN_COVER / math.sqrt(2.0 * a * smallest)


def tree_sum_asymptotic(g: Graph, theta: ThetaPoint) -> complex:
    """Leading-order approximation of the root-summed tree sum.

    det(Qhat) exp(i theta^T Q alpha + tr((Lambda Qhat^-1)^2) / 2) / n, where
    alpha is the diagonal of Qhat^-1 and Lambda = diag(Q theta).
    """
    qhat = _qhat_array(g)
    inverse = scipy.linalg.inv(qhat)
    Q = laplacian(g).to_array()
    alpha = np.diag(inverse)
    phase = float(theta.theta @ Q @ alpha)
    X = np.diag(theta.lambda_diag) @ inverse
    growth = 0.5 * float(np.trace(X @ X))
    det_qhat = _safe_exp(_log_det_qhat(g))
    return det_qhat * complex(np.exp(1j * phase + growth)) / g.n


def s0_scale(g: Graph) -> float:
    """2^((n-1)/2) pi^((n+1)/2) sqrt(det Qhat) / n, the order of magnitude of S0."""
    n = g.n
    log_value = (n - 1) / 2 * LN2 + (n + 1) / 2 * math.log(math.pi) - math.log(n) + 0.5 * _log_det_qhat(g)
    return _safe_exp(log_value)

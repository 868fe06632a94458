import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike

from components.errors import ConsistencyError, PreconditionError
from components.exact_algebra import laplacian
from components.graph_core import Graph

logger = logging.getLogger(__name__)

EIGEN_TOL_PER_VERTEX = 1e-8
SYMMETRY_TOL = 1e-12
LOWER_BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class SpectralSummary:
    """Sorted eigenvalues of a symmetric matrix, with the Laplacian shorthands."""

    eigenvalues: Tuple[float, ...]
    lambda1: float
    lambda_max: float
    sigma_hat: float

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class NormReport:
    norm1: float
    norm_inf: float
    norm2: float
    norm_hs: float


def _is_symmetric(M: np.ndarray) -> bool:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    return bool(np.allclose(M, M.T, rtol=0.0, atol=SYMMETRY_TOL * scale))


def eigen_spectrum(Q: ArrayLike) -> SpectralSummary:
    """Full spectrum of a symmetric matrix, ascending.

    Args:
        Q: Symmetric real matrix (typically a Laplacian)

    Returns:
        SpectralSummary: Eigenvalues with lambda1 = second smallest,
        lambda_max = largest and sigma_hat = lambda1 / n
    """
    M = np.asarray(Q, dtype=float)
    if not _is_symmetric(M):
        raise PreconditionError("eigen_spectrum needs a symmetric matrix", code="NOT_SYMMETRIC")
    n = M.shape[0]
    values = np.sort(scipy.linalg.eigh(M, eigvals_only=True))
    lambda1 = float(values[1]) if n >= 2 else 0.0
    return SpectralSummary(
        eigenvalues=tuple(float(x) for x in values),
        lambda1=lambda1,
        lambda_max=float(values[-1]),
        sigma_hat=lambda1 / n,
    )


def laplacian_spectrum(g: Graph) -> SpectralSummary:
    """Spectrum of Q(G) with the Laplacian invariants checked."""
    summary = eigen_spectrum(laplacian(g).to_array())
    tol = EIGEN_TOL_PER_VERTEX * g.n
    if abs(summary.eigenvalues[0]) > tol:
        raise ConsistencyError(f"smallest Laplacian eigenvalue {summary.eigenvalues[0]!r} is not 0")
    if summary.lambda_max > g.n + tol:
        raise ConsistencyError(f"largest eigenvalue {summary.lambda_max!r} exceeds n={g.n}")
    return summary


def norms(M: ArrayLike) -> NormReport:
    """Operator 1-, infinity- and 2-norms plus the Hilbert-Schmidt norm.

    The 2-norm comes from the symmetric eigensolver when M is symmetric and
    from the singular values otherwise.
    """
    A = np.atleast_2d(np.asarray(M, dtype=float))
    if A.size == 0:
        return NormReport(0.0, 0.0, 0.0, 0.0)
    abs_a = np.abs(A)
    norm1 = float(abs_a.sum(axis=0).max())
    norm_inf = float(abs_a.sum(axis=1).max())
    if _is_symmetric(A):
        norm2 = float(np.max(np.abs(scipy.linalg.eigh(A, eigvals_only=True))))
    else:
        norm2 = float(scipy.linalg.svdvals(A)[0])
    norm_hs = float(np.sqrt((abs_a ** 2).sum()))
    return NormReport(norm1=norm1, norm_inf=norm_inf, norm2=norm2, norm_hs=norm_hs)


def log_det_expansion(X: ArrayLike, m: int) -> Tuple[float, float]:
    """Truncated trace series for det(I + X) and its remainder bound.

    For ||X||_2 < 1, log det(I + X) equals sum_{r<m} (-1)^(r+1)/r tr(X^r) plus
    a remainder bounded by (n/m) ||X||_2^m / (1 - ||X||_2).

    Args:
        X: Square real matrix with spectral norm below 1
        m: Truncation order, at least 2

    Returns:
        tuple: (exp of the truncated series, remainder bound)
    """
    A = np.asarray(X, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise PreconditionError("log_det_expansion needs a square matrix")
    if m < 2:
        raise PreconditionError(f"expansion order must be at least 2, got {m}")
    n = A.shape[0]
    norm2 = norms(A).norm2
    if norm2 >= 1.0:
        raise PreconditionError(f"||X||_2 = {norm2:.6g} is not below 1", code="NOT_CONTRACTION")

    series = 0.0
    power = np.eye(n)
    for r in range(1, m):
        power = power @ A
        series += ((-1) ** (r + 1)) / r * float(np.trace(power))
    bound = (n / m) * norm2 ** m / (1.0 - norm2)
    return math.exp(series), bound


def det_lower_bound_check(X: ArrayLike) -> Tuple[float, float]:
    """Evaluate det(I - X) against exp(-tr(X) / (1 - ||X||_2)).

    Only symmetric positive semidefinite contractions are accepted; products
    of PSD matrices must be brought to that form with symmetrized_product.

    Args:
        X: Symmetric PSD matrix with ||X||_2 < 1

    Returns:
        tuple: (lhs, rhs); the bound asserts lhs >= rhs
    """
    A = np.asarray(X, dtype=float)
    if not _is_symmetric(A):
        raise PreconditionError("det_lower_bound_check needs a symmetric matrix", code="NOT_SYMMETRIC")
    n = A.shape[0]
    eigenvalues = scipy.linalg.eigh(A, eigvals_only=True)
    tol = EIGEN_TOL_PER_VERTEX * max(n, 1)
    if n and eigenvalues.min() < -tol:
        raise PreconditionError(f"matrix has negative eigenvalue {eigenvalues.min():.3g}", code="NOT_PSD")
    norm2 = float(np.max(np.abs(eigenvalues))) if n else 0.0
    if norm2 >= 1.0:
        raise PreconditionError(f"||X||_2 = {norm2:.6g} is not below 1", code="NOT_CONTRACTION")
    # det(I - X) from the eigenvalues keeps lhs consistent with the PSD check
    lhs = float(np.prod(1.0 - np.clip(eigenvalues, 0.0, None))) if n else 1.0
    rhs = math.exp(-float(np.trace(A)) / (1.0 - norm2))
    return lhs, rhs


def lower_bound_holds(lhs: float, rhs: float) -> bool:
    return lhs >= rhs * (1.0 - LOWER_BOUND_SLACK)


def symmetrized_product(P: ArrayLike, Qhat: ArrayLike) -> np.ndarray:
    """Qhat^(-1/2) P Qhat^(-1/2), similar to P Qhat^(-1).

    Both inputs must be symmetric, Qhat positive definite and P PSD; the
    result has the same eigenvalues as P Qhat^(-1) and is symmetric PSD.
    """
    P = np.asarray(P, dtype=float)
    Qh = np.asarray(Qhat, dtype=float)
    w, V = scipy.linalg.eigh(Qh)
    if w.min() <= 0:
        raise PreconditionError("Qhat is not positive definite", code="NOT_PSD")
    inv_sqrt = (V / np.sqrt(w)) @ V.T
    S = inv_sqrt @ P @ inv_sqrt
    return (S + S.T) / 2.0

import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from components.errors import PreconditionError
from components.exact_algebra import laplacian, q_hat, spanning_tree_count
from components.graph_core import Graph, complete_graph, cycle_graph, gen_even_graph, small_even_graphs, star_graph
from components.spectral import (
    det_lower_bound_check,
    eigen_spectrum,
    laplacian_spectrum,
    log_det_expansion,
    lower_bound_holds,
    norms,
    symmetrized_product,
)


def contractions(max_order=6, radius=0.9):
    """Random square matrices rescaled to spectral norm ``radius``."""
    entries = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
    return st.integers(min_value=1, max_value=max_order).flatmap(
        lambda n: st.lists(st.lists(entries, min_size=n, max_size=n), min_size=n, max_size=n)
    ).map(lambda rows: _rescale(np.array(rows), radius))


def _rescale(A, radius):
    norm2 = np.linalg.norm(A, 2)
    if norm2 < 1e-6:
        return np.zeros_like(A)
    return A * (radius / norm2)


@pytest.mark.parametrize("n", range(3, 13))
def test_complete_graph_spectrum(n):
    summary = laplacian_spectrum(complete_graph(n))
    assert summary.lambda1 == pytest.approx(n)
    assert summary.lambda_max == pytest.approx(n)
    assert summary.sigma_hat == pytest.approx(1.0)
    assert summary.eigenvalues[0] == pytest.approx(0.0, abs=1e-9)


def test_star_spectrum(star5):
    summary = laplacian_spectrum(star5)
    assert summary.eigenvalues == pytest.approx([0, 1, 1, 1, 1, 6], abs=1e-9)
    assert summary.lambda1 == pytest.approx(1.0)


def test_cycle_fiedler_value():
    summary = laplacian_spectrum(cycle_graph(6))
    assert summary.lambda1 == pytest.approx(2 - 2 * math.cos(2 * math.pi / 6))
    assert summary.sigma_hat == pytest.approx(1 / 6)


def test_disconnected_graph_has_zero_fiedler_value():
    g = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert laplacian_spectrum(g).lambda1 == pytest.approx(0.0, abs=1e-9)


def test_eigen_spectrum_rejects_non_symmetric():
    with pytest.raises(PreconditionError) as excinfo:
        eigen_spectrum([[0.0, 1.0], [0.0, 0.0]])
    assert excinfo.value.code == "NOT_SYMMETRIC"


def test_norms_of_small_matrix():
    report = norms([[1.0, -2.0], [3.0, 4.0]])
    assert report.norm1 == 6.0
    assert report.norm_inf == 7.0
    assert report.norm_hs == pytest.approx(math.sqrt(30.0))
    assert report.norm2 == pytest.approx(np.linalg.norm([[1.0, -2.0], [3.0, 4.0]], 2))


def test_norm_inverse_q_hat_of_complete_graph():
    Qh = q_hat(laplacian(complete_graph(7))).to_array()
    report = norms(np.linalg.inv(Qh))
    assert report.norm_inf == pytest.approx(1 / 7)
    assert report.norm2 == pytest.approx(1 / 7)


MATRIX_TREE_GRAPHS = (
    small_even_graphs(6)
    + [complete_graph(n) for n in range(4, 13)]
    + [cycle_graph(12), star_graph(11)]
    + [gen_even_graph(12, p, seed=s) for s, p in enumerate((0.5, 0.7, 0.9))]
)


@pytest.mark.parametrize("g", MATRIX_TREE_GRAPHS)
def test_nonzero_eigenvalues_multiply_to_n_times_tree_count(g):
    eigenvalues = laplacian_spectrum(g).eigenvalues
    assert math.prod(eigenvalues[1:]) / g.n == pytest.approx(spanning_tree_count(g), rel=1e-6)


@pytest.mark.parametrize("g", MATRIX_TREE_GRAPHS)
def test_q_hat_row_and_column_sums_equal_n(g):
    report = norms(q_hat(laplacian(g)).to_array())
    assert report.norm1 == g.n
    assert report.norm_inf == g.n


@given(X=contractions(radius=2.5))
def test_symmetric_norm2_matches_singular_values(X):
    S = (X + X.T) / 2
    expected = float(scipy.linalg.svdvals(S)[0]) if S.size else 0.0
    assert norms(S).norm2 == pytest.approx(expected, rel=1e-9, abs=1e-9)


@given(X=contractions())
def test_log_det_expansion_remainder_is_bounded(X):
    n = X.shape[0]
    sign, logdet = np.linalg.slogdet(np.eye(n) + X)
    assert sign > 0
    for m in (2, 3, 4):
        approx, bound = log_det_expansion(X, m)
        assert abs(logdet - math.log(approx)) <= bound + 1e-9


def test_log_det_expansion_rejects_non_contraction():
    with pytest.raises(PreconditionError) as excinfo:
        log_det_expansion(np.eye(3), 2)
    assert excinfo.value.code == "NOT_CONTRACTION"


def test_log_det_expansion_rejects_low_order():
    with pytest.raises(PreconditionError):
        log_det_expansion(np.zeros((2, 2)), 1)


def test_det_lower_bound_on_diagonal():
    lhs, rhs = det_lower_bound_check(np.diag([0.5, 0.2]))
    assert lhs == pytest.approx(0.4)
    assert rhs == pytest.approx(math.exp(-1.4))
    assert lower_bound_holds(lhs, rhs)


@given(X=contractions(radius=0.8))
def test_det_lower_bound_on_psd_contractions(X):
    psd = X @ X.T
    psd = (psd + psd.T) / 2
    lhs, rhs = det_lower_bound_check(psd)
    assert lower_bound_holds(lhs, rhs)


@pytest.mark.parametrize(
    "X, code",
    [
        (np.diag([-0.5, 0.2]), "NOT_PSD"),
        (np.array([[0.0, 0.1], [0.0, 0.0]]), "NOT_SYMMETRIC"),
        (np.diag([1.0, 0.2]), "NOT_CONTRACTION"),
    ],
)
def test_det_lower_bound_preconditions(X, code):
    with pytest.raises(PreconditionError) as excinfo:
        det_lower_bound_check(X)
    assert excinfo.value.code == code


def test_symmetrized_product_shares_eigenvalues():
    g = star_graph(4)
    Qh = q_hat(laplacian(g)).to_array()
    P = np.diag([0.0, 1.0, 1.0, 0.0, 2.0])
    S = symmetrized_product(P, Qh)
    assert np.allclose(S, S.T)
    expected = np.sort(np.linalg.eigvals(P @ np.linalg.inv(Qh)).real)
    assert np.allclose(np.sort(np.linalg.eigvalsh(S)), expected)

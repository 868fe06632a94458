import pytest
from hypothesis import given
from hypothesis import strategies as st

from components.counting import Orientation
from components.errors import PreconditionError, SizeGuardError
from components.exact_algebra import (
    IntMatrix,
    arborescence_count,
    det_exact,
    laplacian,
    out_degree_laplacian,
    principal_minor,
    q_hat,
    spanning_tree_count,
    spanning_trees,
)
from components.graph_core import (
    Graph,
    complete_graph,
    cycle_graph,
    is_spanning_tree,
    path_graph,
    small_even_graphs,
    star_graph,
)


def square_matrices(max_order=5, bound=6):
    return st.integers(min_value=1, max_value=max_order).flatmap(
        lambda n: st.lists(
            st.lists(st.integers(min_value=-bound, max_value=bound), min_size=n, max_size=n),
            min_size=n,
            max_size=n,
        )
    )


def test_det_small_cases():
    assert det_exact(IntMatrix.from_rows([])) == 1
    assert det_exact(IntMatrix.from_rows([[7]])) == 7
    assert det_exact(IntMatrix.from_rows([[1, 2], [3, 4]])) == -2
    assert det_exact(IntMatrix.from_rows([[0, 1], [1, 0]])) == -1
    assert det_exact(IntMatrix.from_rows([[1, 2], [2, 4]])) == 0


def test_det_exceeds_float_precision():
    # diag(10^20, 10^20 + 1) is not representable exactly as a double product
    big = 10**20
    m = IntMatrix.from_rows([[big, 1], [0, big + 1]])
    assert det_exact(m) == big * (big + 1)


def test_det_rejects_non_square():
    with pytest.raises(PreconditionError):
        det_exact(IntMatrix.from_rows([[1, 2, 3], [4, 5, 6]]))


def cofactor_det(rows):
    """Laplace expansion along the first row."""
    if not rows:
        return 1
    return sum(
        (-1) ** j * entry * cofactor_det([row[:j] + row[j + 1 :] for row in rows[1:]])
        for j, entry in enumerate(rows[0])
        if entry
    )


@given(rows=square_matrices(max_order=6))
def test_det_matches_cofactor_expansion(rows):
    assert det_exact(IntMatrix.from_rows(rows)) == cofactor_det(rows)


@given(rows=square_matrices())
def test_det_of_transpose(rows):
    transposed = [list(col) for col in zip(*rows)]
    assert det_exact(IntMatrix.from_rows(rows)) == det_exact(IntMatrix.from_rows(transposed))


def test_laplacian_rows_sum_to_zero(bowtie_graph):
    Q = laplacian(bowtie_graph)
    assert all(sum(row) == 0 for row in Q.rows)
    assert Q[0, 0] == 4 and Q[1, 2] == -1 and Q[1, 3] == 0


def test_q_hat_adds_all_ones(k3):
    assert q_hat(laplacian(k3)).to_list() == [[3, 0, 0], [0, 3, 0], [0, 0, 3]]


def test_principal_minor_removes_row_and_column():
    m = IntMatrix.from_rows([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
    assert principal_minor(m, 1).to_list() == [[1, 3], [7, 9]]


@pytest.mark.parametrize("n", range(2, 9))
def test_cayley_formula(n):
    assert spanning_tree_count(complete_graph(n)) == n ** (n - 2)


@pytest.mark.parametrize("n", range(3, 10))
def test_cycle_and_tree_counts(n):
    assert spanning_tree_count(cycle_graph(n)) == n
    assert spanning_tree_count(path_graph(n)) == 1
    assert spanning_tree_count(star_graph(n)) == 1


def test_disconnected_graph_has_no_spanning_trees():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    assert spanning_tree_count(g) == 0


@pytest.mark.parametrize("n", range(3, 8))
def test_det_q_hat_is_n_squared_times_trees(n):
    g = complete_graph(n)
    assert det_exact(q_hat(laplacian(g))) == n * n * spanning_tree_count(g)


def test_spanning_tree_enumeration_matches_matrix_tree():
    for g in small_even_graphs(6) + [complete_graph(5), star_graph(4), path_graph(5)]:
        trees = list(spanning_trees(g))
        assert len(trees) == spanning_tree_count(g)
        assert len(set(trees)) == len(trees)
        assert all(is_spanning_tree(g, tree) for tree in trees)


def test_disconnected_graph_enumerates_no_trees():
    g = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert list(spanning_trees(g)) == []


def test_spanning_tree_enumeration_guard():
    with pytest.raises(SizeGuardError):
        list(spanning_trees(complete_graph(9)))


def test_out_degree_laplacian():
    Q = out_degree_laplacian(3, [(0, 1), (1, 2), (2, 0)])
    assert Q.to_list() == [[1, -1, 0], [0, 1, -1], [-1, 0, 1]]


def test_arborescences_of_directed_triangle(k3):
    d = Orientation(k3, ((0, 1), (2, 0), (1, 2)))
    assert [arborescence_count(d, r) for r in range(3)] == [1, 1, 1]


def test_arborescence_root_out_of_range(k3):
    d = Orientation(k3, ((0, 1), (2, 0), (1, 2)))
    with pytest.raises(PreconditionError):
        arborescence_count(d, 3)

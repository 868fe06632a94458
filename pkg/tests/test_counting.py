import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from components.counting import (
    CountMethod,
    Orientation,
    best_count,
    degree_factorial_product,
    eul_backtrack,
    eul_exact,
    eulerian_orientations,
    integral_from_count,
)
from components.errors import PreconditionError, SizeGuardError
from components.estimator import kn_asymptotic
from components.graph_core import Graph, complete_graph, cycle_graph, gen_even_graph, small_even_graphs


def test_k3_has_two_circuits(k3):
    result = eul_exact(k3)
    assert result.eul == 2
    assert result.orientation_count == 2
    assert result.tree_count == 3
    assert result.method == CountMethod.BEST_SUM


def test_k5_has_264_circuits(k5):
    result = eul_exact(k5)
    assert result.eul == 264
    assert result.orientation_count == 24
    assert result.tree_count == 125


@pytest.mark.parametrize("n", range(3, 10))
def test_cycles_have_two_circuits(n):
    assert eul_exact(cycle_graph(n)).eul == 2
    assert eul_backtrack(cycle_graph(n)) == 2


def test_bowtie_has_four_circuits(bowtie_graph):
    assert eul_exact(bowtie_graph).eul == 4
    assert eul_backtrack(bowtie_graph) == 4


def test_every_k5_orientation_has_eleven_arborescences(k5):
    orientations = list(eulerian_orientations(k5))
    assert len(orientations) == 24
    assert len({d.arcs for d in orientations}) == 24
    for d in orientations:
        assert d.is_eulerian()
        assert best_count(d) == 11
        assert best_count(d.reversed(), root=3) == 11


def test_degree_factorial_product(k5, bowtie_graph):
    assert degree_factorial_product(k5) == 1
    assert degree_factorial_product(complete_graph(7)) == 2**7
    assert degree_factorial_product(bowtie_graph) == 1


def test_count_is_independent_of_root(bowtie_graph):
    counts = {eul_exact(bowtie_graph, root=r).eul for r in range(bowtie_graph.n)}
    assert counts == {4}


def test_count_is_independent_of_thread_count():
    g = gen_even_graph(7, 0.8, seed=11)
    assert eul_exact(g, threads=4) == eul_exact(g, threads=1)


def test_exact_agrees_with_backtracking_on_every_small_graph():
    for g in small_even_graphs(6):
        eul = eul_exact(g).eul
        assert eul == eul_backtrack(g), g.edges
        # reversing a circuit gives a different circuit
        assert eul % 2 == 0, g.edges


@settings(max_examples=200)
@given(
    n=st.integers(min_value=3, max_value=6),
    p=st.sampled_from([0.4, 0.6, 0.8, 1.0]),
    seed=st.integers(min_value=0, max_value=10**6),
)
def test_exact_agrees_with_backtracking_on_labelled_graphs(n, p, seed):
    g = gen_even_graph(n, p, seed)
    assert eul_exact(g).eul == eul_backtrack(g)


def test_odd_degree_is_rejected(k4):
    with pytest.raises(PreconditionError) as excinfo:
        eul_exact(k4)
    assert excinfo.value.code == "ODD_DEGREE"
    with pytest.raises(PreconditionError):
        eul_backtrack(k4)


def test_disconnected_graph_is_rejected():
    g = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    with pytest.raises(PreconditionError) as excinfo:
        eul_exact(g)
    assert excinfo.value.code == "NOT_CONNECTED"


def test_size_guards(k5):
    with pytest.raises(SizeGuardError):
        eul_exact(k5, max_edges=9)
    with pytest.raises(SizeGuardError):
        eul_backtrack(k5, max_edges=9)
    with pytest.raises(SizeGuardError):
        list(eulerian_orientations(k5, max_edges=9))


def test_orientation_must_match_edges(k3):
    with pytest.raises(PreconditionError):
        Orientation(k3, ((0, 1), (1, 2), (2, 0)))
    with pytest.raises(PreconditionError):
        Orientation(k3, ((0, 1),))


def test_best_count_rejects_unbalanced_orientation(k3):
    d = Orientation(k3, ((0, 1), (0, 2), (1, 2)))
    with pytest.raises(PreconditionError) as excinfo:
        best_count(d)
    assert excinfo.value.code == "NOT_EULERIAN"


def test_integral_from_count_for_k5(k5):
    assert integral_from_count(k5, 264) == pytest.approx(264 * math.pi**5 / 64)


def test_integral_from_count_rejects_zero(k5):
    with pytest.raises(PreconditionError):
        integral_from_count(k5, 0)


@pytest.mark.slow
def test_k7_count_moves_toward_asymptotic():
    g = complete_graph(7)
    result = eul_exact(g, threads=4, max_edges=21)
    assert result.orientation_count == 2640
    assert result.tree_count == 7**5
    ratio5 = 264 / 2.0 ** kn_asymptotic(5)
    ratio7 = result.eul / 2.0 ** kn_asymptotic(7)
    assert abs(1 - ratio7) < abs(1 - ratio5)

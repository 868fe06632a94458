import math
from collections import Counter

import numpy as np
import pandas as pd
import pytest

from components.errors import HypothesisError, PreconditionError, SizeGuardError
from components.exact_algebra import spanning_trees
from components.graph_core import complete_graph, gen_even_graph, is_spanning_tree
from components.lemma_lab import (
    MAX_SAMPLED_TREE_ORDER,
    STATUS_OK,
    STATUS_OUT,
    STATUS_SKIPPED,
    SUMMARY_COLUMNS,
    TREE_LEMMAS,
    LemmaVerdict,
    at_least,
    at_most,
    build_corpus,
    build_level_function,
    random_spanning_tree,
    required_neighbours,
    run_suite,
    summarize,
    tree_max_degree,
    verify_fiedler_bounds,
    verify_level_function,
    verify_log_det_expansion,
    verify_minor_and_deletion,
    verify_qhat_inverse_norm,
    verify_spectral_radius,
    verify_tree_degree_tail,
)


def by_lemma(verdicts):
    return {v.lemma: v for v in verdicts}


def test_verdict_helpers_allow_relative_slack():
    assert at_most("x", "g", 1.0 + 1e-12, 1.0).holds
    assert not at_most("x", "g", 1.1, 1.0).holds
    assert at_least("x", "g", 2.0, 2.0).slack == 0.0
    assert not at_least("x", "g", 1.0, 2.0).holds


def test_verdict_dict_drops_non_finite_values():
    verdict = LemmaVerdict("x", "g", math.inf, 1.0, True, -math.inf, constant=math.nan)
    data = verdict.to_dict()
    assert data["lhs"] is None and data["slack"] is None and data["constant"] is None
    assert data["rhs"] == 1.0


@pytest.mark.parametrize("n", [4, 5, 7])
def test_fiedler_bounds_on_complete_graph(n):
    verdicts = by_lemma(verify_fiedler_bounds(complete_graph(n), subsets=[[0]]))
    upper = verdicts["fiedler_upper_min_degree"]
    assert upper.holds and upper.slack == pytest.approx(0.0, abs=1e-9)
    deletion = verdicts["fiedler_vertex_deletion"]
    assert deletion.holds and deletion.slack == pytest.approx(0.0, abs=1e-9)


def test_fiedler_lower_bound_slack_on_star(star5):
    verdicts = by_lemma(verify_fiedler_bounds(star5, seed=3))
    lower = verdicts["fiedler_lower_min_degree"]
    assert lower.holds
    assert lower.lhs == pytest.approx(1.0)
    assert lower.slack == pytest.approx(3.0)
    assert all(v.holds for v in verdicts.values())


def test_fiedler_deletion_reports_tightest_and_mean_slack(star5):
    # deleting leaves keeps lambda1 = 1 while the bound drops by one per vertex
    deletion = by_lemma(verify_fiedler_bounds(star5, subsets=[[1], [1, 2]]))["fiedler_vertex_deletion"]
    assert deletion.holds
    assert deletion.params["removed"] == [1]
    assert deletion.slack == pytest.approx(1.0)
    assert deletion.params["mean_slack"] == pytest.approx(1.5)


def test_fiedler_deletion_skipped_for_tiny_graphs():
    verdicts = by_lemma(verify_fiedler_bounds(complete_graph(2)))
    assert verdicts["fiedler_vertex_deletion"].status == STATUS_SKIPPED


def test_spectral_radius(k5, star5):
    assert verify_spectral_radius(k5).holds
    assert verify_spectral_radius(star5).lhs == pytest.approx(6.0)


@pytest.mark.parametrize("n", [3, 5, 8])
def test_qhat_inverse_norm_constant_for_complete_graph(n):
    verdict = verify_qhat_inverse_norm(complete_graph(n), sigma=0.5)
    assert verdict.holds
    assert verdict.status == STATUS_OK
    assert verdict.constant == pytest.approx(1.0)


def test_qhat_inverse_norm_out_of_hypothesis(c6):
    verdict = verify_qhat_inverse_norm(c6, sigma=0.5)
    assert verdict.status == STATUS_OUT
    assert verdict.holds


def test_minor_constant_for_complete_graph(k5):
    verdicts = by_lemma(verify_minor_and_deletion(k5, sigma=0.5, seed=1))
    minor = verdicts["principal_minor_bound"]
    assert minor.holds and minor.constant == pytest.approx(1.0)


def test_vertex_deletion_constant_for_k6():
    verdicts = by_lemma(verify_minor_and_deletion(complete_graph(6), sigma=1.0, r=1, seed=2))
    deletion = verdicts["vertex_deletion_det"]
    assert deletion.holds
    assert deletion.constant == pytest.approx(6**5 / 5**5)


def test_hamiltonian_path_removal_from_k6():
    g = complete_graph(6)
    path = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]
    verdicts = by_lemma(verify_minor_and_deletion(g, sigma=1.0, tree=path))
    weyl = verdicts["tree_removal_weyl"]
    assert weyl.holds
    assert weyl.lhs == pytest.approx(6 - (2 + math.sqrt(3)))
    assert weyl.slack == pytest.approx(0.0, abs=1e-9)
    # max degree 2 exceeds sigma n / 4 = 1.5
    assert verdicts["tree_removal_connectivity"].status == STATUS_SKIPPED
    assert verdicts["tree_removal_det"].holds
    assert verdicts["tree_trace_bound"].holds


def test_tree_removal_connectivity_on_dense_graph():
    g = complete_graph(12)
    verdicts = by_lemma(verify_minor_and_deletion(g, sigma=1.0, seed=5))
    connectivity = verdicts["tree_removal_connectivity"]
    if connectivity.params["tree_max_degree"] <= 3:
        assert connectivity.status == STATUS_OK and connectivity.holds
    else:
        assert connectivity.status == STATUS_SKIPPED


def test_minor_and_deletion_all_hold_on_random_graph():
    g = gen_even_graph(10, 0.8, seed=4)
    verdicts = verify_minor_and_deletion(g, seed=4)
    assert {v.lemma for v in verdicts} == {
        "principal_minor_bound",
        "vertex_deletion_det",
        "tree_removal_weyl",
        "tree_removal_connectivity",
        "tree_removal_det",
        "tree_trace_bound",
        "det_lower_bound",
    }
    assert all(v.holds for v in verdicts if v.status == STATUS_OK)


def test_minor_and_deletion_rejects_bad_r(k5):
    with pytest.raises(PreconditionError):
        verify_minor_and_deletion(k5, r=5)


def test_determinants_beyond_double_range():
    # det Qhat(K160) = 160^160 overflows a double
    n = 160
    verdicts = by_lemma(verify_minor_and_deletion(complete_graph(n), sigma=1.0))
    minor = verdicts["principal_minor_bound"]
    assert minor.holds
    assert minor.lhs == math.inf and minor.rhs == math.inf
    assert minor.constant == pytest.approx(1.0)
    assert minor.to_dict()["lhs"] is None
    deletion = verdicts["vertex_deletion_det"]
    assert deletion.holds
    assert deletion.constant == pytest.approx((n / (n - 1)) ** (n - 1), rel=1e-9)
    for lemma in TREE_LEMMAS:
        assert verdicts[lemma].status == STATUS_SKIPPED


def test_tree_removal_beyond_double_range():
    n = 150
    path = [(v, v + 1) for v in range(n - 1)]
    verdicts = by_lemma(verify_minor_and_deletion(complete_graph(n), sigma=1.0, tree=path))
    removal = verdicts["tree_removal_det"]
    assert removal.status == STATUS_OK and removal.holds
    assert removal.lhs == math.inf
    assert 0.0 < removal.constant < 1.0
    assert verdicts["tree_removal_weyl"].holds


def test_tree_degree_tail_counts(k4, k5):
    assert verify_tree_degree_tail(k4, 2).lhs == 4
    assert verify_tree_degree_tail(k5, 0).lhs == 125
    top = verify_tree_degree_tail(k5, 4)
    assert top.lhs == 0 and top.holds and top.constant == 0.0


def test_sampled_trees_are_spanning(bowtie_graph):
    rng = np.random.default_rng(0)
    for _ in range(20):
        tree = random_spanning_tree(bowtie_graph, rng)
        assert is_spanning_tree(bowtie_graph, tree)


def test_sampled_trees_are_uniform(k4):
    rng = np.random.default_rng(12)
    counts = Counter(random_spanning_tree(k4, rng) for _ in range(1600))
    assert set(counts) == set(spanning_trees(k4))
    # 100 expected per tree, standard deviation about 10
    assert all(55 <= c <= 145 for c in counts.values())


def test_sampled_trees_follow_the_seed(bowtie_graph):
    first = [random_spanning_tree(bowtie_graph, np.random.default_rng(5)) for _ in range(3)]
    second = [random_spanning_tree(bowtie_graph, np.random.default_rng(5)) for _ in range(3)]
    assert first == second


def test_tree_sampling_guard():
    with pytest.raises(SizeGuardError):
        random_spanning_tree(complete_graph(MAX_SAMPLED_TREE_ORDER + 1), np.random.default_rng(0))


def test_tree_max_degree():
    assert tree_max_degree(4, [(0, 1), (0, 2), (0, 3)]) == 3
    assert tree_max_degree(4, [(0, 1), (1, 2), (2, 3)]) == 2


def test_required_neighbours():
    assert required_neighbours(0.001, 10) == 1
    assert required_neighbours(0.25, 8) == 2
    assert required_neighbours(0.25, 9) == 3


def test_level_function_on_complete_graph():
    g = complete_graph(8)
    levels = build_level_function(g, range(4), sigma=1.0, a=0.5)
    assert levels.H == 1
    assert levels.h == (0, 0, 0, 0, 1, 1, 1, 1)
    assert levels.check(g)


def test_level_function_with_full_seed_set(k5):
    levels = build_level_function(k5, range(5), sigma=1.0, a=0.5)
    assert levels.H == 0
    assert levels.alpha == pytest.approx(0.25)
    assert levels.check(k5)


def test_level_function_requires_hypothesis(c6):
    with pytest.raises(HypothesisError):
        build_level_function(c6, range(3), sigma=0.5, a=0.5)


def test_level_function_rejects_small_seed_set(k5):
    with pytest.raises(PreconditionError):
        build_level_function(k5, [0], sigma=1.0, a=0.5)


@pytest.mark.parametrize("seed", range(4))
def test_level_function_verdict_on_random_graphs(seed):
    g = gen_even_graph(16, 0.8, seed)
    verdict = verify_level_function(g)
    assert verdict.status == STATUS_OK
    assert verdict.holds


def test_level_function_verdict_out_of_hypothesis(c6):
    assert verify_level_function(c6, sigma=0.5).status == STATUS_OUT


def test_log_det_expansion_trials():
    verdicts = verify_log_det_expansion(trials=200, seed=7)
    assert len(verdicts) == 200
    assert all(v.holds for v in verdicts)


def test_corpus_is_deterministic():
    first = build_corpus(count=6, orders=(6, 9))
    second = build_corpus(count=6, orders=(6, 9))
    assert [e.graph_id for e in first] == [e.graph_id for e in second]
    assert [e.graph for e in first] == [e.graph for e in second]
    assert all(6 <= e.graph.n <= 9 for e in first)
    assert first[0].graph_id.startswith("seed1-n")


def test_suite_small_corpus_has_no_violations():
    corpus = build_corpus(count=4, orders=(9, 12))
    verdicts = run_suite(corpus, log_det_trials=20, threads=2)
    assert verdicts == run_suite(corpus, log_det_trials=20, threads=1)
    summary = summarize(verdicts)
    assert list(summary.columns) == SUMMARY_COLUMNS
    assert summary["violations"].sum() == 0
    assert summary["errors"].sum() == 0
    assert "log_det_expansion" in set(summary["lemma"])


def test_summarize_counts_statuses():
    verdicts = [
        LemmaVerdict("a", "g1", 1.0, 2.0, True, 1.0, constant=0.5),
        LemmaVerdict("a", "g2", 3.0, 2.0, False, -1.0, constant=2.0),
        LemmaVerdict("a", "g3", None, None, True, None, status=STATUS_OUT),
        LemmaVerdict("b", "g1", None, None, False, None, status="SIZE_GUARD"),
    ]
    summary = summarize(verdicts).set_index("lemma")
    assert summary.loc["a", "verdicts"] == 3
    assert summary.loc["a", "passed"] == 1
    assert summary.loc["a", "violations"] == 1
    assert summary.loc["a", "out_of_hypothesis"] == 1
    assert summary.loc["a", "max_constant"] == 2.0
    assert summary.loc["b", "errors"] == 1
    assert pd.isna(summary.loc["b", "max_constant"])


def test_summarize_empty():
    assert list(summarize([]).columns) == SUMMARY_COLUMNS


@pytest.mark.slow
def test_full_corpus_has_no_violations():
    corpus = build_corpus()
    assert len(corpus) == 100
    verdicts = run_suite(corpus, threads=4)
    summary = summarize(verdicts)
    assert summary["violations"].sum() == 0
    assert summary["errors"].sum() == 0

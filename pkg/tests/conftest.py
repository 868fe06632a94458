import os

import hypothesis
import pytest

from components.graph_core import bowtie, complete_graph, cycle_graph, serialize_graph, star_graph

hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=500, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def k3():
    return complete_graph(3)


@pytest.fixture
def k4():
    return complete_graph(4)


@pytest.fixture
def k5():
    return complete_graph(5)


@pytest.fixture
def c6():
    return cycle_graph(6)


@pytest.fixture
def star5():
    return star_graph(5)


@pytest.fixture
def bowtie_graph():
    return bowtie()


@pytest.fixture
def graph_file(tmp_path):
    """Write a graph as an edge-list file and return its path."""

    def write(g, name="graph.txt"):
        path = tmp_path / name
        path.write_text(serialize_graph(g))
        return str(path)

    return write

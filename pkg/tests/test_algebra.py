import numpy as np
import pytest

from crosstalk.algebra import (
    product,
    projected_distribution,
    projective_composition,
    stream_run,
    synchronous_composition,
)
from crosstalk.automata import Alphabet, LabeledGraph, Pfsa, SymbolStream, sample_stream, stationary_distribution
from crosstalk.errors import InputError

from fixtures import BIN, causal_states_machine, random_generator


def test_self_composition_is_identity():
    g = causal_states_machine()
    gg = projective_composition(g, g)
    np.testing.assert_array_equal(gg.delta, g.delta)
    np.testing.assert_allclose(gg.morph, g.morph, atol=1e-12)
    sg = synchronous_composition(g, g)
    np.testing.assert_array_equal(sg.delta, g.delta)


def test_projection_onto_single_state_averages_rows():
    g = causal_states_machine()
    p = projective_composition(g, LabeledGraph.complete(BIN))
    # stationary [0.625, 0.375] weights the rows
    np.testing.assert_allclose(p.morph, [[0.625, 0.375]], atol=1e-9)
    np.testing.assert_array_equal(projected_distribution(g, LabeledGraph.complete(BIN)), [1.0])


def test_projected_distribution_on_own_graph_is_stationary():
    g = causal_states_machine()
    np.testing.assert_allclose(projected_distribution(g, g.graph), stationary_distribution(g), atol=1e-9)


def test_product_state_pairs():
    g = causal_states_machine()
    h = LabeledGraph(BIN, [[1, 0], [1, 0]])   # remembers the last symbol, relabelled
    prod, pairs = product(g, h)
    assert sorted(pairs) == [(0, 1), (1, 0)]
    assert prod.n_states == 2


def test_alphabet_mismatch():
    g = causal_states_machine()
    with pytest.raises(InputError):
        product(g, LabeledGraph.complete(Alphabet.of_size(3)))


def test_pruning_of_unreached_states():
    # the iid machine never emits 1, so state 1 of H is never visited
    g = Pfsa(BIN, [[0, 0]], [[1.0, 0.0]])
    h = LabeledGraph(BIN, [[0, 1], [0, 1]])
    p = projective_composition(g, h)
    assert p.n_states == 1
    np.testing.assert_allclose(p.morph, [[1.0, 0.0]])


def test_stream_run_counts_start_state():
    g = LabeledGraph(BIN, [[0, 1], [0, 1]])
    np.testing.assert_allclose(stream_run(g, SymbolStream.from_string("111")), [0.25, 0.75])
    np.testing.assert_allclose(stream_run(g, SymbolStream.from_string("111"), start=1), [0.0, 1.0])


@pytest.mark.parametrize("seed", range(20))
def test_identities_on_random_machines(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 4))
    g = random_generator(int(rng.integers(1, 5)), k, rng, lo=0.0)
    h = random_generator(int(rng.integers(1, 5)), k, rng, lo=0.0).graph
    gg = projective_composition(g, g)
    np.testing.assert_allclose(gg.morph, g.morph, atol=1e-9)
    gh = projective_composition(g, h)
    ghh = projective_composition(gh, h)
    np.testing.assert_allclose(ghh.morph, gh.morph, atol=1e-9)
    np.testing.assert_allclose(projected_distribution(g, h), projected_distribution(gh, h), atol=1e-9)
    # the projection is a valid machine on H's graph
    np.testing.assert_allclose(gh.morph.sum(axis=1), 1.0, atol=1e-12)


def test_projected_distribution_matches_long_run():
    rng = np.random.default_rng(42)
    g = random_generator(3, 2, rng)
    h = random_generator(2, 2, rng).graph
    run = stream_run(h, sample_stream(g, 400_000, 3))
    np.testing.assert_allclose(run, projected_distribution(g, h), atol=0.005)

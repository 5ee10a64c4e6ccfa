"""Shared ground-truth machines and streams for the test suite."""
from __future__ import annotations

import functools

import numpy as np

from crosstalk.automata import (
    Alphabet,
    Pfsa,
    driven_pair_spec,
    sample_stream,
    simulate_coupled,
    validate_pfsa,
)

BIN = Alphabet.binary()


def causal_states_machine() -> Pfsa:
    """Two states remembering the last symbol."""
    return Pfsa(BIN, [[0, 1], [0, 1]], [[0.85, 0.15], [0.25, 0.75]])


def even_process() -> Pfsa:
    return Pfsa(BIN, [[0, 1], [0, 0]], [[0.5, 0.5], [0.0, 1.0]])


def random_generator(n_states: int, k: int, rng: np.random.Generator, lo: float = 0.2) -> Pfsa:
    """Strongly connected machine with every morph entry at least ``lo / k``-ish.

    Rows are Dirichlet draws mixed toward uniform so no symbol is rare; the
    transition table has a cycle through all states so the graph is strongly
    connected.
    """
    alphabet = Alphabet.of_size(k)
    while True:
        delta = rng.integers(0, n_states, size=(n_states, k))
        delta[np.arange(n_states), 0] = (np.arange(n_states) + 1) % n_states
        rows = rng.dirichlet(np.ones(k), size=n_states)
        rows = lo + (1 - lo * k) * rows
        p = Pfsa(alphabet, delta, rows)
        if not validate_pfsa(p):
            return p


@functools.lru_cache(maxsize=None)
def driven_pair_streams(length: int = 10**6, seed: int = 54):
    return simulate_coupled(driven_pair_spec(), length, seed)


@functools.lru_cache(maxsize=None)
def causal_states_stream(length: int = 10**6, seed: int = 1):
    return sample_stream(causal_states_machine(), length, seed)


def independent_pair(index: int, length: int = 10**6):
    """Two independently sampled binary generators with 1 to 3 states each."""
    rng = np.random.default_rng(1000 + index)
    g = random_generator(1 + index % 3, 2, rng)
    h = random_generator(1 + (index // 3) % 3, 2, rng)
    return g, h, sample_stream(g, length, 2 * index + 1), sample_stream(h, length, 2 * index + 2)

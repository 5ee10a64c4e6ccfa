"""Synchronous/projective composition, projected distributions and stream runs."""
from __future__ import annotations

import logging

import numpy as np

from . import graphs
from .automata import LabeledGraph, Pfsa, SymbolStream, Xpfsa, stationary_distribution
from .errors import InputError

log = logging.getLogger(__name__)

# stationary mass at or below this is power-iteration residue, not a visit
PRUNE_WEIGHT = 1e-9


def _graph_of(h) -> LabeledGraph:
    if isinstance(h, LabeledGraph):
        return h
    if isinstance(h, (Pfsa, Xpfsa)):
        return h.graph
    raise InputError(f"expected a graph or machine, got {type(h).__name__}")


def _check_alphabets(g: Pfsa, h: LabeledGraph):
    if g.alphabet != h.alphabet:
        raise InputError("composition operands use different alphabets")


def product(g: Pfsa, h) -> tuple[Pfsa, list[tuple[int, int]]]:
    """G (x) H restricted to one closed strong component, with its state pairs.

    The full product on Q x Q' can hold several closed components; the
    smallest is kept (ties: the one containing the smallest (q, q') pair).
    For H = graph(G) that is the diagonal, so G (x) G reproduces G exactly.
    """
    h = _graph_of(h)
    _check_alphabets(g, h)
    n, m, k = g.n_states, h.n_states, g.alphabet.size
    idx = lambda q, r: q * m + r  # noqa: E731
    delta = np.empty((n * m, k), dtype=np.int64)
    for q in range(n):
        for r in range(m):
            delta[idx(q, r)] = [idx(g.delta[q, a], h.delta[r, a]) for a in range(k)]
    comps = [c for c in graphs.table_components(delta) if graphs.is_closed(c, delta)]
    comps.sort(key=lambda c: (len(c), c[0]))
    keep = comps[0]
    pairs = [divmod(v, m) for v in keep]
    sub = graphs.restrict(delta, keep)
    morph = np.array([g.morph[q] for q, _ in pairs])
    return Pfsa(g.alphabet, sub, morph), pairs


def synchronous_composition(g: Pfsa, h) -> Pfsa:
    """G's probabilities carried on the joint transition structure of G and H."""
    return product(g, h)[0]


def _marginal(g: Pfsa, h: LabeledGraph) -> tuple[np.ndarray, Pfsa, list]:
    prod, pairs = product(g, h)
    stat = stationary_distribution(prod)
    weights = np.zeros(h.n_states)
    for w, (_, r) in zip(stat, pairs):
        weights[r] += w
    return weights, prod, pairs


def projected_distribution(g: Pfsa, h) -> np.ndarray:
    """Stationary mass of G landing on each state of H."""
    h = _graph_of(h)
    weights, _, _ = _marginal(g, h)
    return weights / weights.sum()


def projective_composition(g: Pfsa, h) -> Pfsa:
    """G re-expressed on H's graph by stationary-weighted row averaging.

    States of H that receive no stationary mass are pruned; edges into them
    are redirected to the surviving state with the nearest row.
    """
    h = _graph_of(h)
    weights, prod, pairs = _marginal(g, h)
    stat = stationary_distribution(prod)
    k = g.alphabet.size
    rows = np.zeros((h.n_states, k))
    for w, (q, r), row in zip(stat, pairs, prod.morph):
        rows[r] += w * row
    alive = [r for r in range(h.n_states) if weights[r] > PRUNE_WEIGHT]
    for r in alive:
        rows[r] /= weights[r]
    if len(alive) == h.n_states:
        return Pfsa(g.alphabet, h.delta, rows)
    log.warning("pruned %d state(s) of H with zero stationary weight", h.n_states - len(alive))
    # dead rows are near zero; the nearest surviving row takes their edges
    delta = graphs.restrict(np.asarray(h.delta), alive, rows)
    return Pfsa(g.alphabet, delta, rows[alive])


def stream_run(g, s: SymbolStream, start: int = 0) -> np.ndarray:
    """Normalized visit counts of ``s`` replayed through ``g`` from ``start``.

    The start state counts as one visit.
    """
    g = _graph_of(g)
    if g.alphabet != s.alphabet:
        raise InputError("stream and graph use different alphabets")
    states = graphs.walk(g.delta, s.data, start)
    counts = np.bincount(states, minlength=g.n_states).astype(float)
    return counts / counts.sum()

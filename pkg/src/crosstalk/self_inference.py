"""Self-model inference: a PFSA from one symbol stream.

Three stages: find a synchronizing string on the derivative heap, grow the
transition structure from its right extensions by matching derivatives
within epsilon, then estimate arc probabilities by replaying the stream.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import graphs
from .automata import Alphabet, LabeledGraph, Pfsa, SymbolStream, as_indices
from .errors import InputError, InsufficientDataError, ModelExplosionError
from .estimators import build_heap, default_depth, hull_vertex_string, successor_counts

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InferenceConfig:
    epsilon: float = 0.05
    depth: int = 0  # 0 picks ceil(log_|alphabet| 1/epsilon)
    n_min: int = 50
    max_states: int = 64
    min_length: int = 100

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise InputError("epsilon must lie in (0, 1]")
        if self.depth < 0:
            raise InputError("depth must be >= 0 (0 = automatic)")
        if self.n_min < 1 or self.max_states < 1 or self.min_length < 0:
            raise InputError("n_min and max_states must be >= 1")

    @property
    def sync_tolerance(self) -> float:
        """How far the chosen synchronizing string may sit from the hull vertex."""
        return self.epsilon

    def heap_depth(self, alphabet_size: int) -> int:
        return self.depth or default_depth(alphabet_size, self.epsilon)


@dataclass(frozen=True, eq=False)
class Structure:
    """Inferred transition structure with per-state reference rows.

    ``h[q]`` is the derivative measured at ``identifiers[q]`` (support
    ``support[q]``); ``sync`` marks the state grown from the synchronizing
    string, or -1 once that state has been dropped.
    """

    graph: LabeledGraph
    h: np.ndarray
    identifiers: list
    support: list
    sync: int = 0
    warnings: list = field(default_factory=list)

    @property
    def n_states(self) -> int:
        return self.graph.n_states

    @property
    def delta(self) -> np.ndarray:
        return self.graph.delta


Derivative = Callable[[tuple], "tuple[np.ndarray | None, int]"]


def _sup(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)))


def grow_structure(derivative: Derivative, alphabet: Alphabet, x0: tuple,
                   cfg: InferenceConfig) -> Structure:
    """Recursive right-extension of ``x0`` shared by self and cross inference.

    ``derivative(x)`` returns (distribution or None, support).  Extensions
    with zero support self-loop; extensions below ``n_min`` join the nearest
    existing state; otherwise the nearest state within epsilon is reused or a
    new state is created.
    """
    d0, c0 = derivative(x0)
    if d0 is None or c0 < cfg.n_min:
        raise InsufficientDataError(
            f"synchronizing string has support {c0}, below n_min={cfg.n_min}"
        )
    h = [d0]
    ids = [tuple(x0)]
    support = [c0]
    rows: list[list[int]] = []
    warnings: list[str] = []
    q = 0
    while q < len(ids):
        row = []
        for a in range(alphabet.size):
            x = ids[q] + (a,)
            d, c = derivative(x)
            if c == 0:
                msg = f"state {q}: extension by {alphabet.symbols[a]!r} never observed; self-loop"
                log.warning(msg)
                warnings.append(msg)
                row.append(q)
                continue
            gaps = [_sup(d, hq) for hq in h]
            best = int(np.argmin(gaps))
            if c < cfg.n_min:
                log.debug("state %d symbol %d: thin support %d, nearest state %d", q, a, c, best)
                row.append(best)
            elif gaps[best] <= cfg.epsilon:
                assert _sup(d, h[best]) <= cfg.epsilon
                row.append(best)
            else:
                if len(ids) >= cfg.max_states:
                    raise ModelExplosionError(
                        f"more than max_states={cfg.max_states} states; raise epsilon or max_states"
                    )
                h.append(d)
                ids.append(x)
                support.append(c)
                row.append(len(ids) - 1)
        rows.append(row)
        q += 1
    return Structure(LabeledGraph(alphabet, np.array(rows, dtype=np.int64)),
                     np.array(h), ids, support, 0, warnings)


def self_derivative(s: SymbolStream) -> Derivative:
    def derivative(x):
        counts = successor_counts(s, x)
        total = int(counts.sum())
        return (counts / total if total else None), total
    return derivative


def derive_structure(s: SymbolStream, x0, cfg: InferenceConfig = InferenceConfig()) -> Structure:
    return grow_structure(self_derivative(s), s.alphabet, as_indices(x0, s.alphabet), cfg)


def extract_strong_component(g: Structure) -> Structure:
    """Keep the largest strongly connected component that has an internal edge.

    Ties prefer the component holding the synchronizing state, then the one
    with the smallest state index.  Transitions leaving the component go to
    the member whose reference row is nearest in sup norm.
    """
    delta = np.asarray(g.delta)
    comps = [c for c in graphs.table_components(delta) if graphs.is_nontrivial(c, delta)]
    if not comps:
        # every state must have an outgoing edge, so some component is nontrivial
        raise InputError("graph has no strongly connected component with an edge")
    comps.sort(key=lambda c: (-len(c), 0 if g.sync in c else 1, c[0]))
    keep = comps[0]
    if len(keep) == g.n_states:
        return g
    new_delta = graphs.restrict(delta, keep, g.h)
    warnings = list(g.warnings)
    dropped = g.n_states - len(keep)
    warnings.append(f"dropped {dropped} transient state(s) outside the strong component")
    return Structure(
        LabeledGraph(g.graph.alphabet, new_delta),
        g.h[keep],
        [g.identifiers[q] for q in keep],
        [g.support[q] for q in keep],
        keep.index(g.sync) if g.sync in keep else -1,
        warnings,
    )


def estimate_arc_probabilities(g: Structure | LabeledGraph, s: SymbolStream, start: int = 0) -> Pfsa:
    """Row-normalized arc traversal counts from replaying ``s`` through ``g``.

    States never left during the replay fall back to their reference row
    ``h`` (or uniform for a bare graph).
    """
    graph = g.graph if isinstance(g, Structure) else g
    if graph.alphabet != s.alphabet:
        raise InputError("stream and graph use different alphabets")
    n, k = graph.delta.shape
    states = graphs.walk(graph.delta, s.data, start)
    counts = np.bincount(states[:-1] * k + s.data, minlength=n * k).reshape(n, k).astype(float)
    totals = counts.sum(axis=1)
    morph = np.empty((n, k))
    for q in range(n):
        if totals[q] > 0:
            morph[q] = counts[q] / totals[q]
        else:
            fallback = g.h[q] if isinstance(g, Structure) else np.full(k, 1.0 / k)
            log.warning("state %d never visited during replay; using its reference row", q)
            morph[q] = fallback
    return Pfsa(graph.alphabet, graph.delta, morph)


@dataclass(frozen=True, eq=False)
class SelfInferenceResult:
    machine: Pfsa
    sync_string: tuple
    structure: Structure


def infer_pfsa_detailed(s: SymbolStream, cfg: InferenceConfig = InferenceConfig()) -> SelfInferenceResult:
    if len(s) < max(cfg.min_length, 2):
        raise InsufficientDataError(f"stream has {len(s)} symbols; need at least {cfg.min_length}")
    heap = build_heap(s, cfg.heap_depth(s.alphabet.size), cfg.n_min)
    x0 = hull_vertex_string(heap, cfg.sync_tolerance)
    structure = extract_strong_component(derive_structure(s, x0, cfg))
    return SelfInferenceResult(estimate_arc_probabilities(structure, s), x0, structure)


def infer_pfsa(s: SymbolStream, cfg: InferenceConfig = InferenceConfig()) -> Pfsa:
    return infer_pfsa_detailed(s, cfg).machine

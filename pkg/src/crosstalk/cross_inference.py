"""Cross-model inference: an XPFSA from an aligned pair of streams."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .automata import SymbolStream, Xpfsa, as_indices
from .errors import AlignmentError, InsufficientDataError
from .estimators import build_cross_heap, cross_successor_counts, hull_vertex_string
from .self_inference import InferenceConfig, Structure, extract_strong_component, grow_structure


@dataclass(frozen=True, eq=False)
class CrossInferenceResult:
    machine: Xpfsa
    sync_string: tuple
    support: list
    structure: Structure
    warnings: list = field(default_factory=list)

    @property
    def n_states(self) -> int:
        return self.machine.n_states


def cross_derivative_fn(sA: SymbolStream, sB: SymbolStream):
    def derivative(x):
        counts = cross_successor_counts(sA, sB, x)
        total = int(counts.sum())
        return (counts / total if total else None), total
    return derivative


def derive_cross_structure(sA: SymbolStream, sB: SymbolStream, x0,
                           cfg: InferenceConfig = InferenceConfig()) -> Structure:
    return grow_structure(cross_derivative_fn(sA, sB), sA.alphabet,
                          as_indices(x0, sA.alphabet), cfg)


def infer_xpfsa(sA: SymbolStream, sB: SymbolStream,
                cfg: InferenceConfig = InferenceConfig()) -> CrossInferenceResult:
    """Infer how the past of ``sA`` shapes the next symbol of ``sB``.

    Output rows are the reference derivatives of the inferred states.
    """
    if len(sA) != len(sB):
        raise AlignmentError(f"streams are not aligned: {len(sA)} vs {len(sB)} symbols")
    if len(sA) < max(cfg.min_length, 2):
        raise InsufficientDataError(f"streams have {len(sA)} symbols; need at least {cfg.min_length}")
    heap = build_cross_heap(sA, sB, cfg.heap_depth(sA.alphabet.size), cfg.n_min)
    x0 = hull_vertex_string(heap, cfg.sync_tolerance)
    structure = extract_strong_component(derive_cross_structure(sA, sB, x0, cfg))
    derivative = cross_derivative_fn(sA, sB)
    for q, x in enumerate(structure.identifiers):
        d, _ = derivative(x)
        assert np.array_equal(d, structure.h[q])
    machine = Xpfsa(sA.alphabet, sB.alphabet, structure.delta, structure.h)
    return CrossInferenceResult(machine, x0, list(structure.support), structure,
                                list(structure.warnings))

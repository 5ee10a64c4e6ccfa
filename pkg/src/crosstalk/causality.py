"""Coefficient of causal dependence, causality networks and cross-talk prediction."""
from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .algebra import projective_composition, stream_run
from .automata import (
    Pfsa,
    SymbolStream,
    Xpfsa,
    check_distribution,
    entropy,
    propagate_distribution,
    stationary_distribution,
    symbol_frequencies,
)
from .errors import CrosstalkError, DegenerateProcessError, InputError
from .self_inference import InferenceConfig
from .cross_inference import CrossInferenceResult, infer_xpfsa

log = logging.getLogger(__name__)

CLAMP_WARN = 1e-6


def raw_gamma(base_symbol_dist, xpfsa: Xpfsa, occupancy) -> float:
    """1 - <occupancy, H(output rows)> / H(base), without clamping."""
    base = check_distribution(base_symbol_dist, "base distribution")
    occ = check_distribution(occupancy, "occupancy")
    if occ.size != xpfsa.n_states:
        raise InputError("occupancy length does not match the cross model")
    if base.size != xpfsa.output_alphabet.size:
        raise InputError("base distribution is not over the cross model's output alphabet")
    h0 = entropy(base)
    if h0 <= 0.0:
        raise DegenerateProcessError("target process emits a single symbol; coefficient undefined")
    h1 = float(sum(w * entropy(row) for w, row in zip(occ, xpfsa.out_morph)))
    return 1.0 - h1 / h0


def gamma_analytic(base_symbol_dist, xpfsa: Xpfsa, occupancy) -> float:
    raw = raw_gamma(base_symbol_dist, xpfsa, occupancy)
    clamped = min(1.0, max(0.0, raw))
    if abs(clamped - raw) > CLAMP_WARN:
        log.warning("coefficient %.6g clamped to [0, 1]", raw)
    return clamped


def error_bound(epsilon: float, target_alphabet_size: int, target_entropy: float) -> float:
    """Asymptotic bound on |estimated - true| coefficient for tolerance epsilon."""
    if not 0 < epsilon <= 0.5:
        raise InputError("bound holds for epsilon in (0, 1/2]")
    if target_entropy <= 0:
        raise DegenerateProcessError("bound needs a target with positive entropy")
    k = target_alphabet_size
    spread = epsilon * math.log2((k - 1) / epsilon) if k > 1 else 0.0
    return (spread + (1 - epsilon) * math.log2(1 / (1 - epsilon))) / target_entropy


@dataclass(frozen=True, eq=False)
class GammaResult:
    gamma: float
    raw: float
    cross: CrossInferenceResult
    occupancy: np.ndarray
    base: np.ndarray

    @property
    def n_states(self) -> int:
        return self.cross.n_states


def gamma_empirical(sA: SymbolStream, sB: SymbolStream,
                    cfg: InferenceConfig = InferenceConfig()) -> GammaResult:
    """Coefficient of dependence of sB on sA, estimated from the streams."""
    base = symbol_frequencies(sB)
    if entropy(base) <= 0.0:
        raise DegenerateProcessError("target stream repeats a single symbol")
    cross = infer_xpfsa(sA, sB, cfg)
    occupancy = stream_run(cross.machine.graph, sA)
    raw = raw_gamma(base, cross.machine, occupancy)
    return GammaResult(gamma_analytic(base, cross.machine, occupancy), raw, cross, occupancy, base)


@dataclass(frozen=True)
class Arc:
    source: str
    target: str
    gamma: float
    n_states: int
    raw: float = float("nan")
    machine: Xpfsa | None = None


@dataclass(frozen=True, eq=False)
class CausalityNetwork:
    nodes: list
    arcs: dict = field(default_factory=dict)      # (source, target) -> Arc
    skipped: dict = field(default_factory=dict)   # (source, target) -> reason
    self_models: dict = field(default_factory=dict)

    def weight(self, source: str, target: str) -> float | None:
        arc = self.arcs.get((source, target))
        return None if arc is None else arc.gamma


def _pair_task(args):
    src, dst, sA, sB, cfg = args
    try:
        r = gamma_empirical(sA, sB, cfg)
    except CrosstalkError as exc:
        return src, dst, None, f"{type(exc).__name__}: {exc}"
    return src, dst, Arc(src, dst, r.gamma, r.n_states, r.raw, r.cross.machine), None


def causality_network(streams: Mapping[str, SymbolStream], cfg: InferenceConfig = InferenceConfig(),
                      n_jobs: int = 1) -> CausalityNetwork:
    """Coefficients for every ordered pair of distinct streams.

    Pairs that fail (too little data, degenerate target, ...) are reported in
    ``skipped`` rather than aborting the whole network.
    """
    names = list(streams)
    if len(names) < 2:
        raise InputError("a network needs at least two streams")
    lengths = {len(s) for s in streams.values()}
    if len(lengths) != 1:
        raise InputError("all streams must have the same length")
    tasks = [(a, b, streams[a], streams[b], cfg) for a, b in itertools.permutations(names, 2)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_pair_task, tasks))
    else:
        results = [_pair_task(t) for t in tasks]
    arcs, skipped = {}, {}
    for src, dst, arc, reason in results:
        if arc is None:
            skipped[(src, dst)] = reason
        else:
            arcs[(src, dst)] = arc
    return CausalityNetwork(names, arcs, skipped)


def predict_next(self_model: Pfsa, cross_model: Xpfsa, history) -> np.ndarray:
    """Next-symbol distribution of the target given a short source history."""
    if self_model.alphabet != cross_model.input_alphabet:
        raise InputError("self model and cross model inputs use different alphabets")
    g = projective_composition(self_model, cross_model.graph)
    if g.n_states != cross_model.n_states:
        raise InputError("cross model has states the source process never reaches")
    state = propagate_distribution(g, stationary_distribution(g), history)
    tau = state @ cross_model.out_morph
    return tau / tau.sum()


def fuse_predictions(taus: Sequence, gammas: Sequence[float], fallback=None) -> np.ndarray:
    """Average of predictions weighted by normalized coefficients.

    With every coefficient zero the ``fallback`` prediction (typically the
    target's own self-model forecast) is returned, else the uniform one.
    """
    if len(taus) != len(gammas):
        raise InputError("need one coefficient per prediction")
    if not taus:
        raise InputError("nothing to fuse")
    taus = np.array([check_distribution(t, "prediction") for t in taus])
    g = np.asarray(gammas, dtype=float)
    if np.any(g < 0):
        raise InputError("coefficients must be non-negative")
    if g.sum() <= 0:
        if fallback is not None:
            return check_distribution(fallback, "fallback").copy()
        return np.full(taus.shape[1], 1.0 / taus.shape[1])
    if np.all(taus == taus[0]):
        return taus[0].copy()
    return (g / g.sum()) @ taus

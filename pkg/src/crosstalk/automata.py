"""Alphabets, symbol streams, PFSA/XPFSA machines and their linear algebra."""
from __future__ import annotations

import bisect
import itertools
import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import graphs
from .errors import (
    ConvergenceError,
    InputError,
    ZeroProbabilityHistoryError,
)

log = logging.getLogger(__name__)

DIST_ATOL = 1e-9
STATIONARY_TOL = 1e-10
STATIONARY_MAX_ITER = 1_000_000


def _frozen(array, dtype) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        if not symbols:
            raise InputError("alphabet must contain at least one symbol")
        if len(set(symbols)) != len(symbols):
            raise InputError(f"alphabet labels must be distinct: {symbols}")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    @classmethod
    def binary(cls) -> "Alphabet":
        return cls(("0", "1"))

    @classmethod
    def of_size(cls, k: int) -> "Alphabet":
        return cls(tuple(str(i) for i in range(k)))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, label) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise InputError(f"unknown symbol {label!r} for alphabet {self.symbols}") from None

    def encode(self, labels: Iterable) -> np.ndarray:
        return np.array([self.index(s) for s in labels], dtype=np.int64)

    def decode(self, indices: Iterable[int]) -> list[str]:
        return [self.symbols[int(i)] for i in indices]


@dataclass(frozen=True, eq=False)
class SymbolStream:
    """A finite sequence of symbol indices over a declared alphabet."""

    alphabet: Alphabet
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.int64).reshape(-1)
        if data.size and (data.min() < 0 or data.max() >= self.alphabet.size):
            raise InputError("stream contains indices outside the alphabet")
        object.__setattr__(self, "data", _frozen(data, np.int64))

    @classmethod
    def from_labels(cls, labels: Iterable, alphabet: Alphabet | None = None) -> "SymbolStream":
        labels = [str(s) for s in labels]
        if alphabet is None:
            alphabet = Alphabet(tuple(sorted(set(labels))) or ("0",))
        return cls(alphabet, alphabet.encode(labels))

    @classmethod
    def from_string(cls, text: str, alphabet: Alphabet | None = None) -> "SymbolStream":
        """Build from a string of single-character labels, e.g. ``"0110"``."""
        return cls.from_labels(list(text), alphabet or Alphabet.binary())

    def __len__(self) -> int:
        return int(self.data.size)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SymbolStream)
            and self.alphabet == other.alphabet
            and np.array_equal(self.data, other.data)
        )

    def labels(self) -> list[str]:
        return self.alphabet.decode(self.data)

    def __str__(self) -> str:
        sep = "" if all(len(s) == 1 for s in self.alphabet.symbols) else ","
        return sep.join(self.labels())


def as_indices(x, alphabet: Alphabet) -> tuple[int, ...]:
    """Coerce a string/stream/sequence to a tuple of symbol indices."""
    if isinstance(x, SymbolStream):
        if x.alphabet != alphabet:
            raise InputError("stream alphabet does not match")
        return tuple(int(i) for i in x.data)
    if isinstance(x, str):
        return tuple(alphabet.index(c) for c in x)
    out = []
    for v in x:
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            if not 0 <= int(v) < alphabet.size:
                raise InputError(f"symbol index {v} out of range")
            out.append(int(v))
        else:
            out.append(alphabet.index(v))
    return tuple(out)


def check_distribution(weights, name: str = "distribution") -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise InputError(f"{name} must be a non-empty vector")
    if np.any(w < 0) or abs(w.sum() - 1.0) > DIST_ATOL:
        raise InputError(f"{name} is not a probability vector: {w}")
    return w


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    alphabet: Alphabet
    delta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "delta", _check_delta(self.delta, self.alphabet.size))

    @property
    def n_states(self) -> int:
        return int(self.delta.shape[0])

    @classmethod
    def complete(cls, alphabet: Alphabet) -> "LabeledGraph":
        """Single state with a self-loop on every symbol."""
        return cls(alphabet, np.zeros((1, alphabet.size), dtype=np.int64))


def _check_delta(delta, k: int) -> np.ndarray:
    d = np.asarray(delta)
    if d.ndim != 2 or d.shape[1] != k or d.shape[0] == 0:
        raise InputError(f"delta must have shape (n_states, {k}), got {d.shape}")
    if not np.issubdtype(d.dtype, np.integer):
        if not np.all(np.equal(np.mod(d, 1), 0)):
            raise InputError("delta entries must be integers")
    d = d.astype(np.int64)
    if d.min() < 0 or d.max() >= d.shape[0]:
        raise InputError("delta references a state that does not exist")
    return _frozen(d, np.int64)


def _check_rows(rows, n: int, k: int, name: str) -> np.ndarray:
    m = np.asarray(rows, dtype=float)
    if m.shape != (n, k):
        raise InputError(f"{name} must have shape ({n}, {k}), got {m.shape}")
    return _frozen(m, float)


@dataclass(frozen=True, eq=False)
class Pfsa:
    """Probabilistic finite-state automaton: graph plus per-state morph rows."""

    alphabet: Alphabet
    delta: np.ndarray
    morph: np.ndarray

    def __post_init__(self):
        d = _check_delta(self.delta, self.alphabet.size)
        object.__setattr__(self, "delta", d)
        object.__setattr__(self, "morph", _check_rows(self.morph, d.shape[0], self.alphabet.size, "morph"))

    @property
    def n_states(self) -> int:
        return int(self.delta.shape[0])

    @property
    def graph(self) -> LabeledGraph:
        return LabeledGraph(self.alphabet, self.delta)

    @classmethod
    def single_state(cls, row, alphabet: Alphabet | None = None) -> "Pfsa":
        row = np.asarray(row, dtype=float)
        alphabet = alphabet or Alphabet.of_size(row.size)
        return cls(alphabet, np.zeros((1, alphabet.size), dtype=np.int64), row[None, :])


@dataclass(frozen=True, eq=False)
class Xpfsa:
    """Crossed PFSA: transitions over the input alphabet, output rows over another."""

    input_alphabet: Alphabet
    output_alphabet: Alphabet
    delta: np.ndarray
    out_morph: np.ndarray

    def __post_init__(self):
        d = _check_delta(self.delta, self.input_alphabet.size)
        object.__setattr__(self, "delta", d)
        object.__setattr__(
            self,
            "out_morph",
            _check_rows(self.out_morph, d.shape[0], self.output_alphabet.size, "out_morph"),
        )

    @property
    def n_states(self) -> int:
        return int(self.delta.shape[0])

    @property
    def graph(self) -> LabeledGraph:
        return LabeledGraph(self.input_alphabet, self.delta)


def _as_graph(g) -> LabeledGraph:
    return g if isinstance(g, LabeledGraph) else g.graph


def validate_pfsa(p: Pfsa) -> list[str]:
    """Return a list of invariant violations; empty when ``p`` is valid."""
    report = []
    for q, row in enumerate(p.morph):
        if np.any(row < 0) or not np.all(np.isfinite(row)):
            report.append(f"state {q}: morph row has negative or non-finite entries")
        if abs(row.sum() - 1.0) > DIST_ATOL:
            report.append(f"state {q}: morph row sums to {row.sum():.12g}, not 1 (row-stochasticity)")
    if p.delta.shape != (p.n_states, p.alphabet.size):
        report.append("delta is not total over (state, symbol)")
    if not graphs.is_strongly_connected(p.delta):
        report.append("underlying labeled graph is not strongly connected")
    return report


def validate_xpfsa(x: Xpfsa) -> list[str]:
    report = []
    for q, row in enumerate(x.out_morph):
        if np.any(row < 0) or abs(row.sum() - 1.0) > DIST_ATOL:
            report.append(f"state {q}: output row is not a distribution")
    if not graphs.is_strongly_connected(x.delta):
        report.append("underlying labeled graph is not strongly connected")
    return report


def transition_matrix(p: Pfsa) -> np.ndarray:
    n, k = p.delta.shape
    m = np.zeros((n, n))
    for a in range(k):
        np.add.at(m, (np.arange(n), p.delta[:, a]), p.morph[:, a])
    return m


def stationary_distribution(p: Pfsa | np.ndarray, tol: float = STATIONARY_TOL,
                            max_iter: int = STATIONARY_MAX_ITER) -> np.ndarray:
    """Stationary state distribution by lazy power iteration from uniform.

    Accepts a Pfsa or a row-stochastic matrix.  The lazy chain (I + M)/2 shares
    the fixed point of M and is aperiodic, so periodic graphs still converge.
    """
    m = transition_matrix(p) if isinstance(p, Pfsa) else np.asarray(p, dtype=float)
    n = m.shape[0]
    lazy = 0.5 * (m + np.eye(n))
    v = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        if np.max(np.abs(v @ m - v)) <= tol:
            return _polish(m, v)
        v = v @ lazy
        v /= v.sum()
    if np.max(np.abs(v @ m - v)) <= tol:
        return _polish(m, v)
    raise ConvergenceError(f"stationary distribution did not converge in {max_iter} iterations")


def _polish(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Replace an iterate by the exact solution of v M = v, sum v = 1 when unique.

    The iteration stops on a small residual, but the error in ``v`` can be
    that residual divided by the spectral gap.
    """
    n = m.shape[0]
    a = np.vstack([m.T - np.eye(n), np.ones((1, n))])
    if np.linalg.matrix_rank(a) < n:
        return v   # several stationary distributions; keep the iterated one
    b = np.zeros(n + 1)
    b[-1] = 1.0
    exact = np.linalg.lstsq(a, b, rcond=None)[0]
    exact[exact < 0] = 0.0
    exact /= exact.sum()
    if np.max(np.abs(exact @ m - exact)) <= np.max(np.abs(v @ m - v)):
        return exact
    return v


def transformation_matrix(p: Pfsa, sigma) -> np.ndarray:
    """Gamma_sigma: row q holds morph(q, sigma) at column delta(q, sigma)."""
    a = as_indices([sigma], p.alphabet)[0]
    n = p.n_states
    g = np.zeros((n, n))
    g[np.arange(n), p.delta[:, a]] = p.morph[:, a]
    return g


def _step(delta: np.ndarray, morph: np.ndarray, v: np.ndarray, a: int) -> np.ndarray:
    out = np.zeros_like(v)
    np.add.at(out, delta[:, a], v * morph[:, a])
    return out


def propagate_distribution(p: Pfsa, start, x) -> np.ndarray:
    """Normalized left product start * Gamma_x1 * ... * Gamma_xm."""
    v = check_distribution(start, "start distribution").copy()
    if v.size != p.n_states:
        raise InputError("start distribution length does not match the machine")
    for a in as_indices(x, p.alphabet):
        v = _step(p.delta, p.morph, v, a)
        total = v.sum()
        if total <= 0.0:
            raise ZeroProbabilityHistoryError(
                f"history is impossible under the machine (symbol {p.alphabet.symbols[a]!r})"
            )
        v /= total
    return v


def entropy(d) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    p = np.sort(np.asarray(d, dtype=float))
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p))) + 0.0


def symbol_frequencies(s: SymbolStream) -> np.ndarray:
    counts = np.bincount(s.data, minlength=s.alphabet.size).astype(float)
    if counts.sum() == 0:
        raise InputError("empty stream has no symbol frequencies")
    return counts / counts.sum()


def _sample_symbols(cum_rows: list[list[float]], delta: list[list[int]], q: int, u: np.ndarray):
    out = [0] * len(u)
    last = len(cum_rows[0]) - 1
    for i, r in enumerate(u.tolist()):
        a = bisect.bisect_right(cum_rows[q], r)
        if a > last:
            a = last
        out[i] = a
        q = delta[q][a]
    return out


def _cumulative(rows: np.ndarray) -> list[list[float]]:
    cum = np.cumsum(rows, axis=1)
    cum[:, -1] = 1.0
    # a zero-probability symbol occupies an empty interval and is never drawn
    return cum.tolist()


def sample_stream(p: Pfsa, length: int, seed: int) -> SymbolStream:
    """Draw ``length`` symbols, starting at the state of largest stationary weight."""
    if length < 0:
        raise InputError("length must be non-negative")
    rng = np.random.default_rng(seed)
    q0 = int(np.argmax(stationary_distribution(p)))
    u = rng.random(length)
    data = _sample_symbols(_cumulative(p.morph), p.delta.tolist(), q0, u)
    return SymbolStream(p.alphabet, np.asarray(data, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class CoupledSystemSpec:
    """Two processes that drive each other one step at a time.

    ``a_table[a, b]`` is the distribution of the next A symbol given current
    symbols (a, b); ``b_table[b, a]`` likewise for B.
    """

    alphabet_a: Alphabet
    alphabet_b: Alphabet
    a_table: np.ndarray
    b_table: np.ndarray
    initial_a: int = 0
    initial_b: int = 0

    def __post_init__(self):
        ka, kb = self.alphabet_a.size, self.alphabet_b.size
        a = np.asarray(self.a_table, dtype=float)
        b = np.asarray(self.b_table, dtype=float)
        if a.shape != (ka, kb, ka) or b.shape != (kb, ka, kb):
            raise InputError("conditional tables have the wrong shape")
        for name, t in (("a_table", a), ("b_table", b)):
            flat = t.reshape(-1, t.shape[-1])
            if np.any(flat < 0) or np.any(np.abs(flat.sum(axis=1) - 1.0) > DIST_ATOL):
                raise InputError(f"{name} has a row that is not a distribution")
        if not (0 <= self.initial_a < ka and 0 <= self.initial_b < kb):
            raise InputError("initial symbols out of range")
        object.__setattr__(self, "a_table", _frozen(a, float))
        object.__setattr__(self, "b_table", _frozen(b, float))

    @classmethod
    def from_cross_tables(cls, a_given_b, b_given_a, alphabet_a: Alphabet | None = None,
                          alphabet_b: Alphabet | None = None, initial_a: int = 0,
                          initial_b: int = 0) -> "CoupledSystemSpec":
        """Each process depends only on the other's current symbol."""
        a_given_b = np.asarray(a_given_b, dtype=float)
        b_given_a = np.asarray(b_given_a, dtype=float)
        kb, ka = a_given_b.shape
        alphabet_a = alphabet_a or Alphabet.of_size(ka)
        alphabet_b = alphabet_b or Alphabet.of_size(kb)
        a_table = np.broadcast_to(a_given_b[None, :, :], (ka, kb, ka))
        b_table = np.broadcast_to(b_given_a[None, :, :], (kb, ka, kb))
        return cls(alphabet_a, alphabet_b, a_table, b_table, initial_a, initial_b)


def driven_pair_spec() -> CoupledSystemSpec:
    """B drives A (0.8 persistence of B's symbol); B is fair coin flips."""
    return CoupledSystemSpec.from_cross_tables(
        a_given_b=[[0.8, 0.2], [0.2, 0.8]],
        b_given_a=[[0.5, 0.5], [0.5, 0.5]],
        alphabet_a=Alphabet.binary(),
        alphabet_b=Alphabet.binary(),
    )


def simulate_coupled(spec: CoupledSystemSpec, length: int, seed: int) -> tuple[SymbolStream, SymbolStream]:
    if length < 0:
        raise InputError("length must be non-negative")
    if length == 0:
        empty = np.zeros(0, dtype=np.int64)
        return SymbolStream(spec.alphabet_a, empty), SymbolStream(spec.alphabet_b, empty)
    rng = np.random.default_rng(seed)
    ua = rng.random(length - 1).tolist()
    ub = rng.random(length - 1).tolist()
    ka, kb = spec.alphabet_a.size, spec.alphabet_b.size
    cum_a = np.cumsum(spec.a_table, axis=2)
    cum_a[..., -1] = 1.0
    cum_b = np.cumsum(spec.b_table, axis=2)
    cum_b[..., -1] = 1.0
    cum_a, cum_b = cum_a.tolist(), cum_b.tolist()
    a, b = spec.initial_a, spec.initial_b
    out_a = [a] + [0] * (length - 1)
    out_b = [b] + [0] * (length - 1)
    for i in range(length - 1):
        na = min(bisect.bisect_right(cum_a[a][b], ua[i]), ka - 1)
        nb = min(bisect.bisect_right(cum_b[b][a], ub[i]), kb - 1)
        a, b = na, nb
        out_a[i + 1] = a
        out_b[i + 1] = b
    return (SymbolStream(spec.alphabet_a, np.asarray(out_a)),
            SymbolStream(spec.alphabet_b, np.asarray(out_b)))


def _next_level(delta: np.ndarray, morph: np.ndarray, dists: np.ndarray, a: int):
    n = delta.shape[0]
    gamma = np.zeros((n, n))
    gamma[np.arange(n), delta[:, a]] = morph[:, a]
    nxt = dists @ gamma
    totals = nxt.sum(axis=1)
    ok = totals > 0
    nxt[ok] /= totals[ok, None]
    return nxt, ok


def pfsa_distance(g1: Pfsa, g2: Pfsa, depth: int = 8) -> float:
    """Sup-norm gap between predicted next-symbol distributions over all strings
    of length <= ``depth``, each machine started from its stationary distribution.

    Strings that are impossible under either machine are skipped.
    """
    if g1.alphabet != g2.alphabet:
        raise InputError("machines are over different alphabets")
    if depth < 0:
        raise InputError("depth must be non-negative")
    d1 = stationary_distribution(g1)[None, :]
    d2 = stationary_distribution(g2)[None, :]
    best = 0.0
    for level in range(depth + 1):
        if d1.shape[0] == 0:
            break
        gap = np.max(np.abs(d1 @ g1.morph - d2 @ g2.morph), axis=1)
        best = max(best, float(gap.max()))
        if level == depth:
            break
        next1, next2 = [], []
        for a in range(g1.alphabet.size):
            n1, ok1 = _next_level(g1.delta, g1.morph, d1, a)
            n2, ok2 = _next_level(g2.delta, g2.morph, d2, a)
            ok = ok1 & ok2
            next1.append(n1[ok])
            next2.append(n2[ok])
        d1 = np.concatenate(next1)
        d2 = np.concatenate(next2)
    return min(best, 1.0)


def all_strings(k: int, max_len: int):
    """Every index tuple over ``k`` symbols, by length then lexicographically."""
    for m in range(max_len + 1):
        yield from itertools.product(range(k), repeat=m)

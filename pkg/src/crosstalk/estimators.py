"""Substring counts, symbolic/cross derivatives, derivative heaps and hull vertices.

Strings are handled as tuples of symbol indices.  Counting over a whole depth
level is done in one pass by packing each window into a base-|alphabet|
integer code and histogramming the codes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .automata import Alphabet, SymbolStream, as_indices, entropy
from .errors import AlignmentError, InputError, InsufficientDataError, NoOccurrenceError

MAX_CODE_SPACE = 1 << 24
HULL_TOL = 1e-12


def _pattern(x, alphabet: Alphabet) -> tuple[int, ...]:
    return as_indices(x, alphabet)


def _check_same_alphabet(s: SymbolStream, x) -> tuple[int, ...]:
    if isinstance(x, SymbolStream) and x.alphabet != s.alphabet:
        raise InputError("pattern and stream use different alphabets")
    return _pattern(x, s.alphabet)


def _check_aligned(sA: SymbolStream, sB: SymbolStream):
    if len(sA) != len(sB):
        raise AlignmentError(f"streams are not aligned: {len(sA)} vs {len(sB)} symbols")


def occurrence_ends(data: np.ndarray, pattern: tuple[int, ...]) -> np.ndarray:
    """Indices k at which ``pattern`` ends in ``data`` (overlapping)."""
    n, m = data.size, len(pattern)
    if m == 0:
        return np.arange(n, dtype=np.int64)
    if m > n:
        return np.zeros(0, dtype=np.int64)
    starts = np.flatnonzero(data[: n - m + 1] == pattern[0])
    for j in range(1, m):
        if starts.size == 0:
            break
        starts = starts[data[starts + j] == pattern[j]]
    return starts + (m - 1)


def symbolic_count(s: SymbolStream, x) -> int:
    """Overlapping occurrences of ``x`` in ``s``; the empty string counts |s|."""
    pattern = _check_same_alphabet(s, x)
    return int(occurrence_ends(s.data, pattern).size)


def _normalize(counts: np.ndarray) -> tuple[np.ndarray, int]:
    total = int(counts.sum())
    if total == 0:
        raise NoOccurrenceError("string never occurs with a successor symbol")
    return counts / total, total


def successor_counts(s: SymbolStream, x) -> np.ndarray:
    """Counts of x.sigma for every sigma."""
    pattern = _check_same_alphabet(s, x)
    k = s.alphabet.size
    if not pattern:
        return np.bincount(s.data, minlength=k)
    ends = occurrence_ends(s.data, pattern)
    ends = ends[ends + 1 < s.data.size]
    return np.bincount(s.data[ends + 1], minlength=k)


def symbolic_derivative(s: SymbolStream, x) -> tuple[np.ndarray, int]:
    """Empirical next-symbol distribution after ``x`` and its support count."""
    return _normalize(successor_counts(s, x))


def cross_successor_counts(sA: SymbolStream, sB: SymbolStream, x) -> np.ndarray:
    """Counts over sB's alphabet of the sB symbol right after each x ending in sA.

    An occurrence ending at the last index has no successor and is dropped.
    For the empty string every sB symbol counts once.
    """
    _check_aligned(sA, sB)
    pattern = _check_same_alphabet(sA, x)
    kb = sB.alphabet.size
    if not pattern:
        return np.bincount(sB.data, minlength=kb)
    ends = occurrence_ends(sA.data, pattern)
    ends = ends[ends + 1 < sA.data.size]
    return np.bincount(sB.data[ends + 1], minlength=kb)


def cross_count(sA: SymbolStream, sB: SymbolStream, x, sigma) -> int:
    sig = as_indices([sigma], sB.alphabet)[0]
    return int(cross_successor_counts(sA, sB, x)[sig])


def cross_derivative(sA: SymbolStream, sB: SymbolStream, x) -> tuple[np.ndarray, int]:
    return _normalize(cross_successor_counts(sA, sB, x))


@dataclass(frozen=True)
class HeapEntry:
    string: tuple[int, ...]
    distribution: np.ndarray
    count: int


@dataclass(frozen=True, eq=False)
class DerivativeHeap:
    """Candidate strings (up to ``depth``) mapped to derivative and support."""

    input_alphabet: Alphabet
    output_alphabet: Alphabet
    depth: int
    n_min: int
    entries: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[HeapEntry]:
        return iter(self.entries.values())

    def __contains__(self, x) -> bool:
        return tuple(x) in self.entries

    def __getitem__(self, x) -> HeapEntry:
        return self.entries[tuple(x)]

    def label(self, x) -> str:
        syms = self.input_alphabet.decode(x)
        sep = "" if all(len(c) == 1 for c in self.input_alphabet.symbols) else ","
        return sep.join(syms)

    def to_records(self) -> list[dict]:
        """Debug dump: one record per entry."""
        return [
            {
                "string": self.label(e.string),
                "count": e.count,
                "distribution": [float(f"{v:.12g}") for v in e.distribution],
            }
            for e in self
        ]


def _window_codes(data: np.ndarray, k: int, m: int) -> np.ndarray:
    """codes[i] packs data[i:i+m] in base k (most significant first)."""
    n = data.size - m + 1
    codes = np.zeros(max(n, 0), dtype=np.int64)
    for j in range(m):
        codes = codes * k + data[j : j + n]
    return codes


def _histogram(codes: np.ndarray, space: int) -> dict[int, int] | np.ndarray:
    if space <= MAX_CODE_SPACE:
        return np.bincount(codes, minlength=space)
    uniq, cnt = np.unique(codes, return_counts=True)
    return dict(zip(uniq.tolist(), cnt.tolist()))


def _decode(code: int, k: int, m: int) -> tuple[int, ...]:
    out = [0] * m
    for j in range(m - 1, -1, -1):
        code, out[j] = divmod(code, k)
    return tuple(out)


def _level_entries(prefix_codes: np.ndarray, successors: np.ndarray, ka: int, kb: int,
                   m: int, n_min: int) -> list[HeapEntry]:
    """Entries for all strings of length m given aligned prefix codes and successors."""
    space = ka ** m * kb
    if space >= 1 << 62:
        raise InputError("heap depth too large for the alphabet size")
    joint = prefix_codes * kb + successors
    hist = _histogram(joint, space)
    entries = []
    if isinstance(hist, np.ndarray):
        table = hist.reshape(ka ** m, kb)
        support = table.sum(axis=1)
        for code in np.flatnonzero(support >= max(n_min, 1)).tolist():
            row = table[code]
            entries.append(HeapEntry(_decode(code, ka, m), row / support[code], int(support[code])))
    else:
        rows: dict[int, np.ndarray] = {}
        for c, cnt in hist.items():
            rows.setdefault(c // kb, np.zeros(kb, dtype=np.int64))[c % kb] += cnt
        for code in sorted(rows):
            row = rows[code]
            total = int(row.sum())
            if total >= max(n_min, 1):
                entries.append(HeapEntry(_decode(code, ka, m), row / total, total))
    return entries


def _build(src: np.ndarray, dst: np.ndarray, ka: int, kb: int, depth: int, n_min: int) -> dict:
    entries: dict = {}
    n = src.size
    # empty string: every successor symbol counts
    counts = np.bincount(dst, minlength=kb)
    if counts.sum() >= max(n_min, 1):
        entries[()] = HeapEntry((), counts / counts.sum(), int(counts.sum()))
    for m in range(1, depth + 1):
        if m >= n:
            break
        prefix = _window_codes(src[: n - 1], ka, m)
        succ = dst[m:]
        for e in _level_entries(prefix, succ, ka, kb, m, n_min):
            entries[e.string] = e
    return entries


def default_depth(alphabet_size: int, epsilon: float) -> int:
    """ceil(log_|alphabet| (1/epsilon)), at least 1."""
    if alphabet_size < 2:
        return 1
    return max(1, math.ceil(math.log(1.0 / epsilon) / math.log(alphabet_size) - 1e-12))


def build_heap(s: SymbolStream, depth: int, n_min: int = 50) -> DerivativeHeap:
    if len(s) == 0:
        raise InsufficientDataError("cannot build a heap from an empty stream")
    if depth < 0:
        raise InputError("depth must be non-negative")
    k = s.alphabet.size
    entries = _build(s.data, s.data, k, k, depth, n_min)
    if not entries:
        raise InsufficientDataError(f"no string reaches the support threshold n_min={n_min}")
    return DerivativeHeap(s.alphabet, s.alphabet, depth, n_min, entries)


def build_cross_heap(sA: SymbolStream, sB: SymbolStream, depth: int, n_min: int = 50) -> DerivativeHeap:
    _check_aligned(sA, sB)
    if len(sA) == 0:
        raise InsufficientDataError("cannot build a heap from empty streams")
    if depth < 0:
        raise InputError("depth must be non-negative")
    entries = _build(sA.data, sB.data, sA.alphabet.size, sB.alphabet.size, depth, n_min)
    if not entries:
        raise InsufficientDataError(f"no string reaches the support threshold n_min={n_min}")
    return DerivativeHeap(sA.alphabet, sB.alphabet, depth, n_min, entries)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def hull_2d(points: list[tuple[float, float]]) -> list[int]:
    """Indices of strict convex-hull vertices (Graham scan by angle).

    Duplicate points share one representative (the first index given);
    collinear boundary points are not vertices.
    """
    seen: dict[tuple[float, float], int] = {}
    for i, p in enumerate(points):
        seen.setdefault(p, i)
    uniq = list(seen.items())
    if len(uniq) <= 2:
        return sorted(i for _, i in uniq)
    pivot, pivot_idx = min(uniq, key=lambda t: (t[0][1], t[0][0]))
    rest = [(p, i) for p, i in uniq if i != pivot_idx]

    def key(item):
        (x, y), _ = item
        dx, dy = x - pivot[0], y - pivot[1]
        return (math.atan2(dy, dx), dx * dx + dy * dy)

    rest.sort(key=key)
    # the last ray is walked back toward the pivot, farthest point first
    last_angle = key(rest[-1])[0]
    tail = [t for t in rest if key(t)[0] == last_angle]
    if len(tail) < len(rest):
        rest = rest[: len(rest) - len(tail)] + tail[::-1]
    stack = [(pivot, pivot_idx)]
    for p, i in rest:
        while len(stack) >= 2 and _cross(stack[-2][0], stack[-1][0], p) <= HULL_TOL:
            stack.pop()
        stack.append((p, i))
    # points collinear with the pivot on the closing edge
    while len(stack) >= 3 and _cross(stack[-2][0], stack[-1][0], pivot) <= HULL_TOL:
        stack.pop()
    if len(stack) == 2 and stack[0][0] == stack[1][0]:
        stack.pop()
    return sorted(i for _, i in stack)


def _lexmax(dists: np.ndarray, order: list[int]) -> int:
    """Index maximizing coordinates lexicographically in ``order``."""
    keys = tuple(dists[:, c] for c in reversed(order))
    return int(np.lexsort(keys)[-1]) if dists.shape[0] else 0


def hull_vertex_string(h: DerivativeHeap, tolerance: float = 0.0) -> tuple[int, ...]:
    """Pick a string whose derivative is a vertex of the heap's convex hull.

    Candidates: the extremes of the first coordinate (2 symbols), the exact
    hull (3 symbols), or per-coordinate lexicographic maxima (more symbols).
    The candidate of least entropy wins; ties go to the shorter, then
    lexicographically smaller, string.

    With ``tolerance > 0`` the answer is the shortest (then best supported)
    string whose derivative lies within ``tolerance`` of that vertex in sup
    norm; deep vertices are often rare strings with noisy extensions.
    """
    entries = list(h)
    if not entries:
        raise InsufficientDataError("empty derivative heap")
    if len(entries) == 1:
        return entries[0].string
    dists = np.array([e.distribution for e in entries])
    k = dists.shape[1]
    if k == 1:
        candidates = list(range(len(entries)))
    elif k == 2:
        candidates = [int(np.argmax(dists[:, 0])), int(np.argmin(dists[:, 0]))]
    elif k == 3:
        candidates = hull_2d([(float(d[0]), float(d[1])) for d in dists])
    else:
        candidates = [_lexmax(dists, [c] + [j for j in range(k) if j != c]) for c in range(k)]
    # ties on coordinates: gather every entry equal to a chosen candidate
    chosen = {tuple(dists[c]) for c in candidates}
    pool = [i for i, d in enumerate(dists) if tuple(d) in chosen]

    def rank(i):
        e = entries[i]
        return (round(entropy(e.distribution), 12), len(e.string), e.string)

    vertex = min(pool, key=rank)
    if tolerance <= 0:
        return entries[vertex].string
    near = np.flatnonzero(np.max(np.abs(dists - dists[vertex]), axis=1) <= tolerance)
    best = min(near, key=lambda i: (len(entries[i].string), -entries[i].count, entries[i].string))
    return entries[int(best)].string

"""Small graph utilities over total transition tables.

A transition table is an integer array ``delta`` of shape (n_states, n_symbols)
with ``delta[q, a]`` the successor of ``q`` on symbol ``a``.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


def strongly_connected_components(n: int, successors) -> list[list[int]]:
    """Tarjan's algorithm, iterative.

    ``successors(v)`` returns an iterable of vertices reachable in one step.
    Components are returned in the order Tarjan completes them (reverse
    topological order), each sorted ascending.
    """
    index = [-1] * n
    lowlink = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0

    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(successors(w))))
                    advanced = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                components.append(sorted(comp))
    return components


def table_components(delta: np.ndarray) -> list[list[int]]:
    rows = [sorted(set(int(t) for t in row)) for row in np.asarray(delta)]
    return strongly_connected_components(len(rows), lambda v: rows[v])


def is_nontrivial(component: Sequence[int], delta: np.ndarray) -> bool:
    """True when the component carries at least one internal edge."""
    members = set(component)
    return any(int(t) in members for q in component for t in delta[q])


def is_closed(component: Sequence[int], delta: np.ndarray) -> bool:
    members = set(component)
    return all(int(t) in members for q in component for t in delta[q])


def is_strongly_connected(delta: np.ndarray) -> bool:
    delta = np.asarray(delta)
    if delta.shape[0] == 0:
        return False
    return len(table_components(delta)) == 1


def restrict(delta: np.ndarray, keep: Sequence[int], rows: np.ndarray | None = None) -> np.ndarray:
    """Restrict ``delta`` to the states in ``keep`` and relabel them 0..len-1.

    Transitions leaving ``keep`` are redirected to the kept state whose row in
    ``rows`` is nearest in sup norm (lowest index on ties).  Without ``rows``
    every transition must already stay inside ``keep``.
    """
    keep = list(keep)
    relabel = {q: i for i, q in enumerate(keep)}
    out = np.empty((len(keep), delta.shape[1]), dtype=np.int64)
    for i, q in enumerate(keep):
        for a, t in enumerate(delta[q]):
            t = int(t)
            if t in relabel:
                out[i, a] = relabel[t]
            elif rows is None:
                raise ValueError(f"transition ({q}, {a}) -> {t} leaves the kept set")
            else:
                out[i, a] = nearest_row(rows[t], rows[keep])
    return out


def nearest_row(target: np.ndarray, candidates: np.ndarray) -> int:
    dist = np.max(np.abs(np.asarray(candidates) - np.asarray(target)), axis=1)
    return int(np.argmin(dist))


def walk(delta: np.ndarray, data: Iterable[int], start: int = 0) -> np.ndarray:
    """States visited when reading ``data`` from ``start``; length len(data)+1."""
    table = np.asarray(delta).tolist()
    symbols = data.tolist() if isinstance(data, np.ndarray) else list(data)
    out = [0] * (len(symbols) + 1)
    q = start
    out[0] = q
    i = 1
    for a in symbols:
        q = table[q][a]
        out[i] = q
        i += 1
    return np.asarray(out, dtype=np.int64)

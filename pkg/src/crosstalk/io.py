"""Quantization, CSV ingestion and JSON/DOT serialization."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .automata import Alphabet, CoupledSystemSpec, Pfsa, SymbolStream, Xpfsa
from .causality import CausalityNetwork
from .errors import DegenerateQuantizationError, IngestionError, InputError  # noqa: F401

SIG_DIGITS = 12


# -- quantization -----------------------------------------------------------

def quantize_updown(series) -> SymbolStream:
    """'0' where the series drops from the previous value, '1' otherwise."""
    x = np.asarray(series, dtype=float).reshape(-1)
    if x.size < 2:
        raise InputError("up/down quantization needs at least two values")
    return SymbolStream(Alphabet.binary(), (x[1:] >= x[:-1]).astype(np.int64))


def quantize_quantile(series, k: int = 2) -> SymbolStream:
    """Symbol i for values in the i-th empirical k-quantile bin.

    A value equal to a cut point goes to the lower bin.
    """
    x = np.asarray(series, dtype=float).reshape(-1)
    if k < 2:
        raise InputError("quantile quantization needs k >= 2")
    if x.size < k:
        raise InputError(f"need at least k={k} values")
    if np.all(x == x[0]):
        raise DegenerateQuantizationError("all values are equal; no quantile split exists")
    cuts = np.quantile(x, np.arange(1, k) / k)
    return SymbolStream(Alphabet.of_size(k), np.searchsorted(cuts, x, side="left"))


QUANTIZERS = ("updown", "quantile")


def quantize(series, method: str = "updown", k: int = 2) -> SymbolStream:
    if method == "updown":
        return quantize_updown(series)
    if method == "quantile":
        return quantize_quantile(series, k)
    raise InputError(f"unknown quantizer {method!r}; choose from {QUANTIZERS}")


# -- CSV ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SeriesTable:
    names: list
    columns: dict          # name -> float array
    index: list | None = None
    dropped_rows: int = 0

    def __len__(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv(path) -> SeriesTable:
    """Read a header row of names followed by numeric rows.

    A non-numeric first column is kept as the time index.  Rows with an empty
    field are dropped from every column so the series stay aligned.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise IngestionError(f"{path}: need a header and at least one data row")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise IngestionError(f"{path}: line {i} has {len(r)} fields, header has {len(header)}")
    has_index = any(r[0].strip() and not _is_number(r[0]) for r in body)
    start = 1 if has_index else 0
    names = header[start:]
    if not names:
        raise IngestionError(f"{path}: no data columns")
    if len(set(names)) != len(names):
        raise IngestionError(f"{path}: duplicate column names")
    kept, index, dropped = [], [], 0
    for i, r in enumerate(body, start=2):
        fields = [c.strip() for c in r[start:]]
        if any(c == "" for c in fields):
            dropped += 1
            continue
        try:
            kept.append([float(c) for c in fields])
        except ValueError as exc:
            raise IngestionError(f"{path}: line {i}: {exc}") from None
        if has_index:
            index.append(r[0].strip())
    if not kept:
        raise IngestionError(f"{path}: every row has a missing value")
    values = np.array(kept)
    if not np.all(np.isfinite(values)):
        raise IngestionError(f"{path}: non-finite values")
    columns = {n: values[:, j] for j, n in enumerate(names)}
    return SeriesTable(names, columns, index if has_index else None, dropped)


def quantize_table(table: SeriesTable, method: str = "updown", k: int = 2) -> dict:
    return {n: quantize(table.columns[n], method, k) for n in table.names}


# -- streams on disk -----------------------------------------------------------

def _single_char(alphabet: Alphabet) -> bool:
    return alphabet.size <= 10 and all(len(s) == 1 for s in alphabet.symbols)


def format_stream(s: SymbolStream) -> str:
    sep = "" if _single_char(s.alphabet) else ","
    return sep.join(s.labels())


def write_stream(s: SymbolStream, path):
    Path(path).write_text(format_stream(s) + "\n")


def parse_stream(text: str, alphabet: Alphabet | None = None) -> SymbolStream:
    text = text.strip()
    labels = [t.strip() for t in text.split(",")] if "," in text else list(text)
    if alphabet is None:
        symbols = sorted(set(labels), key=lambda t: (len(t), t))
        if all(t.isdigit() for t in symbols) and symbols:
            # digit labels: fill the range so "0"/"1" stay binary when one is absent
            alphabet = Alphabet.of_size(max(max(int(t) for t in symbols) + 1, 2))
        else:
            alphabet = Alphabet(tuple(symbols))
    return SymbolStream.from_labels(labels, alphabet)


def read_stream(path, alphabet: Alphabet | None = None) -> SymbolStream:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IngestionError(f"cannot read stream {path}: {exc}") from None
    if not text.strip():
        raise IngestionError(f"{path}: empty stream file")
    return parse_stream(text, alphabet)


# -- machines -----------------------------------------------------------------

def _real(x: float) -> float:
    return float(f"{x:.{SIG_DIGITS}g}")


def _rows(m: np.ndarray) -> list:
    return [[_real(v) for v in row] for row in m]


def machine_to_dict(m: Pfsa | Xpfsa) -> dict:
    if isinstance(m, Pfsa):
        return {
            "alphabet": list(m.alphabet.symbols),
            "n_states": m.n_states,
            "delta": m.delta.tolist(),
            "morph": _rows(m.morph),
        }
    if isinstance(m, Xpfsa):
        return {
            "alphabet": list(m.input_alphabet.symbols),
            "n_states": m.n_states,
            "delta": m.delta.tolist(),
            "output_alphabet": list(m.output_alphabet.symbols),
            "out_morph": _rows(m.out_morph),
        }
    raise InputError(f"not a machine: {type(m).__name__}")


def _renormalize(rows) -> np.ndarray:
    # undo the rounding drift of the 12-digit text form
    r = np.asarray(rows, dtype=float)
    if r.ndim != 2:
        raise IngestionError("probability rows must form a matrix")
    return r / r.sum(axis=1, keepdims=True)


def machine_from_dict(d: dict) -> Pfsa | Xpfsa:
    try:
        alphabet = Alphabet(tuple(d["alphabet"]))
        delta = np.asarray(d["delta"], dtype=np.int64)
        if delta.ndim != 2 or delta.shape[0] != d["n_states"]:
            raise IngestionError("n_states does not match delta")
        if delta.shape[1] != alphabet.size:
            raise IngestionError("delta width does not match the alphabet")
        if "out_morph" in d:
            return Xpfsa(alphabet, Alphabet(tuple(d["output_alphabet"])), delta,
                         _renormalize(d["out_morph"]))
        return Pfsa(alphabet, delta, _renormalize(d["morph"]))
    except KeyError as exc:
        raise IngestionError(f"machine document lacks field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, IngestionError):
            raise
        raise IngestionError(f"malformed machine document: {exc}") from None


def _dumps_fields(d: dict) -> str:
    # one field per line, arrays kept compact
    body = ",\n".join(f"  {json.dumps(k)}: {json.dumps(v)}" for k, v in d.items())
    return "{\n" + body + "\n}"


def dumps_machine(m: Pfsa | Xpfsa) -> str:
    return _dumps_fields(machine_to_dict(m))


def dump_machine(m: Pfsa | Xpfsa, path):
    Path(path).write_text(dumps_machine(m) + "\n")


def load_machine(path) -> Pfsa | Xpfsa:
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestionError(f"cannot read machine {path}: {exc}") from None
    if not isinstance(d, dict):
        raise IngestionError(f"{path}: machine document must be a JSON object")
    return machine_from_dict(d)


# -- coupled-system specs -------------------------------------------------------

def coupled_spec_from_dict(d: dict) -> CoupledSystemSpec:
    """Either full tables (``a_table``/``b_table``) or ``a_given_b``/``b_given_a``."""
    try:
        ka = Alphabet(tuple(d["alphabet_a"])) if "alphabet_a" in d else None
        kb = Alphabet(tuple(d["alphabet_b"])) if "alphabet_b" in d else None
        init = dict(initial_a=int(d.get("initial_a", 0)), initial_b=int(d.get("initial_b", 0)))
        if "a_table" in d:
            a = np.asarray(d["a_table"], dtype=float)
            b = np.asarray(d["b_table"], dtype=float)
            ka = ka or Alphabet.of_size(a.shape[0])
            kb = kb or Alphabet.of_size(b.shape[0])
            return CoupledSystemSpec(ka, kb, a, b, **init)
        return CoupledSystemSpec.from_cross_tables(d["a_given_b"], d["b_given_a"], ka, kb, **init)
    except KeyError as exc:
        raise IngestionError(f"coupled-system spec lacks field {exc}") from None
    except (TypeError, ValueError, IndexError) as exc:
        if isinstance(exc, InputError):
            raise
        raise IngestionError(f"malformed coupled-system spec: {exc}") from None


def load_coupled_spec(path) -> CoupledSystemSpec:
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestionError(f"cannot read spec {path}: {exc}") from None
    return coupled_spec_from_dict(d)


# -- networks -----------------------------------------------------------------

def network_to_dict(net: CausalityNetwork) -> dict:
    arcs = [
        {"from": a.source, "to": a.target, "gamma": _real(a.gamma), "n_states": a.n_states}
        for (_, _), a in sorted(net.arcs.items(), key=lambda kv: (net.nodes.index(kv[0][0]),
                                                                   net.nodes.index(kv[0][1])))
    ]
    skipped = [{"from": s, "to": t, "reason": r} for (s, t), r in sorted(
        net.skipped.items(), key=lambda kv: (net.nodes.index(kv[0][0]), net.nodes.index(kv[0][1])))]
    return {"nodes": list(net.nodes), "arcs": arcs, "skipped": skipped}


def network_to_json(net: CausalityNetwork) -> str:
    return json.dumps(network_to_dict(net), indent=2)


def _dot_id(name: str) -> str:
    return json.dumps(str(name))


def network_to_dot(net: CausalityNetwork, min_gamma: float = 0.0) -> str:
    """Graphviz digraph; labels carry the coefficient, pen width scales with it."""
    lines = ["digraph causality {"]
    lines += [f"  {_dot_id(n)};" for n in net.nodes]
    for arc in network_to_dict(net)["arcs"]:
        g = arc["gamma"]
        if g < min_gamma:
            continue
        width = 0.5 + 9.5 * g
        lines.append(f"  {_dot_id(arc['from'])} -> {_dot_id(arc['to'])} "
                     f"[label=\"{g:.4f}\", penwidth={width:.3f}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_network(net: CausalityNetwork, fmt: str = "json") -> str:
    if fmt == "json":
        return network_to_json(net)
    if fmt in ("dot", "graphtext"):
        return network_to_dot(net)
    raise InputError(f"unknown network format {fmt!r}")


def heap_to_json(heap) -> str:
    return json.dumps(heap.to_records(), indent=2)

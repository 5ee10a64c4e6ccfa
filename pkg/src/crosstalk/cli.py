"""Command-line entry point: ``crosstalk <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io
from .automata import Pfsa, Xpfsa, sample_stream, simulate_coupled
from .causality import causality_network, gamma_empirical, predict_next
from .errors import CrosstalkError
from .self_inference import InferenceConfig, infer_pfsa_detailed
from .cross_inference import infer_xpfsa

log = logging.getLogger("crosstalk")


def _config(args) -> InferenceConfig:
    return InferenceConfig(epsilon=args.epsilon, depth=args.depth, n_min=args.nmin,
                           max_states=args.max_states, min_length=args.min_length)


def _emit(text: str, path):
    if path is None or str(path) == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(path).write_text(text if text.endswith("\n") else text + "\n")


def _print_json(obj):
    sys.stdout.write(json.dumps(obj) + "\n")


def _read_pair(args):
    sA = io.read_stream(args.stream_a)
    sB = io.read_stream(args.stream_b)
    return sA, sB


def cmd_infer_self(args) -> int:
    s = io.read_stream(args.stream)
    result = infer_pfsa_detailed(s, _config(args))
    _emit(io.dumps_machine(result.machine), args.output)
    return 0


def cmd_infer_cross(args) -> int:
    sA, sB = _read_pair(args)
    result = infer_xpfsa(sA, sB, _config(args))
    _emit(io.dumps_machine(result.machine), args.output)
    return 0


def cmd_gamma(args) -> int:
    sA, sB = _read_pair(args)
    r = gamma_empirical(sA, sB, _config(args))
    _print_json({
        "gamma": r.gamma,
        "raw_gamma": r.raw,
        "n_states": r.n_states,
        "sync_string": "".join(sA.alphabet.decode(r.cross.sync_string)),
        "occupancy": r.occupancy.tolist(),
        "base": r.base.tolist(),
        "warnings": r.cross.warnings,
    })
    return 0


def cmd_network(args) -> int:
    table = io.load_csv(args.csv)
    streams = io.quantize_table(table, args.quantizer, args.parts)
    net = causality_network(streams, _config(args), n_jobs=args.jobs)
    _emit(io.network_to_json(net), args.output)
    if args.graph:
        _emit(io.network_to_dot(net, args.min_gamma), args.graph)
    return 0


def cmd_predict(args) -> int:
    self_model = io.load_machine(args.self_model)
    cross_model = io.load_machine(args.cross_model)
    if not isinstance(self_model, Pfsa) or not isinstance(cross_model, Xpfsa):
        raise CrosstalkError("predict needs a self-model PFSA and a cross-model XPFSA")
    history = io.parse_stream(args.history, self_model.alphabet) if args.history else ""
    tau = predict_next(self_model, cross_model, history)
    _print_json({"alphabet": list(cross_model.output_alphabet.symbols), "distribution": tau.tolist()})
    return 0


def cmd_simulate(args) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    try:
        doc = json.loads(Path(args.spec).read_text())
    except json.JSONDecodeError as exc:
        raise io.IngestionError(f"cannot parse {args.spec}: {exc}") from None
    if isinstance(doc, dict) and "delta" in doc:
        # a plain machine document samples a single stream
        machine = io.machine_from_dict(doc)
        if not isinstance(machine, Pfsa):
            raise CrosstalkError("simulate samples PFSA machines, not cross models")
        io.write_stream(sample_stream(machine, args.length, args.seed), out / "stream.txt")
        written = ["stream.txt"]
    else:
        if not isinstance(doc, dict):
            raise io.IngestionError("spec must be a JSON object")
        a, b = simulate_coupled(io.coupled_spec_from_dict(doc), args.length, args.seed)
        io.write_stream(a, out / "a.txt")
        io.write_stream(b, out / "b.txt")
        written = ["a.txt", "b.txt"]
    _print_json({"written": [str(out / w) for w in written], "length": args.length, "seed": args.seed})
    return 0


def cmd_quantize(args) -> int:
    table = io.load_csv(args.csv)
    streams = io.quantize_table(table, args.quantizer, args.parts)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for i, (name, s) in enumerate(streams.items()):
        io.write_stream(s, out / f"{i:03d}.txt")
    manifest = {"columns": [{"name": n, "file": f"{i:03d}.txt", "length": len(s)}
                            for i, (n, s) in enumerate(streams.items())],
                "dropped_rows": table.dropped_rows}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    _print_json(manifest)
    return 0


def _add_inference_flags(p: argparse.ArgumentParser):
    p.add_argument("--epsilon", type=float, default=0.05, help="derivative match tolerance")
    p.add_argument("--depth", type=int, default=0, help="heap depth L (0 = automatic)")
    p.add_argument("--nmin", type=int, default=50, help="minimum support for a derivative")
    p.add_argument("--max-states", type=int, default=64)
    p.add_argument("--min-length", type=int, default=100, help="shortest accepted stream")


def _add_quantizer_flags(p: argparse.ArgumentParser):
    p.add_argument("--quantizer", choices=io.QUANTIZERS, default="updown")
    p.add_argument("--parts", type=int, default=2, help="number of bins for the quantile quantizer")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crosstalk",
                                     description="Probabilistic automata and directional causality from symbol streams.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer-self", help="infer a PFSA from one stream")
    p.add_argument("stream")
    _add_inference_flags(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_infer_self)

    for name, func, help_ in (("infer-cross", cmd_infer_cross, "infer an XPFSA for A -> B"),
                              ("gamma", cmd_gamma, "coefficient of dependence of B on A")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("stream_a")
        p.add_argument("stream_b")
        _add_inference_flags(p)
        if name == "infer-cross":
            p.add_argument("-o", "--output")
        p.set_defaults(func=func)

    p = sub.add_parser("network", help="causality network over the columns of a CSV")
    p.add_argument("csv")
    _add_inference_flags(p)
    _add_quantizer_flags(p)
    p.add_argument("--min-gamma", type=float, default=0.0, help="omit weaker arcs from graph text")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", help="network JSON (default stdout)")
    p.add_argument("--graph", help="also write Graphviz text here")
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("predict", help="next-symbol distribution of the target")
    p.add_argument("self_model")
    p.add_argument("cross_model")
    p.add_argument("--history", default="")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="sample fixture streams")
    p.add_argument("spec", help="coupled-system spec JSON or a PFSA machine JSON")
    p.add_argument("--length", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=".")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("quantize", help="quantize CSV columns into symbol streams")
    p.add_argument("csv")
    _add_quantizer_flags(p)
    p.add_argument("-o", "--output", default=".")
    p.set_defaults(func=cmd_quantize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (CrosstalkError, ValueError, OSError) as exc:
        code = getattr(exc, "code", None) or type(exc).__name__
        sys.stdout.flush()
        sys.stderr.write(json.dumps({"error": code, "type": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``qrecog {encode,store,recognize,benchmark}``.

Exit codes: 0 success, 1 input/format error, 2 dimension/consistency error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import BenchmarkConfig, run_benchmark
from .errors import ConsistencyError, InputError
from .hilbert import QuantumState, dumps_state, embed, inner, loads_state
from .image_space import center_and_normalize, read_image
from .ortho_recognizer import (
    OrthoMemory,
    build_memory,
    dumps_memory,
    memory_from_dict,
    outcome_probabilities,
    recognize_single_shot,
)
from .qrom_bank import (
    DEFAULT_EPSILON,
    DEFAULT_SHOTS,
    FilterBank,
    bank_from_dict,
    dumps_bank,
    recognize_argmax,
    run_beam_trials,
)


def load_state_file(path: str, fmt: str | None = None) -> QuantumState:
    """Image file (PGM/CSV) through centering and embedding, or a state JSON."""
    if fmt is None:
        fmt = "state" if path.lower().endswith(".json") else None
    if fmt == "state":
        return loads_state(Path(path).read_text())
    return embed(center_and_normalize(read_image(path, fmt)))


def load_memory(path: str) -> FilterBank | OrthoMemory:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not a memory file ({exc})") from None
    if not isinstance(d, dict):
        raise InputError(f"{path}: not a memory file")
    if "filters" in d:
        return bank_from_dict(d)
    if "rotation" in d:
        return memory_from_dict(d)
    raise InputError(f"{path}: neither a filter bank nor an orthogonal memory")


def _fmt(args) -> str | None:
    return {"pgm": "pgm", "csv": "csv", "state": "state"}.get(args.format)


def cmd_encode(args, out) -> int:
    state = load_state_file(args.image, _fmt(args))
    out.write(dumps_state(state) + "\n")
    return 0


def cmd_store(args, out) -> int:
    states = [load_state_file(p, _fmt(args)) for p in args.images]
    labels = [Path(p).stem for p in args.images]
    dim = states[0].dim
    for p, s in zip(args.images, states):
        if s.dim != dim:
            raise ConsistencyError(f"{p}: dimension {s.dim} differs from {dim}")
    if args.mode == "beam":
        text = dumps_bank(FilterBank.from_states(states, labels, args.intensity))
        distortion = None
    else:
        mem = build_memory(states, labels)
        text = dumps_memory(mem)
        distortion = mem.distortion()
    Path(args.out).write_text(text)

    overlaps = [
        abs(inner(states[i], states[j]))
        for i in range(len(states))
        for j in range(i + 1, len(states))
    ]
    out.write(f"mode={args.mode} k={len(states)} dim={dim}\n")
    out.write(f"max pairwise |inner| = {max(overlaps, default=0.0):.6g}\n")
    if distortion is not None:
        for lab, f in zip(labels, distortion):
            out.write(f"  {lab}: fidelity(original, orthogonalized) = {f:.12f}\n")
    out.write(f"wrote {args.out}\n")
    return 0


def cmd_recognize(args, out, err) -> int:
    memory = load_memory(args.memory)
    query = load_state_file(args.query, _fmt(args))
    if isinstance(memory, FilterBank):
        counts = run_beam_trials(memory, query, args.shots, args.seed)
        result = recognize_argmax(counts, args.epsilon, labels=memory.labels)
        report = result.to_dict() | {
            "shots_per_arm": args.shots,
            "seed": args.seed,
            "rates": [float(r) for r in counts.rates],
        }
    else:
        probs = outcome_probabilities(query, memory)
        result = recognize_single_shot(memory, query, np.random.default_rng(args.seed))
        report = result.to_dict() | {
            "seed": args.seed,
            "probabilities": [float(p) for p in probs],
        }
    out.write(json.dumps(report, indent=1) + "\n")
    verdict = "accepted" if result.accepted else "rejected"
    err.write(
        f"{verdict}: best={result.label!r} (index {result.best_index}) "
        f"score={result.score:.6f} via {result.method}\n"
    )
    return 0


def cmd_benchmark(args, out) -> int:
    try:
        raw = json.loads(Path(args.config).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.config}: invalid JSON ({exc})") from None
    config = BenchmarkConfig.from_dict(raw)
    report = run_benchmark(config, workers=args.workers, timing=args.timing)
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "report.csv").write_text(report.to_csv())
    (outdir / "report.json").write_text(report.to_json())
    (outdir / "concentration.csv").write_text(report.concentration_csv())
    out.write(report.to_csv())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qrecog", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    fmt_help = "input format (default: from extension; .json is a state file)"

    e = sub.add_parser("encode", help="encode an image as a canonical-phase state JSON")
    e.add_argument("image")
    e.add_argument("--format", choices=["pgm", "csv", "state"], help=fmt_help)

    s = sub.add_parser("store", help="build a filter bank or orthogonal memory")
    s.add_argument("images", nargs="+")
    s.add_argument("--mode", choices=["beam", "ortho"], default="beam")
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=["pgm", "csv", "state"], help=fmt_help)
    s.add_argument("--intensity", type=float, default=1.0, help="beam input intensity I0")

    r = sub.add_parser("recognize", help="recognize a query image against a memory")
    r.add_argument("memory")
    r.add_argument("query")
    r.add_argument("--format", choices=["pgm", "csv", "state"], help=fmt_help)
    r.add_argument("--shots", type=int, default=DEFAULT_SHOTS)
    r.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    r.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("benchmark", help="run a seeded benchmark sweep")
    b.add_argument("config")
    b.add_argument("--out-dir", default=".")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument(
        "--timing", action="store_true",
        help="record wall-clock seconds per cell (output is then not reproducible)",
    )
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        if args.command == "encode":
            return cmd_encode(args, out)
        if args.command == "store":
            return cmd_store(args, out)
        if args.command == "recognize":
            return cmd_recognize(args, out, err)
        return cmd_benchmark(args, out)
    except ConsistencyError as exc:
        err.write(f"error: {exc}\n")
        return 2
    except (InputError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())

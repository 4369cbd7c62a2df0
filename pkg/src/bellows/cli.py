"""Command-line front end.

Every JSON output embeds a run manifest (command, input digests, seeds,
tolerances, versions).  Outputs contain no timestamps, so identical inputs
give identical bytes; elapsed time is reported on stderr only.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .collapse import build_hereditary_ordering, collapse_below, verify_collapse
from .errors import (
    BellowsError,
    ConstructionFailed,
    CorrectorDiverged,
    HypothesisViolated,
    NoFlexDirection,
)
from .geometry import Configuration, oriented_simplex_volume
from .gram import GramMatrix, random_low_rank_gram, select_kappa, theorem_5_1_check, verify_gap
from .polyhedra import (
    CyclePolyhedron,
    FlexTrace,
    bellows_verify,
    bricard_octahedron,
    flex_trace,
    generalized_volume,
    lengths_from_json,
    lengths_to_json,
    octahedron,
    phi_via_collapse,
    tetrahedron,
)
from .quadrature import QuadratureSpec
from .simplicial import Chain, Complex

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_IO = 1
EXIT_HYPOTHESIS = 2
EXIT_NOT_FLEXION = 3
EXIT_CHECK_FAILED = 4

_OUTPUT_KEYS = {"out", "csv", "trace_out", "func"}
# input paths are recorded by file name only; contents go in as digests
_PATH_KEYS = {"complex", "gram", "config", "poly", "lengths", "eta", "trace"}


class InputError(Exception):
    """Unreadable or malformed input file."""


class _Run:
    """Collects manifest data for one invocation."""

    def __init__(self, args):
        self.args = args
        self.inputs = []
        self.seeds = {}

    def read_json(self, path):
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from exc
        self.inputs.append({"name": os.path.basename(path), "sha256": hashlib.sha256(raw).hexdigest()})
        try:
            return json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise InputError(f"{path} is not valid JSON: {exc}") from exc

    def manifest(self, tolerances=None) -> dict:
        params = {
            k: (os.path.basename(v) if k in _PATH_KEYS and isinstance(v, str) else v)
            for k, v in sorted(vars(self.args).items())
            if k not in _OUTPUT_KEYS
        }
        return {
            "command": self.args.command,
            "parameters": params,
            "inputs": self.inputs,
            "seeds": self.seeds,
            "tolerances": tolerances or {},
            "version": __version__,
            "numpy": np.__version__,
            "schema_version": SCHEMA_VERSION,
        }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _write(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _quad(args) -> QuadratureSpec:
    method = {"laguerre": "tensor_laguerre", "mc": "monte_carlo"}.get(args.method, args.method)
    return QuadratureSpec(method=method, order=args.order, samples=args.samples, seed=args.seed, target_rel_tol=args.tol)


def _load_complex(data):
    if isinstance(data, dict) and "complex" in data:
        data = data["complex"]
    return Complex.from_json(data)


def _load_poly(run, spec):
    if spec in ("octahedron", "tetrahedron"):
        return octahedron() if spec == "octahedron" else tetrahedron()
    data = run.read_json(spec)
    if isinstance(data, list):
        xi = Chain.from_json(data)
        return CyclePolyhedron(xi, max(v for s in xi for v in s))
    return CyclePolyhedron.from_json(data)


# ------------------------------------------------------------------ commands


def cmd_collapse(args, run) -> int:
    try:
        K = _load_complex(run.read_json(args.complex))
        G = GramMatrix.from_json(run.read_json(args.gram)) if args.gram else None
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed input: {exc}") from exc
    order = build_hereditary_ordering(K, G, tie_break=args.tie_break)
    out = {"manifest": run.manifest(), "complex": K.to_json(), "r": args.r, "tie_break": args.tie_break}
    try:
        seq = collapse_below(K, order, args.r)
    except HypothesisViolated as exc:
        out["status"] = "hypothesis_violated"
        out["witness"] = [list(exc.sigma), list(exc.tau)]
        _write(args.out, dumps(out))
        print(f"hypothesis violated: {list(exc.sigma)} and {list(exc.tau)}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    check = verify_collapse(K, seq)
    out.update(
        status="ok" if check else "verification_failed",
        sequence=seq.to_json(),
        residual_dim=seq.residual.dim,
        verified=bool(check),
        ordering=order.to_json(),
    )
    _write(args.out, dumps(out))
    return EXIT_OK if check else EXIT_CHECK_FAILED


def cmd_kappa(args, run) -> int:
    try:
        G = GramMatrix.from_json(run.read_json(args.gram))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed Gram matrix: {exc}") from exc
    res = select_kappa(G, args.r)
    ok = verify_gap(G, res.log2_kappa, args.r)
    out = {"manifest": run.manifest(), "kappa": res.to_json(), "verify_gap": ok, "m": G.m}
    _write(args.out, dumps(out))
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_randgram(args, run) -> int:
    run.seeds["seed"] = args.seed
    G = random_low_rank_gram(args.m, args.rank, args.seed, mode=args.mode)
    out = G.to_json()
    out["manifest"] = run.manifest()
    _write(args.out, dumps(out))
    return EXIT_OK


def trial_seeds(seed: int, trials: int) -> list:
    """Per-trial seeds spawned from one root seed."""
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def cmd_thm51(args, run) -> int:
    if args.rank > 2 * args.r:
        print(f"error: rank {args.rank} exceeds 2r = {2 * args.r}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    seeds = trial_seeds(args.seed, args.trials)
    run.seeds = {"root": args.seed, "scheme": "SeedSequence.spawn", "trials": seeds}
    rows = []
    failures = 0
    for i, s in enumerate(seeds):
        G = random_low_rank_gram(args.m, args.rank, s, mode=args.mode)
        rep = theorem_5_1_check(G, args.r, tie_break=args.tie_break)
        verified = bool(rep.ok and verify_collapse(rep.complex, rep.sequence))
        good = rep.ok and verified and rep.residual_dim < args.r
        failures += not good
        rows.append(
            [
                i,
                s,
                repr(rep.kappa.log2_kappa),
                rep.kappa.method,
                " ".join(map(str, rep.complex.f_vector())),
                "" if rep.residual_dim is None else rep.residual_dim,
                int(rep.ok),
                int(verified),
                rep.ordering_sha256,
            ]
        )
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"# schema_version={SCHEMA_VERSION}"])
    w.writerow(["trial", "seed", "log2_kappa", "kappa_method", "f_vector", "residual_dim", "collapsed", "verified", "ordering_sha256"])
    w.writerows(rows)
    if args.csv:
        _write(args.csv, buf.getvalue())
    summary = {"manifest": run.manifest(), "trials": args.trials, "passed": args.trials - failures, "failed": failures}
    if not args.csv:
        summary["results_csv"] = buf.getvalue()
    _write(args.out, dumps(summary))
    return EXIT_OK if failures == 0 else EXIT_CHECK_FAILED


def cmd_simplex_volume(args, run) -> int:
    try:
        A = Configuration.from_json(run.read_json(args.config))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed configuration: {exc}") from exc
    quad = _quad(args)
    run.seeds["quadrature"] = args.seed
    v, err = oriented_simplex_volume(A, quad, with_error=True)
    v = complex(v)
    out = {"manifest": run.manifest(quad.to_json()), "volume": {"re": v.real, "im": v.imag}, "error": err}
    _write(args.out, dumps(out))
    return EXIT_OK


def cmd_poly_volume(args, run) -> int:
    try:
        poly = _load_poly(run, args.poly)
        A = Configuration.from_json(run.read_json(args.config))
        eta = Chain.from_json(run.read_json(args.eta)) if args.eta else None
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed input: {exc}") from exc
    quad = _quad(args)
    run.seeds["quadrature"] = args.seed
    out = {"manifest": run.manifest(quad.to_json())}
    if eta is not None:
        v, err = generalized_volume(poly, eta, A, quad, with_error=True)
        v = complex(v)
        out.update(route="chain", value={"re": v.real, "im": v.imag}, error=err)
    else:
        res = phi_via_collapse(poly, A, quad, log2_kappa=args.log2_kappa)
        out.update(route="collapse", **res.to_json())
    _write(args.out, dumps(out))
    return EXIT_OK


def _trace_outputs(args, trace: FlexTrace, run, quad):
    if args.csv:
        _write(args.csv, trace.to_csv())
    if getattr(args, "trace_out", None):
        data = trace.to_json()
        data["manifest"] = run.manifest(quad.to_json())
        _write(args.trace_out, dumps(data))


def cmd_flex(args, run) -> int:
    try:
        poly = _load_poly(run, args.poly)
        ell = lengths_from_json(run.read_json(args.lengths))
        A = Configuration.from_json(run.read_json(args.config))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed input: {exc}") from exc
    quad = _quad(args)
    try:
        trace = flex_trace(poly, ell, A, args.steps, args.h, quad)
    except NoFlexDirection as exc:
        print(f"rigid: {exc}", file=sys.stderr)
        return EXIT_NOT_FLEXION
    except CorrectorDiverged as exc:
        print(f"continuation failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    data = trace.to_json()
    data["manifest"] = run.manifest({"residual": trace.metadata["tol"], **quad.to_json()})
    _write(args.out, dumps(data))
    if args.csv:
        _write(args.csv, trace.to_csv())
    return EXIT_OK


def cmd_bellows(args, run) -> int:
    quad = _quad(args)
    if args.trace:
        try:
            trace = FlexTrace.from_json(run.read_json(args.trace))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed trace: {exc}") from exc
    else:
        run.seeds["construction"] = args.seed
        try:
            poly, ell, A = bricard_octahedron(args.space, args.scale, args.shape, args.seed)
            trace = flex_trace(poly, ell, A, args.steps, args.h, quad)
        except (NoFlexDirection, ConstructionFailed) as exc:
            print(f"no flexion: {exc}", file=sys.stderr)
            return EXIT_NOT_FLEXION
        except CorrectorDiverged as exc:
            print(f"continuation failed: {exc}", file=sys.stderr)
            return EXIT_CHECK_FAILED
        _trace_outputs(args, trace, run, quad)
    rep = bellows_verify(trace, tol=args.tol, min_flex=args.min_flex, residual_tol=args.residual_tol)
    out = {
        "manifest": run.manifest({"volume": args.tol, "residual": args.residual_tol, "min_flex": args.min_flex}),
        "report": rep.to_json(),
        "lengths": lengths_to_json(trace.ell),
    }
    _write(args.out, dumps(out))
    print(rep.caveat, file=sys.stderr)
    if not rep.is_flexion:
        print("not a flexion", file=sys.stderr)
        return EXIT_NOT_FLEXION
    return EXIT_OK if rep.passed else EXIT_CHECK_FAILED


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bellows", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, tol=1e-6):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=tol)
        sp.add_argument("--method", choices=["laguerre", "mc", "tensor_laguerre", "monte_carlo"], default="laguerre")
        sp.add_argument("--order", type=int, default=24)
        sp.add_argument("--samples", type=int, default=1_000_000)
        sp.add_argument("--out", default="-", help="output file (default: stdout)")

    s = sub.add_parser("collapse", help="collapse a complex along the Gram-driven ordering")
    s.add_argument("--complex", required=True)
    s.add_argument("--gram")
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--tie-break", choices=["lex-min", "lex-max"], default="lex-min")
    common(s)
    s.set_defaults(func=cmd_collapse)

    s = sub.add_parser("kappa", help="select a dyadic kappa for a Gram matrix")
    s.add_argument("--gram", required=True)
    s.add_argument("--r", type=int, required=True)
    common(s)
    s.set_defaults(func=cmd_kappa)

    s = sub.add_parser("thm51", help="random low-rank Gram campaign")
    s.add_argument("--m", type=int, default=10)
    s.add_argument("--rank", type=int, default=4)
    s.add_argument("--r", type=int, default=2)
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--mode", choices=["clustered", "generic"], default="clustered")
    s.add_argument("--tie-break", choices=["lex-min", "lex-max"], default="lex-min")
    s.add_argument("--csv", help="per-trial results CSV")
    common(s)
    s.set_defaults(func=cmd_thm51)

    s = sub.add_parser("simplex-volume", help="oriented volume of one simplex")
    s.add_argument("--config", required=True)
    common(s)
    s.set_defaults(func=cmd_simplex_volume)

    s = sub.add_parser("poly-volume", help="generalized volume of a cycle polyhedron")
    s.add_argument("--poly", required=True, help="JSON file, or 'octahedron' / 'tetrahedron'")
    s.add_argument("--config", required=True)
    s.add_argument("--eta", help="bounding chain JSON; omitted: collapse route")
    s.add_argument("--log2-kappa", type=float)
    common(s)
    s.set_defaults(func=cmd_poly_volume)

    s = sub.add_parser("flex", help="trace a flex of a polyhedron")
    s.add_argument("--poly", required=True)
    s.add_argument("--lengths", required=True)
    s.add_argument("--config", required=True, help="starting configuration")
    s.add_argument("--steps", type=int, default=200)
    s.add_argument("--h", type=float, default=1e-3)
    s.add_argument("--csv")
    common(s)
    s.set_defaults(func=cmd_flex)

    s = sub.add_parser("bellows", help="build, flex and check a Bricard octahedron (or check a trace)")
    s.add_argument("--trace", help="verify an existing trace JSON instead of constructing one")
    s.add_argument("--space", choices=["sphere", "hyperbolic"], default="sphere")
    s.add_argument("--scale", type=float, default=0.05)
    s.add_argument("--shape", type=float, default=0.3)
    s.add_argument("--steps", type=int, default=60)
    s.add_argument("--h", type=float, default=2e-3)
    s.add_argument("--min-flex", type=float, default=0.1)
    s.add_argument("--residual-tol", type=float, default=1e-10)
    s.add_argument("--csv", help="trace CSV output")
    s.add_argument("--trace-out", help="trace JSON output")
    common(s)
    s.set_defaults(func=cmd_bellows)

    s = sub.add_parser("randgram", help="random low-rank Gram matrix")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--rank", type=int, required=True)
    s.add_argument("--mode", choices=["clustered", "generic"], default="generic")
    common(s)
    s.set_defaults(func=cmd_randgram)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    run = _Run(args)
    start = time.perf_counter()
    try:
        code = args.func(args, run)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except BellowsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    print(f"[{args.command}] {time.perf_counter() - start:.2f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``statmfg {solve,verify,value,example,validate}``.

Exit status is 0 on success, 1 when a verification or validation check
fails and 2 on malformed input.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import library
from .ctmdp import optimal_action_sets
from .equilibrium import SearchConfig, solve, verify_equilibrium
from .errors import InvalidParams, MalformedModel, MFGError
from .model import as_distribution, validate_model
from .serialization import load_model, round_sig, save_model

EXIT_OK, EXIT_FAIL, EXIT_MALFORMED = 0, 1, 2
DIGITS = 12
_READ_TOL = 1e-9

log = logging.getLogger("statmfg")


class InputError(Exception):
    """Bad user input; reported with exit status 2."""


def _dump(data, path=None):
    text = json.dumps(round_sig(data, DIGITS), indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load(path):
    try:
        return load_model(path)
    except FileNotFoundError as exc:
        raise InputError(f"model file not found: {path}") from exc


def _workers(args) -> int:
    env = os.environ.get("MFG_THREADS")
    if env is not None:
        try:
            value = int(env)
        except ValueError as exc:
            raise InputError(f"MFG_THREADS must be a positive integer, got {env!r}") from exc
        if value < 1:
            raise InputError(f"MFG_THREADS must be a positive integer, got {env!r}")
        return value
    return args.workers


def _config(args) -> SearchConfig:
    try:
        return SearchConfig(
            grid=args.grid,
            multistart=args.multistart,
            damping=args.damping,
            tie_tol=args.tie_tol,
            tol=args.tol,
            dedup_radius=args.dedup_radius,
            seed=args.seed,
            workers=_workers(args),
        )
    except ValueError as exc:
        raise InputError(f"invalid search setting: {exc}") from exc


def _require_valid(model, path):
    report = validate_model(model)
    if not report.ok:
        raise InputError(f"{path}: model is not a conservative generator ({report.worst})")


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(args) -> int:
    model = _load(args.model)
    _require_valid(model, args.model)
    cfg = _config(args)
    result = solve(model, cfg)
    out = {
        "model": str(args.model),
        "equilibria": [c.to_record() for c in result.equilibria],
        "warnings": list(result.warnings),
        "failed_starts": len(result.failures),
    }
    _dump(out, args.output)
    n_pure, n_mixed = len(result.pure), len(result.mixed)
    print(f"{len(result.equilibria)} equilibria ({n_pure} pure, {n_mixed} mixed)", file=sys.stderr)
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def _read_records(path):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise InputError(f"equilibrium file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    records = data.get("equilibria") if isinstance(data, dict) else data
    if not isinstance(records, list):
        raise InputError(f"{path}: expected a list of records or an object with field 'equilibria'")
    return records


def cmd_verify(args) -> int:
    model = _load(args.model)
    records = _read_records(args.equilibria)
    S, A = model.shape
    failed = 0
    for n, rec in enumerate(records):
        try:
            m = np.asarray(rec["m"], dtype=float)
            pi = np.asarray(rec["pi"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"record {n}: needs numeric fields 'm' and 'pi'") from exc
        if m.shape != (S,) or pi.shape != (S, A):
            raise InputError(f"record {n}: field 'm' must have {S} entries and 'pi' shape {S}x{A}")
        # files carry 12 significant digits; undo the rounding drift of the sums
        if abs(m.sum() - 1.0) <= _READ_TOL:
            m = m / m.sum()
        rows = pi.sum(axis=1, keepdims=True)
        if np.all(np.abs(rows - 1.0) <= _READ_TOL):
            pi = pi / rows
        try:
            cert = verify_equilibrium(model, m, pi, tol=args.tol, tie_tol=args.tie_tol)
        except ValueError as exc:
            raise InputError(f"record {n}: {exc}") from exc
        status = "PASS" if cert.passed else "FAIL"
        detail = "" if cert.passed else "  " + "; ".join(cert.failures())
        print(
            f"[{status}] #{n} m={np.array2string(cert.m, precision=DIGITS)} "
            f"residual={cert.stationarity_residual:.3e} gap={cert.optimality_gap:.3e}{detail}"
        )
        failed += not cert.passed
    print(f"{len(records) - failed}/{len(records)} records verified")
    return EXIT_FAIL if failed else EXIT_OK


def _parse_vector(text: str):
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise InputError(f"--m: cannot parse {text!r} as a list of numbers") from exc


def cmd_value(args) -> int:
    model = _load(args.model)
    m = _parse_vector(args.m)
    if len(m) != model.num_states:
        raise InputError(f"--m: expected {model.num_states} entries, got {len(m)}")
    try:
        m = as_distribution(m, model.num_states)
    except ValueError as exc:
        raise InputError(f"--m: {exc}") from exc
    opt = optimal_action_sets(model, m, tie_tol=args.tie_tol)
    sets = [[model.action_label(a) for a in o] for o in opt.action_sets]
    out = {
        "m": list(m),
        "value": list(opt.value),
        "action_sets": {model.state_label(i): s for i, s in enumerate(sets)},
        "num_optimal_strategies": opt.num_optimal,
    }
    if opt.num_optimal <= args.max_list:
        out["optimal_strategies"] = [" x ".join(model.action_label(a) for a in d) for d in opt.strategies()]
    _dump(out)
    return EXIT_OK


def cmd_validate(args) -> int:
    model = _load(args.model)
    report = validate_model(model, num_samples=args.samples)
    print(report.summary())
    return EXIT_OK if report.ok else EXIT_FAIL


def _reference_record(ref) -> dict:
    return {
        "d1": ref.d1,
        "d2": ref.d2,
        "case": ref.case,
        "equilibria": [
            {"m": list(e.m), "pi": e.pi.tolist(), "kind": e.kind, "label": e.label} for e in ref.equilibria
        ],
    }


def cmd_example(args) -> int:
    try:
        if args.name == "consumer":
            p = library.ConsumerParams(
                b=args.b, epsilon=args.epsilon, beta=args.beta, c=args.c, s1=args.s1, s2=args.s2, delta=args.delta
            )
            model = library.consumer_model(p)
        else:
            p = library.CorruptionParams(b=args.b, q_inf=args.q_inf, q_soc=args.q_soc, r=args.r, beta=args.beta)
            model = library.corruption_model(p)
    except InvalidParams as exc:
        raise InputError(str(exc)) from exc
    save_model(model, args.output)
    print(f"wrote {args.output}", file=sys.stderr)
    if args.name == "consumer":
        ref_path = args.reference or str(Path(args.output).with_suffix("")) + ".reference.json"
        ref = library.consumer_reference(p)
        _dump(_reference_record(ref), ref_path)
        print(f"wrote {ref_path} (case {ref.case}, {len(ref.equilibria)} equilibria)", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_search_flags(p):
    d = SearchConfig()
    p.add_argument("--grid", type=int, default=None, help="grid subdivisions per simplex edge (default: by S)")
    p.add_argument("--multistart", type=int, default=d.multistart, help="random seeds per strategy")
    p.add_argument("--damping", type=float, default=d.damping, help="fixed-point damping in (0, 1]")
    p.add_argument("--tie-tol", type=float, default=d.tie_tol, help="relative tie band for optimal actions")
    p.add_argument("--tol", type=float, default=d.tol, help="balance tolerance of fixed points")
    p.add_argument("--dedup-radius", type=float, default=d.dedup_radius)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--workers", type=int, default=1, help="worker processes (MFG_THREADS overrides)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="statmfg", description="Stationary mean field equilibria of finite games.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="search for all equilibria")
    p.add_argument("model")
    p.add_argument("-o", "--output", default=None, help="equilibrium file (default: stdout)")
    _add_search_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="re-certify the records of an equilibrium file")
    p.add_argument("model")
    p.add_argument("equilibria")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--tie-tol", type=float, default=SearchConfig().tie_tol)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("value", help="optimal value and optimal actions at a distribution")
    p.add_argument("model")
    p.add_argument("--m", required=True, help="distribution, e.g. '0.2,0.4,0.4'")
    p.add_argument("--tie-tol", type=float, default=SearchConfig().tie_tol)
    p.add_argument("--max-list", type=int, default=64, help="list D(m) explicitly up to this size")
    p.set_defaults(func=cmd_value)

    p = sub.add_parser("validate", help="check rates for conservativeness on sample points")
    p.add_argument("model")
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("example", help="write a built-in model")
    ex = p.add_subparsers(dest="name", required=True)
    c = ex.add_parser("consumer")
    dc = library.ConsumerParams()
    for name in ("b", "epsilon", "beta", "c", "s1", "s2", "delta"):
        c.add_argument(f"--{name}", type=float, default=getattr(dc, name))
    c.add_argument("-o", "--output", default="consumer.json")
    c.add_argument("--reference", default=None, help="reference file (default: <output>.reference.json)")
    c.set_defaults(func=cmd_example)
    k = ex.add_parser("corruption")
    dk = library.CorruptionParams()
    for name in ("b", "q_inf", "q_soc", "r", "beta"):
        k.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float, default=getattr(dk, name))
    k.add_argument("-o", "--output", default="corruption.json")
    k.set_defaults(func=cmd_example)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (InputError, MalformedModel) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except MFGError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

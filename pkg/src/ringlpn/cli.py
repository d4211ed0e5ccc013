"""Command-line entry point: ``ringlpn <subcommand> ...``.

Every subcommand writes JSON-lines records (one per stage) to stdout or
``--output``; ``--pretty`` renders the same records as aligned text.
Factor numbers on the command line are 1-based (``--factor 1`` is f1).

Exit codes: 0 success, 2 invalid input, 3 inconclusive attack.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import warnings
from fractions import Fraction
from pathlib import Path

from . import complexity
from .attack import (
    AttackParams,
    attack_generic,
    attack_improved,
    decision_threshold,
    improved_min_k,
)
from .crtcode import best_known_relation, build_generator, gv_bound, row_weights
from .errors import RingLpnError
from .gf2poly import clmul, format_poly, pmod
from .lapin import (
    DEFAULT_ETA_PRIME,
    DEFAULT_LAMBDA,
    eavesdrop,
    effective_secret,
    generate_keys,
    reader_verify,
)
from .oracle import (
    DEFAULT_MEMORY_BUDGET,
    NoiseSpec,
    batch,
    make_oracle,
    read_samples,
    write_samples,
)
from .recovery import auto_params, default_schedule, full_recover
from .ring import load_ring

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INCONCLUSIVE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ----------------------------------------------------------------------
# output


class Emitter:
    def __init__(self, stream, pretty: bool):
        self.stream = stream
        self.pretty = pretty

    def __call__(self, record: dict) -> None:
        if self.pretty:
            self.stream.write(_render(record) + "\n")
        else:
            self.stream.write(json.dumps(record, sort_keys=True, default=str) + "\n")


def _render(record: dict, indent: int = 0) -> str:
    pad = " " * indent
    width = max((len(str(k)) for k in record), default=0)
    lines = []
    for key, val in record.items():
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.append(_render(val, indent + 2))
        elif isinstance(val, list) and val and all(isinstance(x, dict) for x in val):
            lines.append(f"{pad}{key}:")
            lines.extend(_table(val, indent + 2))
        else:
            lines.append(f"{pad}{str(key).ljust(width)}  {val}")
    return "\n".join(lines)


def _table(rows: list[dict], indent: int) -> list[str]:
    cols = list(dict.fromkeys(k for r in rows for k in r if not isinstance(r[k], (dict, list))))
    cells = [[str(r.get(c, "")) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    pad = " " * indent
    out = [pad + "  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    out += [pad + "  ".join(x.ljust(w) for x, w in zip(row, widths)) for row in cells]
    return out


# ----------------------------------------------------------------------
# argument helpers


def _noise(text: str) -> NoiseSpec:
    try:
        return NoiseSpec.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"--eta: {exc}") from None


def _ring(args):
    source = args.preset or args.ring
    if source is None:
        raise UsageError("give a ring with --ring FILE|PRESET or --preset NAME")
    return load_ring(source)


def _factor(ring, number: int) -> int:
    n = len(ring.factors)
    if not 1 <= number <= n:
        raise UsageError(f"factor must be between 1 and {n}, got {number}")
    return number - 1


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("RLPN_SEED")
    if env is None:
        return 0
    try:
        return int(env, 0)
    except ValueError:
        raise UsageError(f"RLPN_SEED must be an integer, got {env!r}") from None


def _config(args, seed: int) -> dict:
    skip = {"func", "pretty", "output"}
    cfg = {k: v for k, v in vars(args).items() if k not in skip}
    cfg["seed"] = seed
    return {"record": "config", **cfg}


# ----------------------------------------------------------------------
# subcommands


def cmd_analyze(args, emit) -> int:
    ring = _ring(args)
    t = ring.degree
    which = range(len(ring.factors)) if args.factor is None else [_factor(ring, args.factor)]
    eps = _noise(args.eta).epsilon
    for i in which:
        fi = ring.factors[i]
        code = build_generator(fi, t)
        weights = row_weights(code)
        lightest = min(weights)
        rel = best_known_relation(code, args.isd_iterations, _seed(args))
        d = rel.weight
        rec = {
            "record": "factor",
            "factor": i + 1,
            "polynomial": format_poly(fi),
            "l": code.l,
            "t": t,
            "row0_weight": weights[0],
            "last_row_weight": weights[-1],
            "min_row_weight": lightest,
            "min_weight_rows": [j for j, w in enumerate(weights) if w == lightest],
            "last_row_is_lightest": weights[-1] == lightest,
            "best_relation_weight": d,
            "gv_bound": gv_bound(t, code.l),
            "improved_min_k": improved_min_k(code),
            "epsilon": str(eps),
        }
        if eps > 0:
            rec["log2_bias"] = d * complexity.log2(eps)
            rec["log2_required_samples"] = complexity.log2(complexity.required_samples(eps, d))
        if args.rows:
            rec["row_weights"] = weights
        emit(rec)
    return EXIT_OK


def cmd_tables(args, emit) -> int:
    ring = load_ring(args.preset or args.ring or "lapin-621")
    report = complexity.reproduce_tables(ring)
    emit({"record": "table_ii", "rows": report["table_ii"]})
    emit({"record": "table_i", "rows": report["table_i"]})
    emit({"record": "aggregate", **report["aggregate"]})
    return EXIT_OK


def _attack_params(args, code, noise) -> AttackParams:
    if args.relation == "last":
        rel = code.last_row()
    else:
        rel = best_known_relation(code, args.isd_iterations, _seed(args))
    k = args.k if args.k is not None else improved_min_k(code)
    return AttackParams(k, 1 << args.log2_n, rel, noise)


def cmd_attack(args, emit) -> int:
    ring = _ring(args)
    seed = _seed(args)
    emit(_config(args, seed))
    noise = _noise(args.eta)
    fi = _factor(ring, args.factor_index)
    code = build_generator(ring.factors[fi], ring.degree)
    if args.mode in ("improved", "decision") and args.relation != "last":
        raise UsageError("the improved pipeline always uses --relation last")
    params = _attack_params(args, code, noise)
    truth = None
    if args.load:
        samples, header = read_samples(args.load, ring)
        emit({"record": "load", "path": args.load, **header})
    else:
        oracle = make_oracle(
            ring, noise, seed, mode=args.oracle, memory_budget=args.memory_budget
        )
        samples = batch(oracle, params.N, args.threads)
        if args.oracle == "real":
            truth = pmod(oracle.secret.bits, code.f1.bits)
    if args.dump:
        write_samples(args.dump, samples, ring.degree, seed)
        emit({"record": "dump", "path": args.dump, "count": len(samples)})
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if args.mode == "generic":
            res = attack_generic(samples, params, code, args.target, truth)
        elif args.mode == "improved":
            res = attack_improved(samples, params, code, truth)
        else:
            res = attack_improved(samples, params, code, validate=False)
    for w in caught:
        emit({"record": "warning", "message": str(w.message)})
    out = {"record": "attack", "mode": args.mode, "factor": fi + 1, "k": params.k,
           "relation_weight": params.relation.weight, **res.to_json()}
    if args.mode == "decision":
        thr = decision_threshold(res.samples_used, noise.epsilon, params.relation.weight, res.dims)
        out["threshold"] = thr
        out["real"] = res.score > thr
        emit(out)
        return EXIT_OK
    emit(out)
    return EXIT_OK if res.conclusive else EXIT_INCONCLUSIVE


def _load_params(path: str, ring, noise) -> dict[int, AttackParams]:
    raw = json.loads(Path(path).read_text())
    params = {}
    for key, block in raw.items():
        i = _factor(ring, int(key))
        code = build_generator(ring.factors[i], ring.degree)
        k = int(block.get("k", improved_min_k(code)))
        params[i] = AttackParams(k, 1 << int(block.get("log2_n", 12)), code.last_row(), noise)
    return params


def cmd_recover(args, emit) -> int:
    ring = _ring(args)
    seed = _seed(args)
    emit(_config(args, seed))
    noise = _noise(args.eta)
    n = len(ring.factors)
    if args.params:
        params = _load_params(args.params, ring, noise)
    else:
        # by default attack all but the last factor directly
        params = {i: auto_params(ring, i, noise, args.log2_n) for i in range(n - 1)}
    if args.schedule:
        try:
            schedule = [_factor(ring, int(x)) for x in args.schedule.split(",")]
        except ValueError:
            raise UsageError("--schedule must be comma-separated factor numbers") from None
    else:
        schedule = default_schedule(ring, params)
    oracle = make_oracle(ring, noise, seed, memory_budget=args.memory_budget)
    res = full_recover(oracle, schedule, params, args.tail_samples, args.threads)
    for st in res.stages:
        emit({"record": "stage", **st})
    emit({"record": "recover", **res.to_json()})
    return EXIT_OK if res.verified else EXIT_INCONCLUSIVE


def cmd_simulate(args, emit) -> int:
    ring = _ring(args)
    seed = _seed(args)
    emit(_config(args, seed))
    noise = _noise(args.eta)
    try:
        eta_prime = Fraction(args.eta_prime)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--eta-prime: cannot parse {args.eta_prime!r}") from None
    if not noise.eta < eta_prime < Fraction(1, 2):
        raise UsageError("need eta < eta' < 1/2")
    lam = min(DEFAULT_LAMBDA, ring.degree) if args.lam is None else args.lam
    if lam > ring.degree:
        raise UsageError(f"--lambda {lam} exceeds deg f = {ring.degree}")
    fixed = None
    if args.fixed_challenge is not None:
        try:
            fixed = int(args.fixed_challenge, 0)
        except ValueError:
            raise UsageError("--fixed-challenge must be an integer (0x.. allowed)") from None
    keys = generate_keys(ring, seed)
    transcripts = eavesdrop(keys, noise, args.runs, seed, fixed, lam)
    accepted = sum(reader_verify(keys, tr.c, tr.r, tr.z, eta_prime, lam) for tr in transcripts)
    rec = {
        "record": "simulate",
        "runs": args.runs,
        "accepted": accepted,
        "acceptance_rate": accepted / args.runs,
        "lambda": lam,
        "eta_prime": str(eta_prime),
    }
    if args.dump:
        write_samples(args.dump, [tr.as_sample() for tr in transcripts], ring.degree, seed)
        side = Path(str(args.dump) + ".challenge.json")
        side.write_text(
            json.dumps(
                {
                    "lambda": lam,
                    "fixed": fixed is not None,
                    "challenges": [hex(tr.c) for tr in transcripts] if fixed is None else [hex(fixed)],
                },
                indent=1,
            )
        )
        rec["dump"] = args.dump
        rec["sidecar"] = str(side)
    if fixed is not None:
        rec["effective_secret"] = str(effective_secret(keys, fixed, lam))
    emit(rec)
    return EXIT_OK


def cmd_bench(args, emit) -> int:
    import numpy as np

    from .attack import fwht

    ring = _ring(args)
    seed = _seed(args)
    oracle = make_oracle(ring, NoiseSpec(Fraction(1, 8)), seed)
    f = ring.modulus.bits
    a, b = ring.random_bits(np.random.default_rng(seed)), oracle.secret.bits

    def timed(fn, reps):
        t0 = time.perf_counter()
        for _ in range(reps):
            fn()
        return (time.perf_counter() - t0) / reps

    table = np.arange(1 << 16, dtype=np.int64)
    emit(
        {
            "record": "bench",
            "ring": ring.name,
            "t": ring.degree,
            "mulmod_us": 1e6 * timed(lambda: pmod(clmul(a, b), f), args.reps),
            "sample_us": 1e6 * timed(lambda: batch(oracle, 1), args.reps),
            "fwht16_ms": 1e3 * timed(lambda: fwht(table), max(1, args.reps // 100)),
            "threads": args.threads,
        }
    )
    return EXIT_OK


# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ringlpn", description="CRT attacks on reducible Ring-LPN.")
    common = _Parser(add_help=False)
    common.add_argument("--ring", help="ring JSON file or preset name")
    common.add_argument("--preset", help="shipped preset name")
    common.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                        help="64-bit seed (falls back to $RLPN_SEED, then 0)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--memory-budget", type=int, default=DEFAULT_MEMORY_BUDGET)
    common.add_argument("--output", help="write records here instead of stdout")
    common.add_argument("--pretty", action="store_true", help="aligned text instead of JSON")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", parents=[common], help="per-factor code report")
    a.add_argument("--factor", type=int)
    a.add_argument("--eta", default="1/6")
    a.add_argument("--isd-iterations", type=int, default=0)
    a.add_argument("--rows", action="store_true", help="include every row weight")
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("tables", parents=[common], help="cost tables for the Lapin ring")
    t.set_defaults(func=cmd_tables)

    k = sub.add_parser("attack", parents=[common], help="recover bits of s mod f_i")
    k.add_argument("--factor-index", type=int, default=1)
    k.add_argument("--eta", default="1/20")
    k.add_argument("--k", type=int)
    k.add_argument("--log2-n", type=int, default=12)
    k.add_argument("--mode", choices=("generic", "improved", "decision"), default="improved")
    k.add_argument("--target", choices=("low", "high"), default="low")
    k.add_argument("--relation", choices=("last", "best"), default="last")
    k.add_argument("--isd-iterations", type=int, default=0)
    k.add_argument("--oracle", choices=("real", "uniform"), default="real")
    k.add_argument("--dump", help="write the samples used to this file")
    k.add_argument("--load", help="attack samples from a dump instead of an oracle")
    k.set_defaults(func=cmd_attack)

    r = sub.add_parser("recover", parents=[common], help="staged full-key recovery")
    r.add_argument("--eta", default="1/20")
    r.add_argument("--schedule", help="comma-separated factor order, e.g. 2,1,3")
    r.add_argument("--params", help='JSON {"1": {"k": 11, "log2_n": 12}, ...}')
    r.add_argument("--log2-n", type=int, default=12)
    r.add_argument("--tail-samples", type=int, default=64)
    r.set_defaults(func=cmd_recover)

    s = sub.add_parser("simulate", parents=[common], help="run the Lapin protocol")
    s.add_argument("--eta", default="1/6")
    s.add_argument("--eta-prime", default=str(DEFAULT_ETA_PRIME))
    s.add_argument("--runs", type=int, default=1000)
    s.add_argument("--lambda", dest="lam", type=int, default=None,
                   help=f"challenge bits (default {DEFAULT_LAMBDA}, capped at deg f)")
    s.add_argument("--fixed-challenge")
    s.add_argument("--dump", help="write transcripts as a sample dump")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bench", parents=[common], help="micro-benchmarks")
    b.add_argument("--reps", type=int, default=1000)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"ringlpn: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    stream = open(args.output, "w") if args.output else sys.stdout
    try:
        return args.func(args, Emitter(stream, args.pretty))
    except (UsageError, RingLpnError, ValueError, MemoryError, OSError) as exc:
        print(f"ringlpn: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    finally:
        if stream is not sys.stdout:
            stream.close()


if __name__ == "__main__":
    sys.exit(main())

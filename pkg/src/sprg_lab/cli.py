"""Command line front end: ``sprg-lab {gen,verify,stats,drg-eval,params}``.

Exit codes: 0 pass, 1 verification failure, 2 usage or parameter error,
3 I/O or parse error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

from . import analysis, codec, drg, local_prg
from .errors import ParameterError, SerializationError
from .local_prg import NonExpandingWarning
from .rng import Streams
from .sprg import SprgParams, id_samp_prime, sd_samp_prime
from .verify import SCHEMA, Transcript, transcript_json, verify
from .zp import sample_prime

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

DEFAULTS = {
    "n": 64, "m": None, "tau": 1.5, "d": None, "delta": 0.5, "lambda": 16, "t_slack": None,
    "prime_bits": 31, "predicate": None, "rng_seed": 0, "trials": 1000, "keep_debug": False,
    "jobs": 1, "out": None, "rate": None,
}


class IOFailure(Exception):
    pass


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with parameter values; flags override it")
    p.add_argument("--n", type=int, help="PRG seed length")
    p.add_argument("--m", type=int, help="PRG output length (default ceil(n^tau))")
    p.add_argument("--tau", type=float, help="stretch exponent used when --m is absent")
    p.add_argument("--d", type=int, help="multilinear degree; picks xor<d> unless --predicate is set")
    p.add_argument("--predicate", help=f"one of {sorted(local_prg.NAMED_PREDICATES)} or LOCALITY:HEX")
    p.add_argument("--delta", type=float, help="LPN noise exponent in (0, 1)")
    p.add_argument("--lambda", dest="lambda_", type=int, help="security parameter")
    p.add_argument("--t-slack", type=int, help="bucket slack t (default lambda)")
    p.add_argument("--prime-bits", type=int, help="bit length of the modulus")
    p.add_argument("--rng-seed", type=int, help="64-bit root seed")
    p.add_argument("--rate", type=float, help="override the noise rate (default ell^-delta)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sprg-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample an index and a seed")
    _add_param_flags(p)
    p.add_argument("--keep-debug", action="store_true", default=None, help="also write transcript.json")
    p.add_argument("--out", help="output directory")

    p = sub.add_parser("verify", help="check an index/seed pair")
    p.add_argument("--index", required=True)
    p.add_argument("--seed", required=True)
    p.add_argument("--transcript", help="transcript.json from gen --keep-debug")
    p.add_argument("--expand", action="store_true", help="certify degrees on materialized forms")
    p.add_argument("--out", help="write the JSON report here")

    p = sub.add_parser("stats", help="flag-probability experiment")
    _add_param_flags(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out", help="write the JSON report here")

    p = sub.add_parser("drg-eval", help="evaluate the packed generator on an index/seed pair")
    p.add_argument("--index", required=True)
    p.add_argument("--seed", required=True)
    p.add_argument("--bound", type=int, required=True, help="perturbation bound B")
    p.add_argument("--tau-prime", type=float, required=True)
    p.add_argument("--trials", type=int, default=0, help="fresh seeds pooled for the smudging report")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON report here")

    p = sub.add_parser("params", help="derived parameters and seed-length accounting")
    _add_param_flags(p)
    p.add_argument("--out", help="write the JSON report here")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            cfg.update(json.loads(Path(args.config).read_text()))
        except OSError as exc:
            raise IOFailure(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise IOFailure(f"config is not valid JSON: {exc}") from None
    flags = vars(args)
    for key in DEFAULTS:
        val = flags.get("lambda_" if key == "lambda" else key)
        if val is not None:
            cfg[key] = val
    return cfg


def resolve_predicate(cfg: dict) -> local_prg.Predicate:
    choice, d = cfg.get("predicate"), cfg.get("d")
    if choice is None:
        pred = local_prg.predicate_by_name(f"xor{d}" if d and d > 1 else ("id" if d == 1 else "xor-and"))
    elif ":" in choice:
        k, table = choice.split(":", 1)
        pred = local_prg.Predicate.from_hex(int(k), table)
    else:
        pred = local_prg.predicate_by_name(choice)
    if d is not None and pred.degree != d:
        raise ParameterError(f"predicate {choice!r} has degree {pred.degree}, but d={d} was requested", field="d")
    return pred


def build_params(cfg: dict) -> SprgParams:
    streams = Streams(int(cfg["rng_seed"]))
    n = int(cfg["n"])
    if not 0.0 < float(cfg["delta"]) < 1.0:
        raise ParameterError(f"delta must be in (0, 1), got {cfg['delta']}", field="delta")
    m = int(cfg["m"]) if cfg.get("m") is not None else math.ceil(n ** float(cfg["tau"]))
    p = sample_prime(int(cfg["prime_bits"]), streams.rng("prime"))
    return SprgParams.derive(lam=int(cfg["lambda"]), n=n, m=m, delta=float(cfg["delta"]), p=p,
                             predicate=resolve_predicate(cfg), t=cfg.get("t_slack"),
                             rate=cfg.get("rate"))


def _config_record(cfg: dict) -> dict:
    return {k: cfg[k] for k in sorted(cfg) if k not in ("out", "config")}


def _dump(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise IOFailure(f"cannot write {out}: {exc}") from None
    else:
        sys.stdout.write(text)


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from None


def load_pair(index_path: str, seed_path: str):
    index = codec.deserialize_index(_read(index_path))
    seed, fld = codec.deserialize_seed(_read(seed_path))
    if fld != index.field:
        raise SerializationError("seed modulus differs from index modulus", 6)
    return index, seed


def cmd_gen(args) -> int:
    cfg = resolve_config(args)
    params = build_params(cfg)
    streams = Streams(int(cfg["rng_seed"]))
    index = id_samp_prime(params, streams.rng("index"))
    seed = sd_samp_prime(index, streams.rng("seed"), keep_debug=bool(cfg["keep_debug"]))
    out = Path(cfg["out"] or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "index.bin").write_bytes(codec.serialize_index(index))
        (out / "seed.bin").write_bytes(codec.serialize_seed(seed, params.p))
    except OSError as exc:
        raise IOFailure(f"cannot write artifacts: {exc}") from None
    record = {"schema": SCHEMA, "rng_seed": int(cfg["rng_seed"]), "config": _config_record(cfg),
              "params": params.to_json(), "flag": seed.flag}
    _dump(record, str(out / "run.json"))
    if cfg["keep_debug"]:
        _dump(transcript_json(index, seed, int(cfg["rng_seed"]), _config_record(cfg)), str(out / "transcript.json"))
    return EXIT_OK


def cmd_verify(args) -> int:
    index, seed = load_pair(args.index, args.seed)
    transcript = None
    if args.transcript:
        try:
            transcript = Transcript.from_json(json.loads(_read(args.transcript)), index)
        except (json.JSONDecodeError, KeyError) as exc:
            raise IOFailure(f"unreadable transcript: {exc}") from None
    report = verify(index, seed, transcript, expand_degree=args.expand)
    _dump(report.to_json(), args.out)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_stats(args) -> int:
    cfg = resolve_config(args)
    params = build_params(cfg)
    trials = int(cfg["trials"])
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}", field="trials")
    streams = Streams(int(cfg["rng_seed"]))
    est = analysis.estimate_flag_rate(params, trials, streams.rng("trials"), jobs=int(cfg["jobs"]))
    check = analysis.check_stretch(params)
    report = {
        "schema": SCHEMA,
        "rng_seed": int(cfg["rng_seed"]),
        "config": _config_record(cfg),
        "params": params.to_json(),
        "bits": check.report.to_json(),
        "margins": {"ok": check.ok, "margin": check.margin, "caveat": check.caveat,
                    "tau": check.tau, "s2_exponent": check.s2_exponent},
        "expected_bad": {"union_bound": analysis.expected_bad(params),
                         "exact": analysis.exact_expected_bad(params),
                         "markov_bound": analysis.markov_bound(params)},
        **est.to_json(),
    }
    _dump(report, cfg["out"])
    return EXIT_OK


def cmd_drg_eval(args) -> int:
    index, seed = load_pair(args.index, args.seed)
    dindex = drg.DrgIndex(index, drg.DrgParams.derive(index.params.lam, index.params.n, args.bound, args.tau_prime))
    y = drg.drg_eval(dindex, seed)
    report = {"schema": SCHEMA, "params": dindex.params.to_json(), "zeroized": dindex.zeroized,
              "y": [int(v) for v in y], "rng_seed": args.rng_seed}
    if args.trials > 0:
        rngs = Streams(args.rng_seed).trial_rngs("drg", args.trials)
        report["smudging"] = drg.smudging_report(dindex, rngs)
    _dump(report, args.out)
    return EXIT_OK


def cmd_params(args) -> int:
    cfg = resolve_config(args)
    params = build_params(cfg)
    check = analysis.check_stretch(params)
    _dump({"schema": SCHEMA, "rng_seed": int(cfg["rng_seed"]), "params": params.to_json(),
           "stretch": check.to_json()}, cfg["out"])
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "verify": cmd_verify, "stats": cmd_stats, "drg-eval": cmd_drg_eval, "params": cmd_params}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    warnings.simplefilter("ignore", NonExpandingWarning)
    try:
        return COMMANDS[args.command](args)
    except ParameterError as exc:
        name = f" '{exc.field}'" if exc.field else ""
        print(f"sprg-lab: parameter error{name}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SerializationError as exc:
        print(f"sprg-lab: parse error: {exc}", file=sys.stderr)
        return EXIT_IO
    except IOFailure as exc:
        print(f"sprg-lab: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

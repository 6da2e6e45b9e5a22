"""Command-line driver: ``dpsep {capacity,region,counterexample,simulate,audit}``.

Exit codes: 0 success, 2 parse error, 3 solver failure, 4 check failure.
Outputs go to ``--out`` (or the config's ``output_path``, or stdout).
JSON is written with a fixed key order and two-space indent; CSV files
use a header row, ``,`` separators and ``\\n`` line ends.

Randomness: every command derives its streams from the single ``seed``.
Monte Carlo draws come from ``numpy.random.default_rng(seed)``; shared
streams for channel synthesis are seeded from that generator, and the
assumption checks spawn one child ``SeedSequence`` per trial.
"""

import argparse
import json
import math
import sys

import numpy as np

from .config import ConfigError, ExperimentConfig, load, with_overrides
from .perception import check_continuity, check_convexity_d1, check_subdecomposable
from .probcore import EnumerationCapError, _probs, binary_entropy, bsc, uniform
from .rdp import SolverError, capacity_ba, nocr_perfect_realism_D, points_sidecar, points_to_csv, region_boundary
from .schemes import (
    BitPipeScheme,
    KappaError,
    NonEnumerableError,
    concatenate,
    converse_audit,
    cr_synthesis_scheme,
    dithered_quantizer_code,
    evaluate_exact,
    evaluate_mc,
    quantize_restore_scheme,
    quantizer_code,
    separated_pipeline,
    uncoded_scheme,
    zero_rate_realism_scheme,
)
from .schemes.base import _plain
from .schemes.concat import ConcatScheme

EXIT_OK, EXIT_PARSE, EXIT_SOLVER, EXIT_CHECK = 0, 2, 3, 4


class CheckFailed(RuntimeError):
    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


def dumps(obj):
    return json.dumps(_plain(obj), indent=2) + "\n"


# ---------------------------------------------------------------------------
# scheme construction from a config
# ---------------------------------------------------------------------------

def build_scheme(cfg, name=None, n=None):
    name = name or cfg.scheme
    n = cfg.n if n is None else n
    src = cfg.source_dist()
    ch = cfg.channel_obj()
    C, _ = capacity_ba(ch)
    d = cfg.distortion_obj()
    if name == "uncoded":
        return uncoded_scheme(n, len(cfg.source), cfg.kappa)
    if name == "zero_rate":
        return zero_rate_realism_scheme(src, n, cfg.kappa)
    if name == "quantize_restore":
        return quantize_restore_scheme(src, cfg.scheme_R, n, cfg.seed, C, cfg.kappa, d, cfg.scheme_p_budget)
    if name == "cr_synthesis":
        if len(cfg.source) != 2:
            raise ConfigError("cr_synthesis from the config uses a BSC test channel (binary sources)")
        return cr_synthesis_scheme(bsc(cfg.scheme_test_p), src, n, cfg.seed, cfg.kappa)
    if name == "separated":
        if cfg.scheme_code == "dithered":
            code = dithered_quantizer_code(src, cfg.scheme_R, n, cfg.seed, d)
        else:
            code = quantizer_code(src, cfg.scheme_R, n, cfg.seed, d, entropy_coded=True, p_budget=cfg.scheme_p_budget)
        return separated_pipeline(code, cfg.kappa, C, cfg.scheme_eps_R, cfg.scheme_delta_R, cfg.scheme_err_inject, cfg.k, cfg.seed)
    if name == "concat":
        return ConcatScheme([(build_scheme(cfg, part, n), c) for part, c in cfg.parts()], cfg.kappa)
    raise ConfigError(f"unknown scheme {name!r}")


def run_evaluation(cfg, scheme, trace_path=None):
    ch, src, f, d = cfg.channel_obj(), cfg.source_dist(), cfg.perception_obj(), cfg.distortion_obj()
    if cfg.scheme_mode in ("auto", "exact") and trace_path is None:
        try:
            return evaluate_exact(scheme, ch, src, f, d)
        except (NonEnumerableError, EnumerationCapError):
            if cfg.scheme_mode == "exact":
                raise
    return evaluate_mc(scheme, ch, src, f, d, cfg.trials, cfg.seed, trace_path)


# ---------------------------------------------------------------------------
# commands: each returns (document text, extra files dict, exit code)
# ---------------------------------------------------------------------------

def cmd_capacity(cfg):
    C, law = capacity_ba(cfg.channel_obj())
    return dumps({"C": C, "input_dist": law.probs.tolist()}), {}, EXIT_OK


def cmd_region(cfg):
    pts = region_boundary(
        cfg.source_dist(), cfg.distortion_obj(), cfg.perception_obj(), cfg.kappa, cfg.channel_obj(),
        cfg.region_points, cfg.solver(),
    )
    pts = sorted(pts, key=lambda p: p.P)
    failed = any(not math.isfinite(p.D) for p in pts)
    return points_to_csv(pts), {".witness.json": points_sidecar(pts) + "\n"}, EXIT_SOLVER if failed else EXIT_OK


def cmd_counterexample(cfg):
    if cfg.channel != "bsc":
        raise ConfigError("counterexample needs channel = bsc")
    p = cfg.channel_p
    if not 0.0 < p < 0.5:
        raise ConfigError(f"crossover must lie in (0, 1/2), got {p}")
    if len(cfg.source) != 2:
        raise ConfigError("counterexample uses a binary source")
    src = uniform(2)
    f, d = cfg.perception_obj(), cfg.distortion_obj()
    rep = evaluate_exact(uncoded_scheme(cfg.n), cfg.channel_obj(), src, f, d)
    R = 1.0 - binary_entropy(p)
    pt = nocr_perfect_realism_D(src, d, R, cfg.solver())
    enc, rest = pt.witness
    out_law = (_probs(src) @ enc.matrix) @ rest.matrix
    doc = {
        "p": p,
        "R": R,
        "uncoded": {"D": rep.D_hat, "P": rep.P_strong},
        "separate_nocr": {"D": pt.D, "P": f.d1(src, out_law)},
        "closed_form": {"uncoded": p, "separate": 2.0 * p * (1.0 - p)},
        "gap": pt.D - rep.D_hat,
    }
    code = EXIT_OK if doc["gap"] > 0 else EXIT_CHECK
    return dumps(doc), {}, code


def cmd_simulate(cfg, trace_path=None):
    scheme = build_scheme(cfg)
    rep = run_evaluation(cfg, scheme, trace_path)
    doc = rep.to_record()
    doc["config_scheme"] = scheme.describe()
    doc["rate_meta"] = scheme.rate_meta
    return dumps(doc), {}, EXIT_OK


def cmd_audit(cfg, family=None):
    f = family or cfg.perception_obj()
    k = len(cfg.source)
    checks = []
    if f.supports_block:
        checks.append(check_subdecomposable(f, cfg.check_trials, cfg.seed, k).to_record())
    else:
        checks.append({"family": f.name, "assumption": "sub-decomposability", "skipped": "family is single-letter only"})
    checks.append(check_continuity(f, cfg.check_trials, cfg.seed, k).to_record())
    checks.append(check_convexity_d1(f, cfg.check_trials, cfg.seed, k).to_record())
    try:
        scheme = build_scheme(cfg)
        conv = converse_audit(scheme, cfg.channel_obj(), cfg.source_dist())
    except KappaError as exc:
        conv = {"scheme": cfg.scheme, "build": "rejected", "error": str(exc), "pass": False}
    ok = all(c.get("pass", True) for c in checks) and conv["pass"]
    doc = {"checks": checks, "converse": conv, "pass": ok}
    return dumps(doc), {}, EXIT_OK if ok else EXIT_CHECK


COMMANDS = {
    "capacity": cmd_capacity,
    "region": cmd_region,
    "counterexample": cmd_counterexample,
    "simulate": cmd_simulate,
    "audit": cmd_audit,
}


def make_parser():
    ap = argparse.ArgumentParser(prog="dpsep", description="Distortion-perception source-channel experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat key = value config file (defaults if omitted)")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", help="output path (default: config output_path, else stdout)")
        sp.add_argument("--trials", type=int, help="override the config trial count")
        if name == "simulate":
            sp.add_argument("--trace", help="also write a per-trial CSV trace (forces Monte Carlo)")
    return ap


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        cfg = load(args.config) if args.config else ExperimentConfig()
        cfg = with_overrides(cfg, seed=args.seed, trials=args.trials)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        if args.command == "simulate":
            text, extra, code = cmd_simulate(cfg, getattr(args, "trace", None))
        else:
            text, extra, code = COMMANDS[args.command](cfg)
    except (ConfigError, KappaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SolverError, EnumerationCapError, NonEnumerableError, RuntimeError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    out = args.out or cfg.output_path
    if out:
        _write(out, text)
        for suffix, body in extra.items():
            _write(out + suffix, body)
    else:
        sys.stdout.write(text)
        for body in extra.values():
            sys.stdout.write(body)
    if code == EXIT_CHECK:
        print("check failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())

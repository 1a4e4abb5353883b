"""Command-line entry point exposing every verification and sweep.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
Every randomized subcommand requires an explicit --seed so reruns are
byte-identical; runs that write files also emit a ``<out>.manifest.json``
describing the invocation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bell import (
    OPTIMAL_ALICE_ANGLES,
    OPTIMAL_BOB_ANGLES,
    ShiftedChshParams,
    random_projective_devices,
    s_grid,
    verify_operator_inequality,
    werner_state,
)
from .extractor import SearchExhausted, search_extractor, write_certificate, write_table, xor_table
from .protocol import HonestDeviceModel, ProtocolConfig, mbit_table_for, run_protocol
from .quantum import load_fixture, random_tripartite_state, verify_bound
from .rates import min_chsh_curve, min_chsh_csv, rate_curves, rates_csv

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2

SQRT8 = 2.0 * np.sqrt(2.0)


class UsageError(Exception):
    pass


def _write_manifest(out_path: Path, subcommand: str, parameters: dict, seed: int | None) -> None:
    manifest = {
        "subcommand": subcommand,
        "parameters": parameters,
        "seed": seed,
        "outputPaths": [str(out_path)],
        "toolVersion": __version__,
    }
    Path(str(out_path) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _emit(report: dict, out: str | None, subcommand: str, parameters: dict, seed: int | None) -> None:
    text = json.dumps(report, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
        _write_manifest(Path(out), subcommand, parameters, seed)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_verify_inequality(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    if args.s_grid < 2:
        raise UsageError("--s-grid must be at least 2")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed)))
    grid = s_grid(args.s_grid)
    worst = np.inf
    failures = 0
    for _ in range(args.trials):
        devices = random_projective_devices(rng)
        for s in grid:
            report = verify_operator_inequality(ShiftedChshParams(float(s)), devices)
            worst = min(worst, report["minEig_plus"], report["minEig_minus"])
            if not report["pass"]:
                failures += 1
    report = {
        "trials": args.trials,
        "sGridPoints": args.s_grid,
        "checks": args.trials * args.s_grid,
        "failures": failures,
        "worstMinEig": worst,
        "pass": failures == 0,
    }
    params = {"trials": args.trials, "s_grid": args.s_grid}
    _emit(report, args.out, "verify-inequality", params, args.seed)
    return EXIT_OK if failures == 0 else EXIT_VERIFICATION_FAILED


def _cmd_find_extractor(args) -> int:
    if args.n <= 5:
        raise UsageError("--n must exceed 5")
    if args.m < 1 or args.m >= args.n:
        raise UsageError("--m must satisfy 1 <= m < n")
    try:
        table, cert, attempts = search_extractor(args.n, args.m, args.max_attempts, args.seed)
    except SearchExhausted as exc:
        sys.stderr.write(f"search exhausted: {exc}\n")
        return EXIT_VERIFICATION_FAILED
    out = Path(args.out)
    write_table(table, out)
    write_certificate(cert, Path(str(out) + ".cert.json"), seed=args.seed)
    _write_manifest(out, "find-extractor", {"n": args.n, "m": args.m, "attempts": attempts}, args.seed)
    report = cert.to_json_dict(seed=args.seed)
    report["attempts"] = attempts
    sys.stdout.write(json.dumps(report, indent=2) + "\n")
    return EXIT_OK


def _fixture_states(args):
    if args.fixture:
        try:
            yield load_fixture(args.fixture)
        except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot parse fixture {args.fixture}: {exc}") from exc
        return
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed)))
    for _ in range(args.trials):
        yield random_tripartite_state(args.nr, args.dim_e, rng)


def _cmd_verify_bounds(args) -> int:
    if args.fixture is None and args.trials < 1:
        raise UsageError("--trials must be positive when no fixture is given")
    rng_dev = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed + 1)))
    lines = []
    all_pass = True
    for state in _fixture_states(args):
        devices = [random_projective_devices(rng_dev) for _ in range(state.n_rounds)]
        if args.mode == "xor":
            g = xor_table(state.n_rounds)
        else:
            if state.n_rounds < 2:
                raise UsageError("mbit mode needs at least 2 rounds")
            g = mbit_table_for(state.n_rounds, 1, args.seed)
        report = verify_bound(state, devices, g)
        report["nRounds"] = state.n_rounds
        report["dimE"] = state.dim_e
        all_pass &= report["pass"]
        lines.append(json.dumps(report))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        params = {
            "mode": args.mode,
            "trials": args.trials,
            "nr": args.nr,
            "dim_e": args.dim_e,
            "fixture": args.fixture,
        }
        _write_manifest(Path(args.out), "verify-bounds", params, args.seed)
    else:
        sys.stdout.write(text)
    return EXIT_OK if all_pass else EXIT_VERIFICATION_FAILED


def _cmd_simulate(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be positive")
    if not (2.0 < args.chsh_target <= SQRT8):
        raise UsageError("--chsh-target must lie in (2, 2*sqrt(2)]")
    visibility = args.chsh_target / SQRT8
    device = HonestDeviceModel(
        state=werner_state(visibility),
        alice_angles=OPTIMAL_ALICE_ANGLES,
        bob_angles=OPTIMAL_BOB_ANGLES,
    )
    cfg = ProtocolConfig(
        n=args.n,
        p_e=args.pe,
        epsilon=args.epsilon,
        mode=args.mode,
        rng_seed=args.seed,
        device=device,
        cache_dir=args.cache_dir,
    )
    transcript = run_protocol(cfg)
    text = transcript.to_json_line() + "\n"
    if args.out:
        Path(args.out).write_text(text)
        params = {
            "n": args.n,
            "pe": args.pe,
            "epsilon": args.epsilon,
            "mode": args.mode,
            "chsh_target": args.chsh_target,
        }
        _write_manifest(Path(args.out), "simulate", params, args.seed)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_rates(args) -> int:
    if args.grid_size < 2:
        raise UsageError("--grid-size must be at least 2")
    grid = np.linspace(2.0 + 0.01, SQRT8 - 1e-4, args.grid_size)
    rows = rate_curves(grid, mode=args.mode)
    Path(args.out).write_text(rates_csv(rows))
    _write_manifest(Path(args.out), "rates", {"mode": args.mode, "grid_size": args.grid_size}, None)
    return EXIT_OK


def _cmd_min_chsh(args) -> int:
    if args.grid_size < 2:
        raise UsageError("--grid-size must be at least 2")
    grid = np.linspace(0.05, 0.99, args.grid_size)
    # keep the quoted anchor abscissas on every sweep
    grid = np.unique(np.concatenate([grid, [0.5, 0.74]]))
    rows = min_chsh_curve(grid)
    Path(args.out).write_text(min_chsh_csv(rows))
    _write_manifest(Path(args.out), "min-chsh", {"grid_size": args.grid_size}, None)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seedless-di",
        description="Verification lab for seedless extraction from CHSH violation",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("verify-inequality", help="operator inequality on random devices")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--s-grid", type=int, default=50)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=_cmd_verify_inequality)

    p = sub.add_parser("find-extractor", help="search and certify an m-bit table")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--max-attempts", type=int, default=32)
    p.add_argument("--out", type=str, required=True)
    p.set_defaults(func=_cmd_find_extractor)

    p = sub.add_parser("verify-bounds", help="trace-distance bounds on fixtures")
    p.add_argument("--fixture", type=str, default=None)
    p.add_argument("--mode", choices=("xor", "mbit"), default="xor")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--nr", type=int, default=2)
    p.add_argument("--dim-e", type=int, default=2)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=_cmd_verify_bounds)

    p = sub.add_parser("simulate", help="run the spot-checking protocol")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--pe", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--mode", choices=("xor", "mbit"), required=True)
    p.add_argument("--chsh-target", type=float, default=SQRT8)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--cache-dir", type=str, default=None)
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("rates", help="extraction and efficiency rate curves")
    p.add_argument("--mode", choices=("mbit",), default="mbit")
    p.add_argument("--grid-size", type=int, default=64)
    p.add_argument("--out", type=str, required=True)
    p.set_defaults(func=_cmd_rates)

    p = sub.add_parser("min-chsh", help="minimum CHSH with positive yield vs pE")
    p.add_argument("--grid-size", type=int, default=48)
    p.add_argument("--out", type=str, required=True)
    p.set_defaults(func=_cmd_min_chsh)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

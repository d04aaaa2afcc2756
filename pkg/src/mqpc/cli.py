"""Batch command-line front end.

Subcommands: run | attack | audit | oracle-check | efficiency. Settings come
from an optional flat JSON config file (``--config``) with flags taking
precedence. Exit codes: 0 success, 1 session aborted, 2 usage error,
3 property failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from mqpc import audit
from mqpc.adversary import AttackKind, AttackStrategy, attack_report
from mqpc.errors import MQPCError
from mqpc.oracle import check_swap_equivalence
from mqpc.protocol import Engine, PartySecret, SessionConfig, SumMode, run_session

EXIT_OK, EXIT_ABORTED, EXIT_USAGE, EXIT_PROPERTY, EXIT_IO = 0, 1, 2, 3, 4

DEFAULTS = {
    "d": 4,
    "n": 3,
    "L": 8,
    "seed": 0,
    "decoys": None,
    "engine": "symbolic",
    "strict": True,
    "trials": 10_000,
    "secrets": "random",
    "attack": "none",
    "sum_mode": "modular",
    "digit_mode": False,
    "colluders": None,
    "target": None,
    "out": None,
}


class UsageError(Exception):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class CliConfig:
    command: str
    d: int
    n: int
    L: int
    seed: int
    decoys: int | None
    engine: str
    strict: bool
    trials: int
    secrets: list[int] | None  # None: random
    attack: str
    sum_mode: str
    digit_mode: bool
    out: str | None
    report: str | None = None
    colluders: list[int] | None = None
    target: int | None = None
    extra: dict = field(default_factory=dict)

    def session_config(self) -> SessionConfig:
        return SessionConfig(
            self.d, self.n, self.L, decoy_count=self.decoys, strict_mode=self.strict,
            seed=self.seed, engine=self.engine, digit_mode=self.digit_mode,
            sum_mode=self.sum_mode,
        )


def _int_list(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="flat JSON file of settings; flags override it")
    shared.add_argument("--d", type=int)
    shared.add_argument("--n", type=int)
    shared.add_argument("--L", type=int)
    shared.add_argument("--seed", type=int)
    shared.add_argument("--decoys", type=int)
    shared.add_argument("--engine", choices=[e.value for e in Engine])
    shared.add_argument("--strict", action=argparse.BooleanOptionalAction, default=None)
    shared.add_argument("--trials", type=int)
    shared.add_argument("--out", help="output directory")
    shared.add_argument("--sum-mode", dest="sum_mode", choices=[m.value for m in SumMode])

    parser = argparse.ArgumentParser(prog="mqpc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[shared], help="run one comparison session")
    run.add_argument("--secrets", help="comma-separated integers, or 'random'")
    run.add_argument("--attack", choices=[k.value for k in AttackKind])
    run.add_argument("--digit-mode", dest="digit_mode", action="store_true", default=None)

    att = sub.add_parser("attack", parents=[shared], help="decoy detection-rate experiment")
    att.add_argument("--attack", choices=[k.value for k in AttackKind])

    aud = sub.add_parser("audit", parents=[shared], help="soundness/leakage/collusion/efficiency")
    aud.add_argument("report", choices=["soundness", "leakage", "collusion", "efficiency"])
    aud.add_argument("--colluders", help="comma-separated party indices")
    aud.add_argument("--target", type=int)

    sub.add_parser("oracle-check", parents=[shared], help="symbolic vs dense swap equivalence (--n = cat particles)")
    sub.add_parser("efficiency", parents=[shared], help="qubit-efficiency comparison table")
    return parser


def parse_config(argv: list[str] | None = None) -> CliConfig:
    """Merge defaults, the config file and flags into a validated CliConfig."""
    parser = build_parser()
    args = parser.parse_args(argv)
    values = dict(DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError("config", f"cannot read {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("config", "file must hold a flat JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise UsageError(sorted(unknown)[0], "unknown setting")
        values.update(loaded)
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag

    for key in ("d", "n", "L", "seed", "trials"):
        if not isinstance(values[key], int) or isinstance(values[key], bool):
            raise UsageError(key, f"must be an integer, got {values[key]!r}")
    if values["d"] < 2:
        raise UsageError("d", "must be >= 2")
    if values["n"] < 2:
        raise UsageError("n", "must be >= 2")
    if values["L"] < 1:
        raise UsageError("L", "must be >= 1")
    if not 0 <= values["seed"] < 2**64:
        raise UsageError("seed", "must be a 64-bit unsigned integer")
    if values["trials"] < 1:
        raise UsageError("trials", "must be >= 1")
    if values["decoys"] is not None and values["decoys"] < 0:
        raise UsageError("decoys", "must be >= 0")
    if values["engine"] not in [e.value for e in Engine]:
        raise UsageError("engine", f"unknown engine {values['engine']!r}")

    secrets = values["secrets"]
    if isinstance(secrets, list):
        secrets = [int(x) for x in secrets]
    elif str(secrets) == "random":
        secrets = None
    else:
        try:
            secrets = _int_list(secrets)
        except ValueError as exc:
            raise UsageError("secrets", "expected comma-separated integers or 'random'") from exc
    if secrets is not None:
        if len(secrets) != values["n"]:
            raise UsageError("secrets", f"expected {values['n']} secrets, got {len(secrets)}")
        base = values["d"] if values["digit_mode"] else 2
        limit = base ** values["L"]
        if any(not 0 <= x < limit for x in secrets):
            raise UsageError("secrets", f"every secret must lie in [0, {limit})")
    if args.command == "run" and values["strict"] and values["d"] < values["n"] + 1:
        raise UsageError("d", f"strict mode requires d >= n + 1 (got d={values['d']}, n={values['n']})")

    colluders = values["colluders"]
    if colluders is not None and not isinstance(colluders, list):
        try:
            colluders = _int_list(colluders)
        except ValueError as exc:
            raise UsageError("colluders", "expected comma-separated party indices") from exc
    report = getattr(args, "report", None)
    if report == "collusion":
        if values["target"] is None:
            raise UsageError("target", "collusion audit needs --target")
        if not 1 <= values["target"] <= values["n"]:
            raise UsageError("target", f"must be a party in 1..{values['n']}")
        if colluders is None:
            colluders = [i for i in range(1, values["n"] + 1) if i != values["target"]]
        if values["target"] in colluders or any(not 1 <= c <= values["n"] for c in colluders):
            raise UsageError("colluders", "must be parties 1..n other than the target")

    return CliConfig(
        command=args.command, d=values["d"], n=values["n"], L=values["L"], seed=values["seed"],
        decoys=values["decoys"], engine=values["engine"], strict=bool(values["strict"]),
        trials=values["trials"], secrets=secrets, attack=values["attack"],
        sum_mode=values["sum_mode"], digit_mode=bool(values["digit_mode"]), out=values["out"],
        report=report, colluders=colluders, target=values["target"],
    )


# --- output ---------------------------------------------------------------


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_transcript(transcript, path) -> None:
    """Line-delimited JSON: header with the seed first, then one event per line."""
    _atomic_write(Path(path), "\n".join(transcript.to_lines()) + "\n")


def _emit(cfg: CliConfig, name: str, record: dict) -> None:
    text = json.dumps(record, indent=2) + "\n"
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        _atomic_write(Path(cfg.out) / name, text)


# --- commands -------------------------------------------------------------


def _cmd_run(cfg: CliConfig) -> int:
    config = cfg.session_config()
    base = cfg.d if cfg.digit_mode else 2
    values = cfg.secrets
    if values is None:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(6)[5])
        values = [int(x) for x in rng.integers(0, base**cfg.L, size=cfg.n)]
    secrets = [PartySecret.from_int(x, cfg.L, base) for x in values]
    result = run_session(config, secrets, AttackStrategy(AttackKind(cfg.attack)))
    summary = result.summary()
    summary["secrets"] = values
    if cfg.out is not None:
        write_transcript(result.transcript, Path(cfg.out) / "transcript.jsonl")
    _emit(cfg, "summary.json", summary)
    return EXIT_ABORTED if result.verdict.aborted else EXIT_OK


def _cmd_attack(cfg: CliConfig) -> int:
    kind = AttackKind(cfg.attack if cfg.attack != "none" else "intercept-resend")
    record = attack_report(cfg.session_config(), AttackStrategy(kind), cfg.trials)
    _emit(cfg, "attack.json", record)
    lo, hi = record["interval"]
    return EXIT_OK if lo <= record["expected"] <= hi else EXIT_PROPERTY


def _cmd_audit(cfg: CliConfig) -> int:
    if cfg.report == "soundness":
        rep = audit.soundness_scan(cfg.d, cfg.n, cfg.L, cfg.engine, cfg.seed)
        ok = rep.sound
    elif cfg.report == "leakage":
        rep = audit.tp_view_leakage(cfg.d, cfg.n, cfg.L, cfg.sum_mode)
        ok = rep.factors_through_sum
    elif cfg.report == "collusion":
        rep = audit.collusion_privacy_check(cfg.d, cfg.n, cfg.L, cfg.colluders, cfg.target, cfg.sum_mode)
        ok = rep.passed
    else:
        rows = audit.efficiency_table(cfg.n, cfg.L)
        _emit(cfg, "efficiency.json", {"report": "efficiency", "n": cfg.n, "L": cfg.L, "rows": [r.to_record() for r in rows]})
        return EXIT_OK
    _emit(cfg, f"{cfg.report}.json", rep.to_record())
    return EXIT_OK if ok else EXIT_PROPERTY


def _cmd_oracle_check(cfg: CliConfig) -> int:
    rep = check_swap_equivalence(cfg.d, cfg.n)
    record = {
        "report": "oracle-check",
        "d": cfg.d,
        "n_particles": cfg.n,
        "branches": rep.branches,
        "matched": rep.matched,
        "max_fidelity_deficit": rep.max_fidelity_deficit,
        "max_amplitude_error": rep.max_amplitude_error,
    }
    _emit(cfg, "oracle-check.json", record)
    if rep.ok:
        print(f"all {rep.branches} branches matched", file=sys.stderr)
        return EXIT_OK
    print(f"{rep.branches - rep.matched} of {rep.branches} branches failed", file=sys.stderr)
    return EXIT_PROPERTY


def _cmd_efficiency(cfg: CliConfig) -> int:
    rows = audit.efficiency_table(cfg.n, cfg.L)
    _emit(cfg, "efficiency.json", {"report": "efficiency", "n": cfg.n, "L": cfg.L, "rows": [r.to_record() for r in rows]})
    return EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "attack": _cmd_attack,
    "audit": _cmd_audit,
    "oracle-check": _cmd_oracle_check,
    "efficiency": _cmd_efficiency,
}


def execute_command(cfg: CliConfig) -> int:
    try:
        return COMMANDS[cfg.command](cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MQPCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse
        return EXIT_USAGE if exc.code else EXIT_OK
    return execute_command(cfg)


if __name__ == "__main__":
    sys.exit(main())

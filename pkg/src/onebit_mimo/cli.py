"""Command-line frontend: config parsing, sweep dispatch, CSV output."""

from __future__ import annotations

import argparse
import re
import sys

import numpy as np

from . import experiments, fisher, validate
from .model import SystemConfig, build_g, build_phi
from .simulate import draw_channel, noise_var_from_snr_db, orthogonal_pilots, substream

_DEFAULTS = {
    "n_users": 4,
    "n_rx": 16,
    "oversampling": 1,
    "block_len": 40,
    "pilot_len": 40,
    "rolloff": 0.8,
    "forgetting": 0.91,
    "seed": 0,
    "n_trials": 500,
    "snr_db_grid": (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0),
    "pilot_grid": (10, 20, 40, 80),
    "oversampling_set": (1, 2, 3),
}

_RANGE_RE = re.compile(r"^\s*(-?[0-9.]+)\s*\.\.\s*(-?[0-9.]+)\s+step\s+([0-9.]+)\s*$")


class ConfigError(Exception):
    pass


def _parse_scalar(key, text, kind):
    try:
        value = kind(text)
    except ValueError as exc:
        raise ConfigError(f"key '{key}': cannot parse {text!r}") from exc
    return value


def _parse_grid(key, text, kind):
    """Comma list ('1,2,3') or inclusive range ('-10..20 step 5')."""
    match = _RANGE_RE.match(text)
    if match:
        lo, hi, step = (float(g) for g in match.groups())
        if step <= 0:
            raise ConfigError(f"key '{key}': step must be positive")
        values = np.arange(lo, hi + step * 1e-9, step)
        return tuple(kind(v) for v in values)
    try:
        return tuple(kind(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"key '{key}': cannot parse {text!r}") from exc


_PARSERS = {
    "n_users": lambda k, v: _parse_scalar(k, v, int),
    "n_rx": lambda k, v: _parse_scalar(k, v, int),
    "oversampling": lambda k, v: _parse_scalar(k, v, int),
    "block_len": lambda k, v: _parse_scalar(k, v, int),
    "pilot_len": lambda k, v: _parse_scalar(k, v, int),
    "rolloff": lambda k, v: _parse_scalar(k, v, float),
    "forgetting": lambda k, v: _parse_scalar(k, v, float),
    "seed": lambda k, v: _parse_scalar(k, v, int),
    "n_trials": lambda k, v: _parse_scalar(k, v, int),
    "snr_db_grid": lambda k, v: _parse_grid(k, v, float),
    "pilot_grid": lambda k, v: _parse_grid(k, v, lambda x: int(float(x))),
    "oversampling_set": lambda k, v: _parse_grid(k, v, lambda x: int(float(x))),
}


def _assign(cfg, explicit, key, value, where):
    if key not in _PARSERS:
        raise ConfigError(f"{where}: unknown key '{key}'")
    cfg[key] = _PARSERS[key](key, value)
    explicit.add(key)


def _check_constraints(cfg, explicit):
    for key in ("n_users", "n_rx", "oversampling", "block_len", "pilot_len", "n_trials"):
        if cfg[key] < 1:
            raise ConfigError(f"key '{key}': must be >= 1, got {cfg[key]}")
    if not 0.0 < cfg["rolloff"] <= 1.0:
        raise ConfigError(f"key 'rolloff': must lie in (0, 1], got {cfg['rolloff']}")
    if not 0.0 <= cfg["forgetting"] <= 1.0:
        raise ConfigError(f"key 'forgetting': must lie in [0, 1], got {cfg['forgetting']}")
    if not 0 <= cfg["seed"] < 2**64:
        raise ConfigError(f"key 'seed': must be an unsigned 64-bit value, got {cfg['seed']}")
    for key in ("pilot_grid", "oversampling_set"):
        if any(v < 1 for v in cfg[key]):
            raise ConfigError(f"key '{key}': entries must be >= 1")
    # block_len and pilot_len name the same quantity in this model
    # (the pilot block spans the whole transmission block).
    if "block_len" in explicit and "pilot_len" in explicit:
        if cfg["block_len"] != cfg["pilot_len"]:
            raise ConfigError(
                f"block_len={cfg['block_len']} and pilot_len={cfg['pilot_len']} disagree; "
                "the pilot block spans the transmission block"
            )
    elif "block_len" in explicit:
        cfg["pilot_len"] = cfg["block_len"]
    elif "pilot_len" in explicit:
        cfg["block_len"] = cfg["pilot_len"]


def parse_config(path=None, overrides=()):
    """Flat key=value config plus --set overrides; returns (cfg, explicit)."""
    cfg = dict(_DEFAULTS)
    explicit = set()
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
                key, value = (part.strip() for part in line.split("=", 1))
                try:
                    _assign(cfg, explicit, key, value, f"line {lineno}")
                except ConfigError:
                    raise
                except Exception as exc:
                    raise ConfigError(f"line {lineno}: {exc}") from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value")
        key, value = (part.strip() for part in item.split("=", 1))
        _assign(cfg, explicit, key, value, f"--set {key}")
    _check_constraints(cfg, explicit)
    return cfg, explicit


def _base_cfg(cfg) -> SystemConfig:
    return SystemConfig(
        n_users=cfg["n_users"],
        n_rx=cfg["n_rx"],
        oversampling=cfg["oversampling"],
        block_len=cfg["pilot_len"],
        rolloff=cfg["rolloff"],
    )


def _build_spec(cfg, snr_grid, pilot_grid, m_set) -> experiments.SweepSpec:
    return experiments.SweepSpec(
        snr_db_grid=tuple(snr_grid),
        pilot_grid=tuple(pilot_grid),
        oversampling_set=tuple(m_set),
        n_trials=cfg["n_trials"],
        base_cfg=_base_cfg(cfg),
        forgetting=cfg["forgetting"],
        seed=cfg["seed"],
    )


def _print_rows(rows):
    for row in rows:
        print(
            f"m={row.m} snr_db={row.snr_db:g} tau={row.tau} "
            f"nmse_db={row.nmse_db:.4f} stderr_db={row.nmse_stderr_db:.4f} "
            f"crb_db={row.crb_db:.4f} (n={row.n_trials})"
        )


def _cmd_sweep(verb, cfg, explicit, out_path):
    if verb == "nmse-vs-snr":
        spec = _build_spec(cfg, cfg["snr_db_grid"], (cfg["pilot_len"],), cfg["oversampling_set"])
        rows = experiments.run_sweep(spec)
    elif verb == "nmse-vs-pilots":
        snr_grid = cfg["snr_db_grid"] if "snr_db_grid" in explicit else (0.0,)
        spec = _build_spec(cfg, snr_grid, cfg["pilot_grid"], cfg["oversampling_set"])
        rows = experiments.run_sweep(spec)
    else:  # crb
        pilot_grid = cfg["pilot_grid"] if "pilot_grid" in explicit else (cfg["pilot_len"],)
        spec = _build_spec(cfg, cfg["snr_db_grid"], pilot_grid, cfg["oversampling_set"])
        rows = experiments.crb_curve(spec)
    _print_rows(rows)
    path = out_path if out_path is not None else verb.replace("-", "_") + ".csv"
    experiments.write_csv(rows, path)
    print(f"wrote {path}")
    return 0


def _cmd_fisher_check(cfg, out_path):
    base = _base_cfg(cfg)
    snr_db = cfg["snr_db_grid"][0]
    noise_var = noise_var_from_snr_db(snr_db, base.n_users)
    rng = substream(cfg["seed"], base.oversampling, float(snr_db), base.block_len)
    pilots = orthogonal_pilots(base.block_len, base.n_users, rng)
    h = draw_channel(rng, base).h_true
    phi = build_phi(pilots, base.n_rx, base.oversampling, base.rolloff)
    if base.oversampling == 1:
        result = fisher.fisher_white(phi, h, noise_var)
    else:
        g = build_g(base.oversampling, base.block_len, base.rolloff)
        result = fisher.fisher_lower_bound(phi, h, noise_var * (g @ g.T), n_blocks=base.n_rx)
    print(f"snr_db={snr_db:g} " + fisher.fisher_summary(result))
    if result.fi_matrix.shape[0] <= 16:
        print(np.array2string(result.fi_matrix, precision=6))
    if out_path is not None:
        fisher.write_fisher_csv(result, out_path)
        print(f"wrote {out_path}")
    return 0


def _cmd_validate():
    results = validate.run_all()
    failures = 0
    for res in results:
        tag = "PASS" if res.passed else "FAIL"
        failures += not res.passed
        print(f"{tag} {res.name}: {res.detail}")
    return 0 if failures == 0 else 1


def _add_common_flags(sub):
    sub.add_argument("--config", metavar="PATH", default=None, help="flat key=value config file")
    sub.add_argument(
        "--set",
        metavar="KEY=VALUE",
        action="append",
        default=[],
        dest="overrides",
        help="override a config key (repeatable)",
    )
    sub.add_argument("--out", metavar="PATH", default=None, help="output file path")
    sub.add_argument("--seed", type=int, default=None, help="base seed (unsigned 64-bit)")
    sub.add_argument("--trials", type=int, default=None, help="Monte Carlo trials per point")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onebit-mimo",
        description="NMSE experiments and information bounds for 1-bit oversampled uplinks",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, text in (
        ("nmse-vs-snr", "NMSE sweep over the SNR grid"),
        ("nmse-vs-pilots", "NMSE sweep over the pilot-length grid"),
        ("crb", "bound-only sweep (no Monte Carlo trials)"),
        ("fisher-check", "information-matrix summary for one configuration"),
        ("validate", "fast structural and numerical self-checks"),
    ):
        _add_common_flags(sub.add_parser(verb, help=text))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, explicit = parse_config(args.config, args.overrides)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError(f"--seed must be an unsigned 64-bit value, got {args.seed}")
            cfg["seed"] = args.seed
            explicit.add("seed")
        if args.trials is not None:
            if args.trials < 1:
                raise ConfigError(f"--trials must be >= 1, got {args.trials}")
            cfg["n_trials"] = args.trials
            explicit.add("n_trials")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 3

    try:
        if args.verb in ("nmse-vs-snr", "nmse-vs-pilots", "crb"):
            return _cmd_sweep(args.verb, cfg, explicit, args.out)
        if args.verb == "fisher-check":
            return _cmd_fisher_check(cfg, args.out)
        return _cmd_validate()
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

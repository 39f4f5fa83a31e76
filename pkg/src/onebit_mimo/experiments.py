"""Monte Carlo sweeps over SNR, pilot length, and oversampling factor."""

from __future__ import annotations

import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import fisher
from .estimator import estimate_channel_pipeline
from .model import SystemConfig, build_g, build_phi
from .simulate import (
    draw_channel,
    orthogonal_pilots,
    noise_var_from_snr_db,
    simulate_pilot_batch,
    substream,
)

CSV_HEADER = "m,snr_db,tau,nmse_db,nmse_stderr_db,crb_db,n_trials"

# Salt separating the CRB channel-draw streams from the trial streams.
_CRB_STREAM = 0x637262


@dataclass(frozen=True)
class SweepSpec:
    """Grid definition plus the base system configuration."""

    snr_db_grid: tuple
    pilot_grid: tuple
    oversampling_set: tuple
    n_trials: int
    base_cfg: SystemConfig = SystemConfig()
    forgetting: float = 0.91
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if not (self.snr_db_grid and self.pilot_grid and self.oversampling_set):
            raise ValueError("all sweep grids must be nonempty")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if not 0.0 <= self.forgetting <= 1.0:
            raise ValueError("forgetting must lie in [0, 1]")


@dataclass
class ResultRow:
    m: int
    snr_db: float
    tau: int
    nmse_db: float
    nmse_stderr_db: float
    crb_db: float
    n_trials: int


def _point_cfg(spec: SweepSpec, m: int, tau: int) -> SystemConfig:
    return replace(spec.base_cfg, oversampling=int(m), block_len=int(tau))


def _one_trial(cfg, forgetting, noise_var, g, seed_keys):
    rng = substream(*seed_keys)
    pilots = orthogonal_pilots(cfg.block_len, cfg.n_users, rng)
    state = draw_channel(rng, cfg)
    batch = simulate_pilot_batch(rng, state, pilots, cfg, noise_var, g=g)
    h_hat, _ = estimate_channel_pipeline(batch, pilots, cfg, forgetting)
    err = h_hat - state.h_true
    return np.real(np.vdot(err, err)) / np.real(np.vdot(state.h_true, state.h_true))


def run_nmse_point(
    cfg: SystemConfig,
    snr_db: float,
    n_trials: int,
    seed: int = 0,
    forgetting: float = 0.91,
    n_jobs: int = 1,
):
    """Average NMSE of the adaptive pipeline at one grid point.

    Each trial draws fresh pilots, channel, and noise from a stream
    keyed by (seed, m, snr_db, tau, trial), so results do not depend on
    execution order or worker count. Returns (nmse_db, stderr_db).
    """
    noise_var = noise_var_from_snr_db(snr_db, cfg.n_users)
    g = build_g(cfg.oversampling, cfg.block_len, cfg.rolloff)

    def trial(t):
        keys = (seed, cfg.oversampling, float(snr_db), cfg.block_len, t)
        return _one_trial(cfg, forgetting, noise_var, g, keys)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            errors = np.fromiter(pool.map(trial, range(n_trials)), dtype=float, count=n_trials)
    else:
        errors = np.fromiter(map(trial, range(n_trials)), dtype=float, count=n_trials)

    nmse = float(np.mean(errors))
    stderr = float(np.std(errors, ddof=1) / math.sqrt(n_trials)) if n_trials > 1 else 0.0
    nmse_db = 10.0 * math.log10(nmse)
    stderr_db = (10.0 / math.log(10.0)) * stderr / nmse
    return nmse_db, stderr_db


def crb_point(
    cfg: SystemConfig,
    snr_db: float,
    n_channel_draws: int = 4,
    seed: int = 0,
) -> float:
    """CRB on the NMSE axis, averaged over random channel draws.

    Sums the bound diagonal over all real parameters and divides by
    E||h'||^2 = n_rx*n_users. Symbol-rate sampling uses the exact white
    information matrix, oversampled points the moment lower bound with
    the matched-filter noise block. Draws whose information matrix is
    singular are skipped; returns nan if none survive.
    """
    noise_var = noise_var_from_snr_db(snr_db, cfg.n_users)
    noise_block = None
    if cfg.oversampling > 1:
        g = build_g(cfg.oversampling, cfg.block_len, cfg.rolloff)
        noise_block = noise_var * (g @ g.T)
    values = []
    for draw in range(n_channel_draws):
        rng = substream(seed, cfg.oversampling, float(snr_db), cfg.block_len, draw, _CRB_STREAM)
        pilots = orthogonal_pilots(cfg.block_len, cfg.n_users, rng)
        h = draw_channel(rng, cfg).h_true
        phi = build_phi(pilots, cfg.n_rx, cfg.oversampling, cfg.rolloff)
        if cfg.oversampling == 1:
            result = fisher.fisher_white(phi, h, noise_var)
        else:
            result = fisher.fisher_lower_bound(phi, h, noise_block, n_blocks=cfg.n_rx)
        try:
            diag = fisher.crb(result)
        except ValueError as exc:
            print(f"crb_point: skipping draw {draw}: {exc}", file=sys.stderr)
            continue
        values.append(np.sum(diag) / cfg.n_coefficients)
    if not values:
        return math.nan
    return 10.0 * math.log10(float(np.mean(values)))


def run_sweep(spec: SweepSpec, compute_crb: bool = True, n_channel_draws: int = 4):
    """One ResultRow per (m, snr, tau) grid point.

    Point failures are recorded as nan rows on stderr and the sweep
    continues.
    """
    rows = []
    for m in spec.oversampling_set:
        for snr_db in spec.snr_db_grid:
            for tau in spec.pilot_grid:
                cfg = _point_cfg(spec, m, tau)
                try:
                    nmse_db, stderr_db = run_nmse_point(
                        cfg,
                        snr_db,
                        spec.n_trials,
                        seed=spec.seed,
                        forgetting=spec.forgetting,
                        n_jobs=spec.n_jobs,
                    )
                    crb_db = (
                        crb_point(cfg, snr_db, n_channel_draws, seed=spec.seed)
                        if compute_crb
                        else math.nan
                    )
                except Exception as exc:  # noqa: BLE001 - sweep must survive point failures
                    print(f"run_sweep: point m={m} snr={snr_db} tau={tau} failed: {exc}", file=sys.stderr)
                    nmse_db = stderr_db = crb_db = math.nan
                rows.append(
                    ResultRow(
                        m=int(m),
                        snr_db=float(snr_db),
                        tau=int(tau),
                        nmse_db=nmse_db,
                        nmse_stderr_db=stderr_db,
                        crb_db=crb_db,
                        n_trials=spec.n_trials,
                    )
                )
    return rows


def crb_curve(spec: SweepSpec, n_channel_draws: int = 4):
    """Bound-only rows over the same grid (nmse columns nan)."""
    rows = []
    for m in spec.oversampling_set:
        for snr_db in spec.snr_db_grid:
            for tau in spec.pilot_grid:
                cfg = _point_cfg(spec, m, tau)
                crb_db = crb_point(cfg, snr_db, n_channel_draws, seed=spec.seed)
                rows.append(
                    ResultRow(
                        m=int(m),
                        snr_db=float(snr_db),
                        tau=int(tau),
                        nmse_db=math.nan,
                        nmse_stderr_db=math.nan,
                        crb_db=crb_db,
                        n_trials=0,
                    )
                )
    return rows


def format_row(row: ResultRow) -> str:
    return ",".join(
        (
            str(row.m),
            f"{row.snr_db:.17g}",
            str(row.tau),
            f"{row.nmse_db:.17g}",
            f"{row.nmse_stderr_db:.17g}",
            f"{row.crb_db:.17g}",
            str(row.n_trials),
        )
    )


def write_csv(rows, path) -> None:
    """Sweep results as CSV: UTF-8, LF endings, 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(format_row(row) + "\n")

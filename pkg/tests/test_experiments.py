"""Monte Carlo sweep drivers and the results CSV contract."""

import math

import numpy as np
import pytest

from onebit_mimo import experiments
from onebit_mimo.experiments import (
    CSV_HEADER,
    ResultRow,
    SweepSpec,
    crb_curve,
    crb_point,
    format_row,
    run_nmse_point,
    run_sweep,
    write_csv,
)
from onebit_mimo.model import SystemConfig, build_phi
from onebit_mimo import fisher
from onebit_mimo.simulate import (
    draw_channel,
    noise_var_from_snr_db,
    orthogonal_pilots,
    substream,
)

_SMALL = SystemConfig(2, 2, 1, 8)


def test_run_nmse_point_is_deterministic():
    a = run_nmse_point(_SMALL, 0.0, 12, seed=3)
    b = run_nmse_point(_SMALL, 0.0, 12, seed=3)
    assert a == b


def test_run_nmse_point_thread_pool_matches_serial():
    # trial streams are keyed by (seed, m, snr, tau, trial), so the
    # worker count must not change a single bit of the result
    serial = run_nmse_point(_SMALL, 0.0, 16, seed=3, n_jobs=1)
    pooled = run_nmse_point(_SMALL, 0.0, 16, seed=3, n_jobs=4)
    assert serial == pooled


def test_run_nmse_point_seed_changes_result():
    a = run_nmse_point(_SMALL, 0.0, 12, seed=3)
    b = run_nmse_point(_SMALL, 0.0, 12, seed=4)
    assert a != b


def test_run_nmse_point_returns_finite_stats():
    nmse_db, stderr_db = run_nmse_point(_SMALL, 5.0, 20, seed=1)
    assert math.isfinite(nmse_db)
    assert math.isfinite(stderr_db) and stderr_db > 0.0


def test_crb_point_symbol_rate_matches_manual_average():
    """Reassemble the draw loop by hand to pin the stream-key contract."""
    cfg = _SMALL
    snr_db, seed, draws = 0.0, 5, 3
    noise_var = noise_var_from_snr_db(snr_db, cfg.n_users)
    values = []
    for draw in range(draws):
        rng = substream(seed, cfg.oversampling, float(snr_db), cfg.block_len, draw, experiments._CRB_STREAM)
        pilots = orthogonal_pilots(cfg.block_len, cfg.n_users, rng)
        h = draw_channel(rng, cfg).h_true
        phi = build_phi(pilots, cfg.n_rx, cfg.oversampling, cfg.rolloff)
        diag = fisher.crb(fisher.fisher_white(phi, h, noise_var))
        values.append(np.sum(diag) / cfg.n_coefficients)
    expected = 10.0 * math.log10(float(np.mean(values)))
    got = crb_point(cfg, snr_db, n_channel_draws=draws, seed=seed)
    assert abs(got - expected) < 1e-12


def test_crb_point_oversampling_tightens_bound():
    m1 = crb_point(SystemConfig(2, 2, 1, 8), 0.0, n_channel_draws=3, seed=5)
    m2 = crb_point(SystemConfig(2, 2, 2, 8), 0.0, n_channel_draws=3, seed=5)
    assert m2 < m1


def test_run_sweep_row_order_and_fields():
    spec = SweepSpec(
        snr_db_grid=(0.0, 5.0),
        pilot_grid=(4, 8),
        oversampling_set=(1,),
        n_trials=6,
        base_cfg=_SMALL,
        seed=7,
    )
    rows = run_sweep(spec, compute_crb=False)
    assert [(r.m, r.snr_db, r.tau) for r in rows] == [
        (1, 0.0, 4),
        (1, 0.0, 8),
        (1, 5.0, 4),
        (1, 5.0, 8),
    ]
    for row in rows:
        assert row.n_trials == 6
        assert math.isfinite(row.nmse_db)
        assert math.isnan(row.crb_db)


def test_run_sweep_with_bound_column():
    spec = SweepSpec(
        snr_db_grid=(0.0,),
        pilot_grid=(8,),
        oversampling_set=(1,),
        n_trials=6,
        base_cfg=_SMALL,
        seed=7,
    )
    (row,) = run_sweep(spec, compute_crb=True, n_channel_draws=2)
    assert math.isfinite(row.crb_db)


def test_run_sweep_survives_point_failure(monkeypatch, capsys):
    real = experiments.run_nmse_point

    def flaky(cfg, snr_db, *args, **kwargs):
        if cfg.block_len == 4:
            raise RuntimeError("synthetic point failure")
        return real(cfg, snr_db, *args, **kwargs)

    monkeypatch.setattr(experiments, "run_nmse_point", flaky)
    spec = SweepSpec(
        snr_db_grid=(0.0,),
        pilot_grid=(4, 8),
        oversampling_set=(1,),
        n_trials=4,
        base_cfg=_SMALL,
        seed=7,
    )
    rows = run_sweep(spec, compute_crb=False)
    assert math.isnan(rows[0].nmse_db)
    assert math.isfinite(rows[1].nmse_db)
    assert "synthetic point failure" in capsys.readouterr().err


def test_crb_curve_has_no_monte_carlo_columns():
    spec = SweepSpec(
        snr_db_grid=(0.0,),
        pilot_grid=(4, 8),
        oversampling_set=(1,),
        n_trials=5,
        base_cfg=_SMALL,
        seed=7,
    )
    rows = crb_curve(spec, n_channel_draws=2)
    assert len(rows) == 2
    for row in rows:
        assert math.isnan(row.nmse_db)
        assert math.isnan(row.nmse_stderr_db)
        assert math.isfinite(row.crb_db)
        assert row.n_trials == 0


def test_format_row_roundtrips_doubles_exactly():
    row = ResultRow(
        m=2,
        snr_db=-5.0,
        tau=40,
        nmse_db=-7.2215371234567891,
        nmse_stderr_db=0.017234567890123456,
        crb_db=float("nan"),
        n_trials=2000,
    )
    text = format_row(row)
    fields = text.split(",")
    assert len(fields) == 7
    assert int(fields[0]) == 2 and int(fields[2]) == 40 and int(fields[6]) == 2000
    assert float(fields[1]) == row.snr_db
    assert float(fields[3]) == row.nmse_db
    assert float(fields[4]) == row.nmse_stderr_db
    assert math.isnan(float(fields[5]))


def test_write_csv_format(tmp_path):
    rows = [
        ResultRow(1, 0.0, 4, -1.5, 0.1, -2.0, 5),
        ResultRow(2, 0.0, 4, float("nan"), float("nan"), -3.0, 0),
    ]
    path = tmp_path / "out.csv"
    write_csv(rows, path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode("utf-8").splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    assert lines[2].split(",")[3] == "nan"


@pytest.mark.parametrize(
    "kwargs",
    [
        {"snr_db_grid": ()},
        {"pilot_grid": ()},
        {"oversampling_set": ()},
        {"n_trials": 0},
        {"forgetting": 1.5},
    ],
)
def test_sweep_spec_validation(kwargs):
    base = dict(
        snr_db_grid=(0.0,), pilot_grid=(8,), oversampling_set=(1,), n_trials=4
    )
    base.update(kwargs)
    with pytest.raises(ValueError):
        SweepSpec(**base)

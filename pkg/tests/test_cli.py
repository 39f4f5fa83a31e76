"""Command-line surface: config parsing, verbs, output files, exit codes."""

import math

import numpy as np
import pytest

from onebit_mimo.cli import ConfigError, main, parse_config
from onebit_mimo.experiments import CSV_HEADER

_TINY = [
    "--set", "n_users=2",
    "--set", "n_rx=2",
    "--set", "oversampling_set=1",
]


def _read_rows(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == CSV_HEADER
    return [line.split(",") for line in lines[1:]]


def test_parse_config_file_with_comments_and_ranges(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "# experiment setup\n"
        "n_users = 2\n"
        "snr_db_grid = -10..20 step 10  # coarse grid\n"
        "pilot_grid = 4,6,8\n"
        "\n"
        "forgetting = 0.85\n",
        encoding="utf-8",
    )
    cfg, explicit = parse_config(cfg_file)
    assert cfg["n_users"] == 2
    assert cfg["snr_db_grid"] == (-10.0, 0.0, 10.0, 20.0)
    assert cfg["pilot_grid"] == (4, 6, 8)
    assert cfg["forgetting"] == 0.85
    assert {"n_users", "snr_db_grid", "pilot_grid", "forgetting"} <= explicit
    assert cfg["n_rx"] == 16  # untouched default


def test_parse_config_overrides_win():
    cfg, explicit = parse_config(None, ["n_trials=25", "oversampling_set=1,2"])
    assert cfg["n_trials"] == 25
    assert cfg["oversampling_set"] == (1, 2)
    assert "n_trials" in explicit


def test_parse_config_unknown_key_reports_line(tmp_path):
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text("n_users = 2\nbogus = 3\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="line 2.*bogus"):
        parse_config(cfg_file)


def test_parse_config_rejects_malformed_lines(tmp_path):
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text("just words\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="key=value"):
        parse_config(cfg_file)


def test_parse_config_rejects_unparseable_value():
    with pytest.raises(ConfigError, match="cannot parse"):
        parse_config(None, ["n_users=abc"])


def test_parse_config_value_constraints():
    with pytest.raises(ConfigError, match="rolloff"):
        parse_config(None, ["rolloff=0"])
    with pytest.raises(ConfigError, match="forgetting"):
        parse_config(None, ["forgetting=1.5"])
    with pytest.raises(ConfigError, match="seed"):
        parse_config(None, ["seed=-1"])
    with pytest.raises(ConfigError, match="step"):
        parse_config(None, ["snr_db_grid=0..10 step 0"])


def test_block_and_pilot_length_stay_in_sync():
    cfg, _ = parse_config(None, ["pilot_len=12"])
    assert cfg["block_len"] == 12
    cfg, _ = parse_config(None, ["block_len=16"])
    assert cfg["pilot_len"] == 16
    cfg, _ = parse_config(None, ["block_len=16", "pilot_len=16"])
    assert cfg["block_len"] == cfg["pilot_len"] == 16
    with pytest.raises(ConfigError, match="disagree"):
        parse_config(None, ["block_len=16", "pilot_len=12"])


def test_main_config_error_exits_2(capsys):
    assert main(["validate", "--set", "bogus=1"]) == 2
    assert "config error" in capsys.readouterr().err


def test_main_missing_config_file_exits_3(capsys):
    assert main(["validate", "--config", "/no/such/file.cfg"]) == 3
    assert "cannot read config" in capsys.readouterr().err


def test_main_bad_seed_flag_exits_2():
    assert main(["validate", "--seed", "-5"]) == 2
    assert main(["crb", "--trials", "0"]) == 2


def test_main_validate_passes(capsys):
    assert main(["validate"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 5
    assert "FAIL" not in out


def test_main_pilot_sweep_writes_csv(tmp_path, capsys):
    out = tmp_path / "pilots.csv"
    code = main(
        ["nmse-vs-pilots", *_TINY, "--set", "pilot_grid=4,6", "--trials", "3", "--out", str(out)]
    )
    assert code == 0
    rows = _read_rows(out)
    assert len(rows) == 2
    # without an explicit snr grid the pilot sweep runs at 0 dB only
    assert {r[1] for r in rows} == {"0"}
    assert [int(r[2]) for r in rows] == [4, 6]
    assert all(math.isfinite(float(r[3])) for r in rows)
    assert all(int(r[6]) == 3 for r in rows)
    assert f"wrote {out}" in capsys.readouterr().out


def test_main_pilot_sweep_honors_explicit_snr_grid(tmp_path):
    out = tmp_path / "pilots.csv"
    code = main(
        [
            "nmse-vs-pilots",
            *_TINY,
            "--set", "pilot_grid=4",
            "--set", "snr_db_grid=0,5",
            "--trials", "3",
            "--out", str(out),
        ]
    )
    assert code == 0
    rows = _read_rows(out)
    assert [float(r[1]) for r in rows] == [0.0, 5.0]


def test_main_snr_sweep_uses_pilot_len(tmp_path):
    out = tmp_path / "snr.csv"
    code = main(
        [
            "nmse-vs-snr",
            *_TINY,
            "--set", "pilot_len=6",
            "--set", "snr_db_grid=0,10",
            "--trials", "3",
            "--out", str(out),
        ]
    )
    assert code == 0
    rows = _read_rows(out)
    assert [int(r[2]) for r in rows] == [6, 6]
    assert [float(r[1]) for r in rows] == [0.0, 10.0]


def test_main_crb_verb_skips_monte_carlo(tmp_path):
    out = tmp_path / "crb.csv"
    code = main(
        [
            "crb",
            *_TINY,
            "--set", "pilot_len=6",
            "--set", "snr_db_grid=0",
            "--out", str(out),
        ]
    )
    assert code == 0
    (row,) = _read_rows(out)
    assert int(row[2]) == 6
    assert row[3] == "nan" and row[4] == "nan"
    assert math.isfinite(float(row[5]))
    assert int(row[6]) == 0


def test_main_fisher_check_symbol_rate(tmp_path, capsys):
    out = tmp_path / "fi.csv"
    code = main(
        ["fisher-check", *_TINY, "--set", "pilot_len=8", "--set", "snr_db_grid=0", "--out", str(out)]
    )
    assert code == 0
    text = capsys.readouterr().out
    assert "kind=exact_white" in text
    mat = np.loadtxt(out, delimiter=",")
    assert mat.shape == (8, 8)
    np.testing.assert_allclose(mat, mat.T, atol=1e-12)


def test_main_fisher_check_oversampled(capsys):
    code = main(
        [
            "fisher-check",
            *_TINY,
            "--set", "oversampling=2",
            "--set", "pilot_len=6",
            "--set", "snr_db_grid=0",
        ]
    )
    assert code == 0
    assert "kind=lower_bound_colored" in capsys.readouterr().out


def test_main_unwritable_output_exits_3(capsys):
    code = main(
        [
            "crb",
            *_TINY,
            "--set", "pilot_len=6",
            "--set", "snr_db_grid=0",
            "--out", "/no/such/dir/out.csv",
        ]
    )
    assert code == 3
    assert "i/o error" in capsys.readouterr().err


def test_main_runs_are_reproducible(tmp_path):
    args = [
        "nmse-vs-pilots",
        *_TINY,
        "--set", "pilot_grid=4,6",
        "--trials", "3",
        "--seed", "11",
    ]
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(out_a)]) == 0
    assert main(args + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_main_seed_flag_changes_results(tmp_path):
    args = [
        "nmse-vs-pilots",
        *_TINY,
        "--set", "pilot_grid=4",
        "--trials", "3",
    ]
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--seed", "1", "--out", str(out_a)]) == 0
    assert main(args + ["--seed", "2", "--out", str(out_b)]) == 0
    nmse_a = float(_read_rows(out_a)[0][3])
    nmse_b = float(_read_rows(out_b)[0][3])
    assert nmse_a != nmse_b

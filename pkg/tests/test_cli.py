import json
import math

import numpy as np
import pytest

from emfe_ris.cli import emit_csv, main, parse_csv
from emfe_ris.config import ParseError, emit_config, parse_config, preset
from emfe_ris.errors import ConfigError
from emfe_ris.scenario import ScenarioConfig, SweepResult


def test_empty_document_is_default_case1():
    cfg = parse_config("")
    assert cfg == ScenarioConfig()
    assert cfg.case == "case1" and cfg.channel_model == "rayleigh"
    assert cfg.sweep[0] == -75.0 and cfg.sweep[-1] == 75.0 and len(cfg.sweep) == 31


def test_p_bar_key():
    assert parse_config("p_bar_mw = 0.005").p_bar_mw == 0.005
    assert parse_config("p_bar_dbm = -10").p_bar_mw == pytest.approx(0.1)
    assert parse_config("p_total_mw = 1000").p_total_dbm == pytest.approx(30.0)


def test_unknown_method_reports_line():
    with pytest.raises(ParseError) as info:
        parse_config('trials = 3\nmethods = ["m9"]\n')
    assert info.value.line == 2 and "m9" in str(info.value)


def test_unknown_key_reports_line():
    with pytest.raises(ParseError) as info:
        parse_config("seed = 1\n\nbogus = 2\n")
    assert info.value.line == 3


@pytest.mark.parametrize(
    "text",
    [
        "p_bar_mw = 0.1\np_bar_dbm = -10",  # both units for one quantity
        "p_bar_mw = -1",
        "trials = 2.5",
        "trials = 0",
        'case = "case3"',
        'case = "case2"\nsweep_niu_x_m = [0.0]',
        "sweep_p_total_dbm = [10]",
        "sweep_niu_x_m = []",
        "channel_model = 3",
        "independent_ris_shadowing = 1",
        "fc_ghz = nan",
        "[table]\nx = 1",
        "trials = ",
    ],
)
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_malformed_document_carries_line():
    with pytest.raises(ParseError) as info:
        parse_config("seed = 1\ntrials = = 2\n")
    assert info.value.line == 2


def test_case2_defaults():
    cfg = parse_config('case = "case2"')
    assert cfg.channel_model == "multipath" and cfg.ris_pos == (-70.0, 10.0)
    assert cfg.sweep[0] == 0.0


@pytest.mark.parametrize("name", ["fig4", "fig5", "fig6"])
def test_round_trip(name):
    cfg = preset(name)
    assert parse_config(emit_config(cfg)) == cfg


def test_round_trip_with_overrides():
    cfg = parse_config('case = "case2"\nris_x_m = -30\naod_offset_rad = 0.39269908169872414\n'
                       'sweep_p_total_dbm = [1, 2.5]\nmethods = ["m2", "m3-dft"]\nseed = 7')
    assert parse_config(emit_config(cfg)) == cfg
    assert cfg.ris_pos == (-30.0, 10.0) and cfg.sweep == (1.0, 2.5)


def test_presets():
    f4, f5, f6 = preset("fig4"), preset("fig5"), preset("fig6")
    assert (f4.case, f4.p_bar_mw) == ("case1", 0.005)
    assert (f5.case, f5.p_bar_mw) == ("case1", 0.5)
    assert (f6.case, f6.p_bar_mw, f6.channel_model) == ("case2", 0.1, "multipath")
    assert f6.aod_offset_rad == pytest.approx(math.pi / 16)
    for cfg in (f4, f5, f6):
        assert (cfg.n_t, cfg.n_ris, cfg.fc_ghz, cfg.bandwidth_hz) == (32, 100, 28.0, 1e8)
        assert (cfg.noise_dbm_per_hz, cfg.noise_figure_db) == (-174.0, 10.0)
        assert (cfg.gain_bs_dbi, cfg.gain_ris_dbi, cfg.gain_ue_dbi) == (18.0, 18.0, 0.0)
    assert f4.p_total_dbm == 43.0
    with pytest.raises(ConfigError, match="fig4, fig5, fig6"):
        preset("fig7")


def test_config_overlays_preset():
    cfg = parse_config("trials = 5", base=preset("fig6"))
    assert cfg.case == "case2" and cfg.trials == 5 and cfg.p_bar_mw == 0.1


def _result(methods=("m1",), sweep=(0.0,)):
    n, m = len(sweep), len(methods)
    r = np.random.default_rng(0)
    return SweepResult(
        sweep_values=np.array(sweep), methods=methods, mean=r.uniform(1e8, 2e9, (n, m)),
        stderr=r.uniform(1e5, 1e7, (n, m)), violations=np.zeros((n, m), int),
        valid=np.full(n, 10), mean_p_n_tx=np.ones(n),
    )


def test_csv_single_point():
    text = emit_csv(_result())
    lines = text.splitlines()
    assert len(lines) == 2
    assert lines[0] == "sweep_value,m1_rate_bps,m1_stderr,m1_violations"


def test_csv_column_order_and_sorted_rows():
    res = _result(methods=("m3-ao", "m1", "no-constraint"), sweep=(10.0, -5.0, 3.0))
    header, *rows = emit_csv(res).splitlines()
    cols = header.split(",")
    assert cols[1::3] == ["m3-ao_rate_bps", "m1_rate_bps", "no-constraint_rate_bps"]
    assert [float(r.split(",")[0]) for r in rows] == [-5.0, 3.0, 10.0]


def test_csv_round_trip_nine_digits():
    res = _result(methods=("a", "b"), sweep=(1.0, 2.0, 3.0))
    back = parse_csv(emit_csv(res))
    for j, m in enumerate(res.methods):
        np.testing.assert_allclose(back[f"{m}_rate_bps"], res.mean[:, j], rtol=5e-9)
        np.testing.assert_allclose(back[f"{m}_stderr"], res.stderr[:, j], rtol=5e-9)


def test_cli_run_and_reproduce_from_manifest(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('sweep_niu_x_m = [-20, 20]\ntrials = 3\nn_t = 4\nn_ris = 16\nmethods = ["m2", "m3-ao"]\n')
    out = tmp_path / "a"
    assert main(["--config", str(cfg), "--out", str(out), "--seed", "5"]) == 0
    csv_text = (tmp_path / "a.csv").read_text()
    manifest = json.loads((tmp_path / "a.manifest").read_text())
    assert manifest["seed"] == 5 and "seed = 5" in manifest["config"]
    assert manifest["started"] <= manifest["finished"]
    assert main(["--config", str(tmp_path / "a.manifest"), "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "b.csv").read_text() == csv_text


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('methods = ["m9"]\n')
    assert main(["--config", str(bad), "--out", str(tmp_path / "x")]) == 1
    assert main(["--config", str(tmp_path / "missing.toml")]) == 1
    assert main(["--preset", "fig6", "--trials", "0"]) == 1
    assert main(["--preset", "fig6", "--seed", str(2**64)]) == 1
    assert "config error" in capsys.readouterr().err


def test_cli_runtime_error(tmp_path, monkeypatch):
    from emfe_ris import cli

    def boom(config, threads=1):
        raise RuntimeError("disk on fire")

    monkeypatch.setattr(cli, "run_sweep", boom)
    assert main(["--preset", "fig6", "--trials", "1", "--out", str(tmp_path / "x")]) == 2

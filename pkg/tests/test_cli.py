import json

import numpy as np
import pytest

from lobflow.cli import main, parse_clock
from lobflow.errors import ConfigError


def run_cli(*argv):
    return main(list(argv))


def test_parse_clock():
    assert parse_clock("10:00") == 36_000_000_000_000
    assert parse_clock("15:45") == 56_700_000_000_000
    assert parse_clock("9:30:15") == (9 * 3600 + 30 * 60 + 15) * 10**9
    assert parse_clock("123456789") == 123456789
    with pytest.raises(ConfigError):
        parse_clock("ten o'clock")


def test_pi_demo_reference_output(capsys):
    rc = run_cli("pi-demo", "--levels", "8000,10000,7000,15000", "--N", "30000")
    out = capsys.readouterr().out
    assert rc == 0
    assert "PI_30000 = 9/5 ticks = 1.800000" in out
    assert "0.0613 ticks/1000 shares" in out
    assert "8159.6" in out


def test_pi_demo_intercept_flag(capsys):
    rc = run_cli("pi-demo", "--levels", "8000,10000,7000,15000",
                 "--N", "30000", "--intercept")
    out = capsys.readouterr().out
    assert rc == 0 and "with intercept" in out
    assert "0.0473" in out


def _synth(tmp_path, name="msgs.ndjson", *extra):
    path = tmp_path / name
    rc = run_cli("synth", "--seed", "5", "--buckets", "8",
                 "--bucket-volume", "1000", "--output", str(path), *extra)
    assert rc == 0
    return path


def test_synth_deterministic_output_files(tmp_path):
    a = _synth(tmp_path, "a.ndjson")
    b = _synth(tmp_path, "b.ndjson")
    assert a.read_text() == b.read_text()


def test_full_pipeline_round_trip(tmp_path, capsys):
    msgs = _synth(tmp_path)
    buckets = tmp_path / "buckets.csv"
    rc = run_cli("bucket", "--input", str(msgs), "--bucket-volume", "1000",
                 "--session-end", "23:59", "--output", str(buckets))
    assert rc == 0
    assert buckets.exists()

    feats = tmp_path / "features.csv"
    rc = run_cli("features", "--input", str(buckets), "--output", str(feats),
                 "--lags", "1,2", "--vpin-window", "2")
    assert rc == 0

    report = tmp_path / "netliq.txt"
    rc = run_cli("fit-netliq", "--input", str(buckets), "--output", str(report))
    assert rc == 0
    text = report.read_text()
    assert "beta" in text and "r_squared" in text

    acf_csv = tmp_path / "acf.csv"
    rc = run_cli("acf", "--input", str(buckets), "--column", "ti",
                 "--max-lag", "3", "--output", str(acf_csv))
    assert rc == 0
    assert acf_csv.read_text().count("\n") >= 4


def test_bucket_mode_synth_to_netliq_recovers_beta(tmp_path, capsys):
    buckets = tmp_path / "linear.csv"
    rc = run_cli("synth", "--mode", "bucket", "--samples", "10000",
                 "--alpha", "0.0,1.0,0.6", "--sigma", "0.1", "--seed", "3",
                 "--bucket-volume", "20000", "--output", str(buckets))
    assert rc == 0
    rc = run_cli("fit-netliq", "--input", str(buckets))
    out = capsys.readouterr().out
    assert rc == 0
    beta = float([ln for ln in out.splitlines() if ln.startswith("beta")][0]
                 .split(":")[1])
    assert beta == pytest.approx(0.6, abs=0.02)


def test_scarce_then_logistic(tmp_path, capsys):
    buckets = tmp_path / "linear.csv"
    run_cli("synth", "--mode", "bucket", "--samples", "4000",
            "--alpha", "0.0,1.0,0.4", "--sigma", "0.3", "--seed", "6",
            "--bucket-volume", "10000", "--output", str(buckets))
    feats = tmp_path / "features.csv"
    assert run_cli("features", "--input", str(buckets), "--output", str(feats),
                   "--lags", "1,2", "--vpin-window", "2") == 0
    labels = tmp_path / "labels.csv"
    assert run_cli("scarce", "--input", str(buckets),
                   "--output", str(labels)) == 0
    out = capsys.readouterr().out
    assert "scarce ask" in out
    rc = run_cli("fit-logistic", "--input", str(feats), "--labels", str(labels),
                 "--side", "A")
    out = capsys.readouterr().out
    assert rc == 0
    assert "calibration" in out and "deviance" in out


def test_replay_outputs(tmp_path, capsys):
    msgs = _synth(tmp_path)
    cleaned = tmp_path / "clean.ndjson"
    snap = tmp_path / "book.csv"
    rc = run_cli("replay", "--input", str(msgs), "--session-end", "23:59",
                 "--output", str(cleaned), "--snapshot-out", str(snap))
    out = capsys.readouterr().out
    assert rc == 0
    assert "replayed" in out and "msg/s" in out
    header = snap.read_text().splitlines()[0]
    assert header == "ts,side,level_index,price_ticks,volume"
    # cleaned stream is accepted unchanged downstream
    rc = run_cli("bucket", "--input", str(cleaned), "--bucket-volume", "1000",
                 "--session-end", "23:59", "--output", str(tmp_path / "b.csv"))
    assert rc == 0


def test_corr_artifact(tmp_path):
    msgs = _synth(tmp_path)
    corr = tmp_path / "corr.csv"
    tox = tmp_path / "tox.csv"
    rc = run_cli("corr", "--input", str(msgs), "--session-end", "23:59",
                 "--corr-subbucket", "2", "--corr-window", "20",
                 "--output", str(corr), "--tox-out", str(tox),
                 "--tox-window", "10")
    assert rc == 0
    assert corr.read_text().splitlines()[0] == "ts_ns,rho_bid,rho_ask"
    assert tox.read_text().splitlines()[0] == "trade_index,ts_ns,rho_tox"


def test_config_file_merging_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 5, "buckets": 8, "bucket_volume": 1000}))
    a = tmp_path / "a.ndjson"
    assert run_cli("synth", "--config", str(cfg), "--output", str(a)) == 0
    b = _synth(tmp_path, "b.ndjson")
    assert a.read_text() == b.read_text()
    # the flag overrides the config value: different stream
    c = tmp_path / "c.ndjson"
    assert run_cli("synth", "--config", str(cfg), "--seed", "99",
                   "--output", str(c)) == 0
    assert c.read_text() != b.read_text()


def test_exit_code_2_on_config_errors(tmp_path):
    assert run_cli("bucket", "--input", str(tmp_path / "missing.ndjson"),
                   "--output", str(tmp_path / "x.csv")) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    msgs = _synth(tmp_path)
    assert run_cli("bucket", "--input", str(msgs), "--config", str(bad),
                   "--output", str(tmp_path / "x.csv")) == 2


def test_exit_code_3_on_data_errors(tmp_path):
    bad = tmp_path / "bad.ndjson"
    bad.write_text('{"ts":1,"kind":"ADD","order_id":1,"side":"B",'
                   '"price":10,"size":0}\n')
    assert run_cli("bucket", "--input", str(bad), "--output",
                   str(tmp_path / "x.csv")) == 3
    # strict parse aborts on the malformed line
    mixed = tmp_path / "mixed.ndjson"
    mixed.write_text(
        '{"ts":36000000000001,"kind":"ADD","order_id":1,"side":"B",'
        '"price":10,"size":5}\n'
        'garbage\n')
    assert run_cli("replay", "--input", str(mixed), "--strict") == 3


def test_exit_code_4_on_numerical_failure(tmp_path, capsys):
    # constant dp: the TI-response residuals have zero variance
    buckets = tmp_path / "flat.csv"
    run_cli("synth", "--mode", "bucket", "--samples", "1000",
            "--alpha", "0.0,0.0,0.0", "--sigma", "0.0", "--seed", "1",
            "--bucket-volume", "5000", "--output", str(buckets))
    rc = run_cli("scarce", "--input", str(buckets),
                 "--output", str(tmp_path / "labels.csv"))
    assert rc == 4

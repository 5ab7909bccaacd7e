import io

import numpy as np
import pytest

from lobflow import (
    BookState,
    Kind,
    SessionConfig,
    Side,
    SynthConfig,
    bucketize_session,
    generate_session,
    sample_linear_buckets,
    write_ndjson,
)
from lobflow.errors import InvalidConfig
from lobflow.features import fit_ti_response
from lobflow.models import ols_fit


def test_same_seed_byte_identical():
    cfg = SynthConfig(seed=77, n_buckets=5, bucket_volume=600)
    bufs = []
    for msgs in (generate_session(cfg), generate_session(cfg)):
        buf = io.StringIO()
        write_ndjson(msgs, buf)
        bufs.append(buf.getvalue())
    assert bufs[0] == bufs[1]


def test_different_seed_differs():
    a = generate_session(SynthConfig(seed=1, n_buckets=3, bucket_volume=600))
    b = generate_session(SynthConfig(seed=2, n_buckets=3, bucket_volume=600))
    assert a != b


def test_stream_replays_clean_with_nonempty_books():
    for seed in range(5):
        msgs = generate_session(SynthConfig(seed=seed, n_buckets=4,
                                            bucket_volume=700))
        book = BookState()
        for m in msgs:
            book.apply(m)
        assert not book.empty(Side.BID) and not book.empty(Side.ASK)
        assert book.best(Side.ASK) > book.best(Side.BID)


def test_executed_volume_meets_target():
    cfg = SynthConfig(seed=6, n_buckets=12, bucket_volume=900)
    msgs = generate_session(cfg)
    executed = sum(m.size for m in msgs if m.kind is Kind.EXECUTE)
    assert executed >= 12 * 900


def test_buy_fraction_calibration():
    cfg = SynthConfig(seed=8, n_buckets=400, bucket_volume=2000,
                      buy_fraction=0.7, sign_persistence=0.5,
                      mean_trade=300, limit_rate=2.0)
    msgs = generate_session(cfg)
    trades = [m for m in msgs if m.kind is Kind.EXECUTE]
    assert len(trades) >= 2000
    buys = sum(1 for m in trades if m.side is Side.BID)
    assert buys / len(trades) == pytest.approx(0.7, abs=0.02)


def test_zero_cancel_intensity_means_no_cancel_flow():
    cfg = SynthConfig(seed=9, n_buckets=6, bucket_volume=800,
                      cancel_fraction=0.0)
    msgs = generate_session(cfg)
    assert all(m.kind in (Kind.ADD, Kind.EXECUTE) for m in msgs)
    scfg = SessionConfig(bucket_volume=800, session_start=cfg.session_start,
                         session_end=msgs[-1].ts + 1)
    series = bucketize_session(msgs, scfg)
    assert all(r.vl_cancel_bid == 0 and r.vl_cancel_ask == 0
               for r in series.records)


def test_invalid_configs_rejected():
    with pytest.raises(InvalidConfig):
        SynthConfig(mode="stream")
    with pytest.raises(InvalidConfig):
        SynthConfig(bucket_volume=0)
    with pytest.raises(InvalidConfig):
        SynthConfig(buy_fraction=1.5)
    with pytest.raises(InvalidConfig):
        generate_session(SynthConfig(mode="bucket"))
    with pytest.raises(InvalidConfig):
        sample_linear_buckets(SynthConfig(mode="message"))


def test_bucket_mode_exact_recovery_without_noise():
    series = sample_linear_buckets(SynthConfig(
        seed=10, mode="bucket", n_samples=500,
        alpha=(0.25, 1.1, 0.45), noise_sigma=0.0))
    V = series.session.bucket_volume
    ti = np.array([r.ti for r in series.records])
    nl = np.array([(r.vl_bid - r.vl_ask) / V for r in series.records])
    dp = np.array([float(r.delta_p) for r in series.records])
    fit = ols_fit(np.column_stack([ti, nl]), dp, names=["TI", "NL"])
    assert fit.coefficient("intercept") == pytest.approx(0.25, abs=1e-10)
    assert fit.coefficient("TI") == pytest.approx(1.1, abs=1e-10)
    assert fit.coefficient("NL") == pytest.approx(0.45, abs=1e-10)


def test_bucket_mode_zero_coefficient_statistically_zero():
    series = sample_linear_buckets(SynthConfig(
        seed=11, mode="bucket", n_samples=10_000,
        alpha=(0.0, 1.0, 0.0), noise_sigma=0.1))
    V = series.session.bucket_volume
    ti = np.array([r.ti for r in series.records])
    nl = np.array([(r.vl_bid - r.vl_ask) / V for r in series.records])
    dp = np.array([float(r.delta_p) for r in series.records])
    fit = ols_fit(np.column_stack([ti, nl]), dp, names=["TI", "NL"])
    i = fit.names.index("NL")
    assert abs(fit.coef[i]) < 3 * fit.std_errors[i]


def test_hockey_stick_modulation_bends_limit_flow():
    cfg = SynthConfig(seed=12, n_buckets=150, bucket_volume=1500,
                      ti_cancel_slope=3.0, ti_kink=0.2,
                      sign_persistence=0.85)
    msgs = generate_session(cfg)
    scfg = SessionConfig(bucket_volume=1500, session_start=cfg.session_start,
                         session_end=msgs[-1].ts + 1)
    series = bucketize_session(msgs, scfg)
    fit_ask, _ = fit_ti_response(series, "vl_ask")
    fit_bid, _ = fit_ti_response(series, "vl_bid")
    # liquidity provision collapses on the pressured side
    assert fit_ask.predict(np.array([0.9]))[0] < fit_ask.predict(np.array([0.0]))[0] - 0.2
    assert fit_bid.predict(np.array([-0.9]))[0] < fit_bid.predict(np.array([0.0]))[0] - 0.2

"""Command-line pipeline over files.

Each subcommand reads one artifact, invokes the corresponding library
operations, and writes CSV or plain-text report outputs, so stages compose
through the filesystem:

    lobflow synth --seed 7 --output msgs.ndjson
    lobflow bucket --input msgs.ndjson --bucket-volume 2000 --output buckets.csv
    lobflow fit-netliq --input buckets.csv --output netliq.txt

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure. Every tunable is available both as a flag and as a key in a JSON
config file passed via --config (underscored flag names); flags win.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import buckets as bk
from . import features as ft
from . import messages as ms
from . import metrics as mt
from . import models as md
from . import synth as sy
from .book import BookState, Snapshot, replay, seed_book
from .errors import ConfigError, DataError, LobflowError, NumericalError

NS_PER_SEC = 1_000_000_000


def parse_clock(value: str) -> int:
    """Wall clock 'HH:MM[:SS]' or raw integer nanoseconds since midnight."""
    s = str(value).strip()
    if ":" in s:
        parts = s.split(":")
        if len(parts) not in (2, 3) or not all(p.isdigit() for p in parts):
            raise ConfigError(f"cannot parse time {value!r}")
        h, m = int(parts[0]), int(parts[1])
        sec = int(parts[2]) if len(parts) == 3 else 0
        return (h * 3600 + m * 60 + sec) * NS_PER_SEC
    try:
        return int(s)
    except ValueError:
        raise ConfigError(f"cannot parse time {value!r}")


def _int_list(value: str) -> list[int]:
    try:
        return [int(v) for v in str(value).split(",") if v != ""]
    except ValueError:
        raise ConfigError(f"cannot parse integer list {value!r}")


def _float_list(value: str) -> list[float]:
    try:
        return [float(v) for v in str(value).split(",") if v != ""]
    except ValueError:
        raise ConfigError(f"cannot parse float list {value!r}")


# Defaults applied after merging flags with the config file (flags win).
# Generator knobs come from the SynthConfig dataclass so the CLI cannot
# drift from the library defaults.
_SYN = sy.SynthConfig()
DEFAULTS = {
    "format": "ndjson",
    "tick_size": 0.01,
    "session_start": "10:00",
    "session_end": "15:45",
    "bucket_volume": _SYN.bucket_volume,
    "sl_multiplier": 1.5,
    "knots": 10,
    "lags": "1,5,10,20",
    "vpin_window": 20,
    "corr_window": 5400.0,
    "corr_subbucket": 30.0,
    "tox_window": 200,
    "seed": 0,
    "side": "both",
    "column": "ti",
    "max_lag": 20,
    "y_column": "dp",
    "ridge": 1e-6,
    "mode": _SYN.mode,
    "buckets": _SYN.n_buckets,
    "base_price": _SYN.base_price,
    "levels": _SYN.levels,
    "level_depth": _SYN.level_volume,
    "orders_per_level": _SYN.orders_per_level,
    "mean_trade": _SYN.mean_trade,
    "max_trade": _SYN.max_trade,
    "limit_rate": _SYN.limit_rate,
    "cancel_intensity": _SYN.cancel_fraction,
    "buy_fraction": _SYN.buy_fraction,
    "persistence": _SYN.sign_persistence,
    "ti_kink": _SYN.ti_kink,
    "ti_slope": _SYN.ti_cancel_slope,
    "mean_gap_ns": _SYN.mean_gap_ns,
    "samples": _SYN.n_samples,
    "alpha": ",".join(str(a) for a in _SYN.alpha),
    "sigma": _SYN.noise_sigma,
    "demo_levels": "8000,10000,7000,15000",
    "demo_n": 30000,
    "spread": 1,
    "metrics_every": 0,
}


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    cfg = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file {path} not found")
        try:
            cfg = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    for key, val in vars(args).items():
        if val is None:
            if key in cfg:
                setattr(args, key, cfg[key])
            elif key in DEFAULTS:
                setattr(args, key, DEFAULTS[key])
    return args


def _session_config(args) -> ms.SessionConfig:
    return ms.SessionConfig(
        tick_size=float(args.tick_size),
        session_start=parse_clock(args.session_start),
        session_end=parse_clock(args.session_end),
        bucket_volume=int(args.bucket_volume),
        tima_beta=float(args.tima_beta) if getattr(args, "tima_beta", None)
        else None,
        symbol=getattr(args, "symbol", None) or "",
    )


def _read_messages(args) -> tuple[list[ms.Message], list[ms.ParseDiagnostic]]:
    path = Path(args.input)
    if not path.exists():
        raise ConfigError(f"input file {path} not found")
    fmt = args.format
    if fmt not in ("ndjson", "csv"):
        raise ConfigError(f"unknown format {fmt!r}")
    msgs, diags = ms.parse_stream(path.read_text(), fmt,
                                  strict=bool(args.strict))
    if not msgs:
        raise DataError(f"no messages decoded from {path}")
    return msgs, diags


def _write_messages(messages, path: Path, fmt: str) -> None:
    with path.open("w") as out:
        if fmt == "csv":
            ms.write_csv(messages, out)
        else:
            ms.write_ndjson(messages, out)


def _load_series(path_str: str) -> bk.FlowSeries:
    path = Path(path_str)
    if not path.exists():
        raise ConfigError(f"input file {path} not found")
    return bk.read_bucket_csv(path.read_text())


def _prepare(msgs, cfg) -> tuple[list[ms.Message], list[ms.Message], BookState]:
    sliced = ms.filter_session(ms.sort_by_ts(msgs), cfg)
    session = ms.recombine_market_orders(sliced.session)
    book = seed_book(sliced.seed)
    return sliced.seed, session, book


def _series_column(series: bk.FlowSeries, name: str) -> np.ndarray:
    V = float(series.session.bucket_volume)
    pull = {
        "ti": lambda r: r.ti,
        "dp": lambda r: float(r.delta_p),
        "vl_bid": lambda r: r.vl_bid / V,
        "vl_ask": lambda r: r.vl_ask / V,
        "tima": lambda r: r.tima,
        "duration": lambda r: r.duration / NS_PER_SEC,
    }.get(name)
    if pull is None:
        raise ConfigError(f"unknown series column {name!r}")
    return np.array([pull(r) for r in series.records])


# --- subcommands ---------------------------------------------------------------

def cmd_synth(args) -> int:
    if args.mode == "bucket":
        cfg = sy.SynthConfig(
            seed=int(args.seed), mode="bucket",
            bucket_volume=int(args.bucket_volume),
            n_samples=int(args.samples),
            alpha=tuple(_float_list(args.alpha)),
            noise_sigma=float(args.sigma),
        )
        series = sy.sample_linear_buckets(cfg)
        with Path(args.output).open("w") as out:
            bk.write_bucket_csv(series, out)
        print(f"wrote {len(series)} sampled buckets to {args.output}")
        return 0

    cfg = sy.SynthConfig(
        seed=int(args.seed), mode="message",
        bucket_volume=int(args.bucket_volume),
        n_buckets=int(args.buckets),
        base_price=int(args.base_price),
        levels=int(args.levels),
        level_volume=int(args.level_depth),
        orders_per_level=int(args.orders_per_level),
        mean_trade=int(args.mean_trade),
        max_trade=int(args.max_trade),
        limit_rate=float(args.limit_rate),
        cancel_fraction=float(args.cancel_intensity),
        buy_fraction=float(args.buy_fraction),
        sign_persistence=float(args.persistence),
        ti_kink=float(args.ti_kink),
        ti_cancel_slope=float(args.ti_slope),
        mean_gap_ns=int(args.mean_gap_ns),
        session_start=parse_clock(args.session_start),
    )
    messages = sy.generate_session(cfg)
    _write_messages(messages, Path(args.output), args.format)
    last_ts = messages[-1].ts
    print(f"wrote {len(messages)} messages to {args.output} "
          f"(last ts {last_ts}; pass --session-end >= this downstream)")
    return 0


def cmd_replay(args) -> int:
    msgs, diags = _read_messages(args)
    cfg = _session_config(args)
    t0 = time.perf_counter()
    seed, session, book = _prepare(msgs, cfg)
    replay(book, session)
    elapsed = time.perf_counter() - t0
    n = len(seed) + len(session)
    rate = n / elapsed if elapsed > 0 else float("inf")
    print(f"replayed {n} messages in {elapsed:.3f}s ({rate:,.0f} msg/s); "
          f"{len(diags)} malformed lines skipped")
    try:
        snap = book.snapshot(5)
        print(f"final book: best bid {snap.best_bid} x {snap.bids[0][1]}, "
              f"best ask {snap.best_ask} x {snap.asks[0][1]}")
    except LobflowError:
        print("final book: one side empty")

    if args.output:
        _write_messages(seed + session, Path(args.output), args.format)
        print(f"wrote {len(seed) + len(session)} pre-processed messages "
              f"to {args.output}")
    if args.snapshot_out:
        snap = book.snapshot(30)
        with Path(args.snapshot_out).open("w") as out:
            out.write("ts,side,level_index,price_ticks,volume\n")
            for side_name, levels in (("B", snap.bids), ("A", snap.asks)):
                for i, (price, vol) in enumerate(levels, start=1):
                    out.write(f"{snap.ts},{side_name},{i},{price},{vol}\n")
        print(f"wrote final book snapshot to {args.snapshot_out}")
    if args.metrics_out:
        every = int(args.metrics_every) or 1000
        book2 = seed_book(seed)
        with Path(args.metrics_out).open("w") as out:
            out.write(mt.METRICS_CSV_HEADER + "\n")
            for i, m in enumerate(session, start=1):
                book2.apply(m)
                if i % every == 0:
                    sm = mt.compute_static_metrics(book2.snapshot(30), 1000)
                    out.write(mt.metrics_csv_row(m.ts, sm) + "\n")
        print(f"wrote sampled metrics to {args.metrics_out}")
    return 0


def cmd_bucket(args) -> int:
    msgs, _ = _read_messages(args)
    cfg = _session_config(args)
    t0 = time.perf_counter()
    series = bk.bucketize_session(
        msgs, cfg,
        pi_n=int(args.pi_n) if args.pi_n else None)
    elapsed = time.perf_counter() - t0
    with Path(args.output).open("w") as out:
        bk.write_bucket_csv(series, out)
    partial = 1 if series.final_partial is not None else 0
    zero = sum(1 for r in series.records if r.zero_duration)
    print(f"wrote {len(series)} complete buckets (+{partial} partial, "
          f"{zero} zero-duration) to {args.output} in {elapsed:.3f}s")
    return 0


def cmd_features(args) -> int:
    series = _load_series(args.input)
    fm = ft.build_feature_matrix(
        series,
        lags=_int_list(args.lags),
        vpin_window=int(args.vpin_window) if int(args.vpin_window) > 0 else None,
    )
    with Path(args.output).open("w") as out:
        ft.write_features_csv(fm, out)
    print(f"wrote {len(fm.y)} feature rows x {len(fm.columns)} columns "
          f"to {args.output}")
    return 0


def cmd_fit_ti(args) -> int:
    series = _load_series(args.input)
    fit, _ = ft.fit_ti_response(series, y_column=args.y_column,
                                knots=int(args.knots))
    lines = [
        f"response: {args.y_column}",
        f"model: penalized cubic spline, {args.knots} interior knots",
        f"n: {len(fit.residuals)}",
        f"penalty lambda: {fit.penalty:g}",
        f"gcv: {fit.gcv:.6g}",
        f"r_squared: {fit.r2:.4f}",
    ]
    report = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(report)
    print(report, end="")
    if args.curve_out:
        grid = np.linspace(-1, 1, 81)
        vals = fit.predict(grid)
        with Path(args.curve_out).open("w") as out:
            out.write("x,g_hat\n")
            for xv, gv in zip(grid, vals):
                out.write(f"{float(xv)!r},{float(gv)!r}\n")
        print(f"wrote fitted curve to {args.curve_out}")
    return 0


def cmd_fit_netliq(args) -> int:
    series = _load_series(args.input)
    beta, fit = ft.netliq_from_series(series)
    lines = [
        "model: dp ~ intercept + TI + NL,  NL = (VL_bid - VL_ask) / V",
        f"n: {len(fit.residuals)}",
    ]
    for name, coef, se in zip(fit.names, fit.coef, fit.std_errors):
        lines.append(f"coef {name}: {coef:.6g}  (se {se:.3g})")
    lines.append(f"r_squared: {fit.r2:.4f}")
    lines.append(f"beta (limit vs market impact): {beta:.4f}")
    report = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(report)
    print(report, end="")
    return 0


def cmd_scarce(args) -> int:
    series = _load_series(args.input)
    labels, indices, fit = ft.scarce_from_series(
        series, multiplier=float(args.sl_multiplier), knots=int(args.knots))
    with Path(args.output).open("w") as out:
        out.write(f"# threshold={labels.threshold!r} "
                  f"multiplier={labels.multiplier!r} "
                  f"freq_ask={labels.freq_ask!r} freq_bid={labels.freq_bid!r}\n")
        out.write("bucket_index,residual,sl_ask,sl_bid\n")
        for i, k in enumerate(indices):
            out.write(f"{k},{float(fit.residuals[i])!r},"
                      f"{labels.sl_ask[i]},{labels.sl_bid[i]}\n")
    print(f"labelled {len(indices)} buckets: scarce ask {labels.freq_ask:.2%}, "
          f"scarce bid {labels.freq_bid:.2%} "
          f"(threshold {labels.threshold:.3f} half-ticks)")
    return 0


def _read_labels(path_str: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    path = Path(path_str)
    if not path.exists():
        raise ConfigError(f"labels file {path} not found")
    idx, sl_a, sl_b = [], [], []
    for ln in path.read_text().splitlines():
        if not ln or ln.startswith("#") or ln.startswith("bucket_index"):
            continue
        parts = ln.split(",")
        idx.append(int(parts[0]))
        sl_a.append(int(parts[2]))
        sl_b.append(int(parts[3]))
    return (np.array(idx, dtype=np.int64), np.array(sl_a, dtype=np.int64),
            np.array(sl_b, dtype=np.int64))


def cmd_fit_logistic(args) -> int:
    fm = ft.read_features_csv(Path(args.input).read_text())
    idx, sl_a, sl_b = _read_labels(args.labels)
    side = args.side.upper()
    if side in ("A", "ASK"):
        wanted = dict(zip(idx.tolist(), sl_a.tolist()))
    elif side in ("B", "BID"):
        wanted = dict(zip(idx.tolist(), sl_b.tolist()))
    else:
        raise ConfigError(f"--side must be A or B, got {args.side!r}")
    keep = [i for i, k in enumerate(fm.bucket_index) if int(k) in wanted]
    if not keep:
        raise DataError("no overlap between feature rows and labels")
    X = fm.X[keep]
    y = np.array([wanted[int(fm.bucket_index[i])] for i in keep], dtype=float)
    fit = md.logistic_fit(X, y, ridge=float(args.ridge), names=fm.columns)
    lines = [
        f"model: logistic scarce-liquidity ({side} side), "
        f"ridge {float(args.ridge):g}",
        f"n: {len(y)}  positives: {int(y.sum())}  iterations: {fit.n_iter}",
        f"deviance: {fit.deviance:.4f}",
    ]
    for name, coef, se in zip(fit.names, fit.coef, fit.std_errors):
        lines.append(f"coef {name}: {coef:.6g}  (se {se:.3g})")
    cal = fit.calibration
    lines.append("calibration (% of rows): "
                 f"low[{cal['no_sl_low']:.2f}/{cal['sl_low']:.2f}] "
                 f"med[{cal['no_sl_med']:.2f}/{cal['sl_med']:.2f}] "
                 f"high[{cal['no_sl_high']:.2f}/{cal['sl_high']:.2f}] "
                 "(no-SL/SL)")
    report = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(report)
    print(report, end="")
    return 0


def cmd_acf(args) -> int:
    series = _load_series(args.input)
    x = _series_column(series, args.column)
    lags, vals, band = md.acf(x, max_lag=int(args.max_lag))
    with Path(args.output).open("w") as out:
        out.write(f"# column={args.column} n={len(x)} band={band!r}\n")
        out.write("lag,acf,band\n")
        for lag, v in zip(lags, vals):
            out.write(f"{lag},{float(v)!r},{band!r}\n")
    outside = int(np.sum(np.abs(vals) > band))
    print(f"acf({args.column}) over {len(lags)} lags: {outside} outside "
          f"the +-{band:.4f} band; wrote {args.output}")
    return 0


def cmd_corr(args) -> int:
    msgs, _ = _read_messages(args)
    cfg = _session_config(args)
    _, session, book = _prepare(msgs, cfg)
    width = int(float(args.corr_subbucket) * NS_PER_SEC)
    window = int(float(args.corr_window) * NS_PER_SEC)
    grid = bk.time_flow_grid(session, book, cfg, width)
    times = grid.times()
    out_cols = {"ts_ns": times}
    sides = ((ms.Side.BID, "rho_bid"), (ms.Side.ASK, "rho_ask"))
    if args.side in ("bid", "ask"):
        sides = tuple(s for s in sides if s[0].name.lower() == args.side)
    for side, name in sides:
        _, rho = bk.rolling_flow_correlation(grid, side, window)
        out_cols[name] = rho
    with Path(args.output).open("w") as out:
        out.write(",".join(out_cols.keys()) + "\n")
        for i in range(len(times)):
            cells = [str(int(times[i]))]
            cells += [repr(float(col[i])) for name, col in out_cols.items()
                      if name != "ts_ns"]
            out.write(",".join(cells) + "\n")
    defined = {name: int(np.sum(np.isfinite(col)))
               for name, col in out_cols.items() if name != "ts_ns"}
    print(f"wrote {len(times)} sub-buckets of {args.corr_subbucket}s to "
          f"{args.output}; defined windows: {defined}")

    if args.tox_out:
        series = bk.bucketize(session, seed_book(_prepare(msgs, cfg)[0]), cfg)
        rho = bk.toxicity_correlation(series.tape, window=int(args.tox_window))
        with Path(args.tox_out).open("w") as out:
            out.write("trade_index,ts_ns,rho_tox\n")
            for i in range(len(rho)):
                out.write(f"{i},{int(series.tape.ts[i])},{float(rho[i])!r}\n")
        print(f"wrote per-trade toxicity correlation to {args.tox_out}")
    return 0


def cmd_pi_demo(args) -> int:
    vols = _int_list(args.demo_levels)
    if not vols or any(v <= 0 for v in vols):
        raise ConfigError("--levels must be positive share counts")
    spread = int(args.spread)
    if spread < 1:
        raise ConfigError("--spread must be >= 1 tick")
    base = 2500
    asks = tuple((base + spread + i, v) for i, v in enumerate(vols))
    bids = tuple((base - i, v) for i, v in enumerate(vols))
    snap = Snapshot(ts=0, bids=bids, asks=asks)
    n = int(args.demo_n)
    pi = mt.execution_cost_PI(snap, n, ms.Side.ASK)
    slope = mt.impact_slope(snap, n, ms.Side.ASK,
                            intercept=bool(args.intercept))
    print(f"ask ladder: {', '.join(str(v) for v in vols)} shares; "
          f"spread {spread} tick(s)")
    print(f"PI_{n} = {pi} ticks = {float(pi):.6f}")
    print(f"impact slope = {slope:.6e} ticks/share "
          f"= {slope * 1000:.4f} ticks/1000 shares"
          + (" (with intercept)" if args.intercept else ""))
    print(f"implied average depth 0.5/S = {0.5 / slope:.1f} shares")
    return 0


# --- parser -----------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, *groups: str) -> None:
    p.add_argument("--config", help="JSON config file; flags take precedence")
    if "input" in groups:
        p.add_argument("--input", required=True, help="input artifact path")
    if "format" in groups:
        p.add_argument("--format", choices=["ndjson", "csv"], default=None,
                       help="message file format (default ndjson)")
        p.add_argument("--strict", action="store_const", const=True,
                       default=None,
                       help="abort on the first malformed line")
    if "session" in groups:
        p.add_argument("--tick-size", dest="tick_size", type=float)
        p.add_argument("--session-start", dest="session_start")
        p.add_argument("--session-end", dest="session_end")
        p.add_argument("--bucket-volume", dest="bucket_volume", type=int)
        p.add_argument("--tima-beta", dest="tima_beta", type=float,
                       help="trade-sign EWMA decay (default 0.5/V)")
        p.add_argument("--symbol")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lobflow",
        description="order book replay, volume bucketing and liquidity fits")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic session")
    _add_common(p, "format", "session")
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=["message", "bucket"])
    p.add_argument("--buckets", type=int, help="executed-volume target")
    p.add_argument("--base-price", dest="base_price", type=int)
    p.add_argument("--levels", type=int)
    p.add_argument("--level-depth", dest="level_depth", type=int)
    p.add_argument("--orders-per-level", dest="orders_per_level", type=int)
    p.add_argument("--mean-trade", dest="mean_trade", type=int)
    p.add_argument("--max-trade", dest="max_trade", type=int)
    p.add_argument("--limit-rate", dest="limit_rate", type=float)
    p.add_argument("--cancel-intensity", dest="cancel_intensity", type=float)
    p.add_argument("--buy-fraction", dest="buy_fraction", type=float)
    p.add_argument("--persistence", type=float)
    p.add_argument("--ti-kink", dest="ti_kink", type=float)
    p.add_argument("--ti-slope", dest="ti_slope", type=float)
    p.add_argument("--mean-gap-ns", dest="mean_gap_ns", type=int)
    p.add_argument("--samples", type=int, help="bucket mode: rows to draw")
    p.add_argument("--alpha", help="bucket mode: a0,a1,a2")
    p.add_argument("--sigma", type=float, help="bucket mode: noise stdev")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("replay", help="pre-process and replay a session")
    _add_common(p, "input", "format", "session")
    p.add_argument("--output", help="write the pre-processed stream here")
    p.add_argument("--snapshot-out", dest="snapshot_out",
                   help="final book levels CSV")
    p.add_argument("--metrics-out", dest="metrics_out",
                   help="sampled static-metrics CSV")
    p.add_argument("--metrics-every", dest="metrics_every", type=int,
                   help="sample metrics every N in-session messages")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("bucket", help="aggregate a session into volume buckets")
    _add_common(p, "input", "format", "session")
    p.add_argument("--output", required=True)
    p.add_argument("--pi-n", dest="pi_n", type=int,
                   help="order size for PI/slope (default: session Ave(D4))")
    p.set_defaults(func=cmd_bucket)

    p = sub.add_parser("features", help="build the regression feature matrix")
    _add_common(p)
    p.add_argument("--input", required=True, help="bucket CSV")
    p.add_argument("--output", required=True)
    p.add_argument("--lags", help="comma list of bucket lags")
    p.add_argument("--vpin-window", dest="vpin_window", type=int,
                   help="trailing |TI| window; 0 drops the column")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("fit-ti", help="spline fit of a bucket series on TI")
    _add_common(p)
    p.add_argument("--input", required=True, help="bucket CSV")
    p.add_argument("--output", help="report path")
    p.add_argument("--curve-out", dest="curve_out", help="fitted curve CSV")
    p.add_argument("--knots", type=int)
    p.add_argument("--y-column", dest="y_column",
                   choices=["dp", "vl_bid", "vl_ask"])
    p.set_defaults(func=cmd_fit_ti)

    p = sub.add_parser("fit-netliq", help="linear dp ~ TI + net limit flow")
    _add_common(p)
    p.add_argument("--input", required=True, help="bucket CSV")
    p.add_argument("--output", help="report path")
    p.set_defaults(func=cmd_fit_netliq)

    p = sub.add_parser("scarce", help="label scarce-liquidity buckets")
    _add_common(p)
    p.add_argument("--input", required=True, help="bucket CSV")
    p.add_argument("--output", required=True, help="labels CSV")
    p.add_argument("--sl-multiplier", dest="sl_multiplier", type=float)
    p.add_argument("--knots", type=int)
    p.set_defaults(func=cmd_scarce)

    p = sub.add_parser("fit-logistic",
                       help="logistic scarce-liquidity model on features")
    _add_common(p)
    p.add_argument("--input", required=True, help="features CSV")
    p.add_argument("--labels", required=True, help="labels CSV from scarce")
    p.add_argument("--side", help="A (ask) or B (bid)", default="A")
    p.add_argument("--ridge", type=float)
    p.add_argument("--output", help="report path")
    p.set_defaults(func=cmd_fit_logistic)

    p = sub.add_parser("acf", help="autocorrelation diagnostics")
    _add_common(p)
    p.add_argument("--input", required=True, help="bucket CSV")
    p.add_argument("--output", required=True, help="acf CSV")
    p.add_argument("--column",
                   choices=["ti", "dp", "vl_bid", "vl_ask", "tima", "duration"])
    p.add_argument("--max-lag", dest="max_lag", type=int)
    p.set_defaults(func=cmd_acf)

    p = sub.add_parser("corr", help="rolling same-side flow correlation")
    _add_common(p, "input", "format", "session")
    p.add_argument("--output", required=True, help="correlation trace CSV")
    p.add_argument("--corr-window", dest="corr_window", type=float,
                   help="trailing window, seconds")
    p.add_argument("--corr-subbucket", dest="corr_subbucket", type=float,
                   help="sub-bucket width, seconds")
    p.add_argument("--side", choices=["bid", "ask", "both"])
    p.add_argument("--tox-out", dest="tox_out",
                   help="also write per-trade toxicity correlation CSV")
    p.add_argument("--tox-window", dest="tox_window", type=int)
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("pi-demo",
                       help="execution cost and slope on a literal book")
    _add_common(p)
    p.add_argument("--levels", dest="demo_levels",
                   help="comma list of level volumes")
    p.add_argument("--N", dest="demo_n", type=int, help="order size")
    p.add_argument("--spread", type=int)
    p.add_argument("--intercept", action="store_const", const=True,
                   default=None, help="fit the slope with an intercept")
    p.set_defaults(func=cmd_pi_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

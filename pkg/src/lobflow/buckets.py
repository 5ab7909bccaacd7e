"""Executed-volume bucketing and order-flow aggregation.

The session is sliced into buckets each containing exactly V executed
shares. A trade that straddles a boundary is split: the closing bucket
receives exactly the shares it needs, the remainder opens the next bucket,
and both buckets share the boundary timestamp. A single trade spanning two
or more whole buckets yields intermediate buckets with zero duration,
flagged as such. Bucket k's price change is the mid-price move between its
open and close boundaries, in exact half-ticks.

Flow accounting within a bucket:

  VM      executed volume split by aggressor (buy / sell); sums to V
  VL      net limit-order flow at the touch per side, decomposed into
          additions and cancellations; an event counts when its price is
          at (or improves) the same-side best quote of the pre-event book
  PC      cancellation proportion, cancellations / additions per side
          (undefined when nothing was added)
  TIMA    per-trade exponentially weighted moving average of trade signs,
          weight exp(-beta * shares), beta defaulting to 0.5 / V
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .book import BookState, Snapshot, seed_book
from .errors import (
    DataError,
    EmptySide,
    ExecuteExceedsVisibleDepth,
    WindowTooLong,
)
from .messages import (
    Kind,
    Message,
    SessionConfig,
    Side,
    filter_session,
    recombine_market_orders,
    sort_by_ts,
)
from .metrics import StaticMetrics, compute_static_metrics

__all__ = [
    "BucketRecord",
    "FlowSeries",
    "TradeTape",
    "TimeFlowGrid",
    "accumulate_touch_flow",
    "tima_update",
    "bucketize",
    "bucketize_session",
    "vpin",
    "time_flow_grid",
    "rolling_flow_correlation",
    "toxicity_correlation",
    "BUCKET_CSV_COLUMNS",
    "write_bucket_csv",
    "read_bucket_csv",
]


@dataclass
class BucketRecord:
    """One executed-volume slice.

    Volumes are shares, delta_p is half-ticks (exact integers for replayed
    sessions), tima is the trade-sign EWMA after the bucket's final trade.
    """

    index: int
    t_open: int
    t_close: int
    bucket_volume: int
    vm_buy: int
    vm_sell: int
    vl_add_bid: int = 0
    vl_cancel_bid: int = 0
    vl_add_ask: int = 0
    vl_cancel_ask: int = 0
    delta_p: float = 0.0
    tima: float = 0.0
    zero_duration: bool = False
    is_final_partial: bool = False
    open_metrics: StaticMetrics | None = None
    open_snapshot: Snapshot | None = None

    @property
    def duration(self) -> int:
        return self.t_close - self.t_open

    @property
    def executed(self) -> int:
        return self.vm_buy + self.vm_sell

    @property
    def ti(self) -> float:
        v = self.executed
        return (self.vm_buy - self.vm_sell) / v if v else 0.0

    @property
    def vl_bid(self) -> int:
        return self.vl_add_bid - self.vl_cancel_bid

    @property
    def vl_ask(self) -> int:
        return self.vl_add_ask - self.vl_cancel_ask

    @property
    def pc_bid(self) -> float | None:
        return self.vl_cancel_bid / self.vl_add_bid if self.vl_add_bid else None

    @property
    def pc_ask(self) -> float | None:
        return self.vl_cancel_ask / self.vl_add_ask if self.vl_add_ask else None


@dataclass
class TradeTape:
    """Per-trade record of signed volume and the mid move across the trade.

    One entry per (recombined) EXECUTE message; mids are half-ticks and NaN
    when a book side was empty at that moment.
    """

    ts: np.ndarray
    signed_size: np.ndarray
    mid_before: np.ndarray
    mid_after: np.ndarray

    def __len__(self) -> int:
        return len(self.ts)


@dataclass
class FlowSeries:
    """Ordered complete buckets for one session, plus the flagged final
    partial bucket (excluded from statistics by default)."""

    records: list[BucketRecord]
    final_partial: BucketRecord | None
    session: SessionConfig
    pi_n: int
    tape: TradeTape | None = None

    def __len__(self) -> int:
        return len(self.records)

    def ti(self) -> np.ndarray:
        return np.array([r.ti for r in self.records])

    def delta_p(self) -> np.ndarray:
        return np.array([float(r.delta_p) for r in self.records])

    def tima_trace(self) -> np.ndarray:
        return np.array([r.tima for r in self.records])

    def vpin_trace(self, window: int) -> np.ndarray:
        return vpin(self, window)


def tima_update(tima: float, size: int, sign: int, beta: float) -> float:
    """One EWMA step for the trade-sign average.

    The decay weight is exp(-beta * size), so updating with a split trade
    portion-by-portion composes to exactly the whole-trade update. A
    zero-size trade leaves the state unchanged; the result stays in
    [-1, 1] whenever the previous state was.
    """
    w = math.exp(-beta * size)
    return w * tima + (1.0 - w) * sign


def accumulate_touch_flow(book: BookState, m: Message) -> tuple[int, int, int, int]:
    """Touch limit-flow contribution of one message, evaluated against the
    pre-event book (call before the message is applied).

    Returns (add_bid, cancel_bid, add_ask, cancel_ask) in shares. An ADD
    counts when its price is at or inside the same-side best quote (an
    improving order sets the new touch); a CANCEL/DELETE counts when the
    resting order sits at the current touch; MODIFY contributes both a
    cancel of the current remainder and an add of the new size. EXECUTE
    and off-touch events contribute nothing.
    """
    kind = m.kind
    if kind is Kind.EXECUTE:
        return (0, 0, 0, 0)

    if kind is Kind.ADD:
        side = m.side
        best = book.best_or_none(side)
        at_touch = best is None or (m.price >= best if side is Side.BID
                                    else m.price <= best)
        if not at_touch:
            return (0, 0, 0, 0)
        if side is Side.BID:
            return (m.size, 0, 0, 0)
        return (0, 0, m.size, 0)

    # CANCEL / DELETE / MODIFY target a resting order; let apply() raise on
    # unknown ids, contribute nothing here.
    if not book.has_order(m.order_id):
        return (0, 0, 0, 0)
    side, price, remaining = book.order_info(m.order_id)
    if price != book.best(side):
        return (0, 0, 0, 0)
    if kind is Kind.CANCEL:
        cancelled = min(m.size, remaining)
    elif kind is Kind.DELETE:
        cancelled = remaining
    else:  # MODIFY: cancel current remainder, add the new size
        added = m.new_size if m.new_size is not None else m.size
        if side is Side.BID:
            return (added, remaining, 0, 0)
        return (0, 0, added, remaining)
    if side is Side.BID:
        return (0, cancelled, 0, 0)
    return (0, 0, 0, cancelled)


class _Accum:
    """Mutable state of the bucket currently being filled."""

    __slots__ = ("t_open", "open_mid", "open_snapshot", "vm_buy", "vm_sell",
                 "vl_add_bid", "vl_cancel_bid", "vl_add_ask", "vl_cancel_ask")

    def __init__(self, t_open: int, open_mid: int, open_snapshot: Snapshot):
        self.t_open = t_open
        self.open_mid = open_mid
        self.open_snapshot = open_snapshot
        self.vm_buy = 0
        self.vm_sell = 0
        self.vl_add_bid = 0
        self.vl_cancel_bid = 0
        self.vl_add_ask = 0
        self.vl_cancel_ask = 0


def bucketize(
    messages: Sequence[Message],
    book: BookState,
    cfg: SessionConfig,
    *,
    pi_n: int | None = None,
    snapshot_levels: int = 30,
    slope_intercept: bool = False,
    collect_tape: bool = True,
) -> FlowSeries:
    """Replay a pre-processed session and aggregate it into volume buckets.

    `messages` must already be filtered to the session window and have
    split market orders recombined; `book` holds the opening state (seed
    events replayed). Opening static metrics are evaluated after the
    replay at a common order size: `pi_n` when given, otherwise the
    session average of the 4-level depth rounded to the nearest 100.
    """
    V = cfg.bucket_volume
    beta = cfg.tima_beta if cfg.tima_beta is not None else 0.5 / V
    try:
        open_snapshot = book.snapshot(snapshot_levels, ts=cfg.session_start)
    except EmptySide:
        raise EmptySide("book must be seeded on both sides at session start")
    acc = _Accum(cfg.session_start, book.mid_halfticks(), open_snapshot)
    records: list[BucketRecord] = []
    tima = 0.0

    tape_ts: list[int] = []
    tape_size: list[int] = []
    tape_before: list[float] = []
    tape_after: list[float] = []

    def close_bucket(ts: int) -> None:
        nonlocal acc
        mid_close = book.mid_halfticks()
        records.append(BucketRecord(
            index=len(records),
            t_open=acc.t_open,
            t_close=ts,
            bucket_volume=V,
            vm_buy=acc.vm_buy,
            vm_sell=acc.vm_sell,
            vl_add_bid=acc.vl_add_bid,
            vl_cancel_bid=acc.vl_cancel_bid,
            vl_add_ask=acc.vl_add_ask,
            vl_cancel_ask=acc.vl_cancel_ask,
            delta_p=mid_close - acc.open_mid,
            tima=tima,
            zero_duration=(ts == acc.t_open),
            open_snapshot=acc.open_snapshot,
        ))
        acc = _Accum(ts, mid_close, book.snapshot(snapshot_levels, ts=ts))

    def safe_mid() -> float:
        try:
            return float(book.mid_halfticks())
        except EmptySide:
            return math.nan

    for m in messages:
        if m.kind is Kind.EXECUTE:
            resting = m.side.opposite
            if m.size > book.side_volume(resting):
                raise ExecuteExceedsVisibleDepth(
                    f"trade of {m.size} at ts {m.ts} vs "
                    f"{book.side_volume(resting)} visible")
            sign = 1 if m.side is Side.BID else -1
            if collect_tape:
                mid_before = safe_mid()
            remaining = m.size
            while remaining > 0:
                need = V - acc.vm_buy - acc.vm_sell
                take = remaining if remaining < need else need
                book.execute_shares(m.side, take)
                tima = tima_update(tima, take, sign, beta)
                if sign > 0:
                    acc.vm_buy += take
                else:
                    acc.vm_sell += take
                remaining -= take
                if take == need:
                    close_bucket(m.ts)
            book.last_ts = m.ts
            if collect_tape:
                tape_ts.append(m.ts)
                tape_size.append(sign * m.size)
                tape_before.append(mid_before)
                tape_after.append(safe_mid())
        else:
            ab, cb, aa, ca = accumulate_touch_flow(book, m)
            if ab or cb or aa or ca:
                acc.vl_add_bid += ab
                acc.vl_cancel_bid += cb
                acc.vl_add_ask += aa
                acc.vl_cancel_ask += ca
            book.apply(m)

    final_partial = None
    if acc.vm_buy or acc.vm_sell:
        final_partial = BucketRecord(
            index=len(records),
            t_open=acc.t_open,
            t_close=book.last_ts,
            bucket_volume=V,
            vm_buy=acc.vm_buy,
            vm_sell=acc.vm_sell,
            vl_add_bid=acc.vl_add_bid,
            vl_cancel_bid=acc.vl_cancel_bid,
            vl_add_ask=acc.vl_add_ask,
            vl_cancel_ask=acc.vl_cancel_ask,
            delta_p=(book.mid_halfticks() - acc.open_mid
                     if not (book.empty(Side.BID) or book.empty(Side.ASK))
                     else math.nan),
            tima=tima,
            zero_duration=(book.last_ts == acc.t_open),
            is_final_partial=True,
            open_snapshot=acc.open_snapshot,
        )

    n_used = pi_n if pi_n is not None else _default_pi_n(records, final_partial)
    for rec in records + ([final_partial] if final_partial else []):
        if rec.open_snapshot is not None:
            rec.open_metrics = compute_static_metrics(
                rec.open_snapshot, n_used, intercept=slope_intercept)

    tape = None
    if collect_tape:
        tape = TradeTape(
            ts=np.array(tape_ts, dtype=np.int64),
            signed_size=np.array(tape_size, dtype=np.int64),
            mid_before=np.array(tape_before),
            mid_after=np.array(tape_after),
        )
    return FlowSeries(records=records, final_partial=final_partial,
                      session=cfg, pi_n=n_used, tape=tape)


def _default_pi_n(records: list[BucketRecord],
                  final_partial: BucketRecord | None) -> int:
    """Session default order size for PI/slope: average 4-level depth
    across bucket opens (both sides pooled), rounded to the nearest 100."""
    d4: list[int] = []
    for rec in records + ([final_partial] if final_partial else []):
        snap = rec.open_snapshot
        if snap is None:
            continue
        d4.append(sum(v for _, v in snap.bids[:4]))
        d4.append(sum(v for _, v in snap.asks[:4]))
    if not d4:
        return 100
    return max(100, int(round(float(np.mean(d4)) / 100.0)) * 100)


def bucketize_session(messages: Sequence[Message], cfg: SessionConfig,
                      **kwargs) -> FlowSeries:
    """Full pipeline over a raw stream: sort, window-filter, drop hidden
    executions, recombine split trades, seed the opening book, bucketize."""
    sliced = filter_session(sort_by_ts(messages), cfg)
    session = recombine_market_orders(sliced.session)
    book = seed_book(sliced.seed)
    return bucketize(session, book, cfg, **kwargs)


def vpin(series: FlowSeries, window: int) -> np.ndarray:
    """Trailing mean of |TI| over the `window` previous buckets.

    Entry k is the value available at the open of bucket k (it uses
    buckets k-window .. k-1), so the array has len(series)+1 entries and
    the last one is the forecast for the not-yet-observed next bucket.
    Entries before index `window` are NaN.
    """
    n = len(series.records)
    if window < 1 or window > n:
        raise WindowTooLong(f"window {window} vs {n} buckets")
    abs_ti = np.abs(series.ti())
    out = np.full(n + 1, np.nan)
    csum = np.concatenate(([0.0], np.cumsum(abs_ti)))
    out[window:] = (csum[window:] - csum[:-window]) / window
    return out


@dataclass
class TimeFlowGrid:
    """Per-sub-bucket market and touch-limit flows on a fixed time grid.

    vm_* is the executed volume that consumed resting liquidity on that
    side (buys hit the ask side, sells the bid side); vl_* is the net
    touch limit flow on that side.
    """

    t0: int
    width_ns: int
    vm_bid: np.ndarray
    vm_ask: np.ndarray
    vl_bid: np.ndarray
    vl_ask: np.ndarray

    def __len__(self) -> int:
        return len(self.vm_bid)

    def times(self) -> np.ndarray:
        """Right edge of each sub-bucket."""
        return self.t0 + self.width_ns * (1 + np.arange(len(self)))


def time_flow_grid(messages: Sequence[Message], book: BookState,
                   cfg: SessionConfig, width_ns: int) -> TimeFlowGrid:
    """Replay a pre-processed session accumulating flows on a time grid of
    `width_ns` sub-buckets (the correlation diagnostics operate on this)."""
    if width_ns <= 0:
        raise DataError("sub-bucket width must be positive")
    t0 = cfg.session_start
    cols = {"vm_bid": [], "vm_ask": [], "vl_bid": [], "vl_ask": []}

    def bucket_at(ts: int) -> int:
        idx = (ts - t0) // width_ns
        current = len(cols["vm_bid"])
        if idx >= current:
            for col in cols.values():
                col.extend([0] * (idx - current + 1))
        return idx

    for m in messages:
        idx = bucket_at(m.ts)
        if m.kind is Kind.EXECUTE:
            if m.side is Side.BID:
                cols["vm_ask"][idx] += m.size
            else:
                cols["vm_bid"][idx] += m.size
            book.apply(m)
        else:
            ab, cb, aa, ca = accumulate_touch_flow(book, m)
            cols["vl_bid"][idx] += ab - cb
            cols["vl_ask"][idx] += aa - ca
            book.apply(m)

    return TimeFlowGrid(
        t0=t0, width_ns=width_ns,
        vm_bid=np.array(cols["vm_bid"], dtype=np.float64),
        vm_ask=np.array(cols["vm_ask"], dtype=np.float64),
        vl_bid=np.array(cols["vl_bid"], dtype=np.float64),
        vl_ask=np.array(cols["vl_ask"], dtype=np.float64),
    )


def _rolling_corr(x: np.ndarray, y: np.ndarray, w: int) -> np.ndarray:
    """Pearson correlation over trailing windows of length w; NaN where a
    window has zero variance in either series or is not yet full."""
    n = len(x)
    out = np.full(n, np.nan)
    if n < w or w < 3:
        return out
    csx = np.concatenate(([0.0], np.cumsum(x)))
    csy = np.concatenate(([0.0], np.cumsum(y)))
    csxx = np.concatenate(([0.0], np.cumsum(x * x)))
    csyy = np.concatenate(([0.0], np.cumsum(y * y)))
    csxy = np.concatenate(([0.0], np.cumsum(x * y)))
    sx = csx[w:] - csx[:-w]
    sy = csy[w:] - csy[:-w]
    sxx = csxx[w:] - csxx[:-w]
    syy = csyy[w:] - csyy[:-w]
    sxy = csxy[w:] - csxy[:-w]
    varx = sxx - sx * sx / w
    vary = syy - sy * sy / w
    cov = sxy - sx * sy / w
    # constant windows leave var as pure cancellation noise: treat anything
    # below 1e-9 of the raw second moment as zero variance
    degenerate = ((varx <= 1e-9 * np.maximum(sxx, 1e-300))
                  | (vary <= 1e-9 * np.maximum(syy, 1e-300)))
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = cov / np.sqrt(varx * vary)
    rho = np.where(degenerate, np.nan, np.clip(rho, -1.0, 1.0))
    out[w - 1:] = rho
    return out


def rolling_flow_correlation(grid: TimeFlowGrid, side: Side,
                             window_ns: int) -> tuple[np.ndarray, np.ndarray]:
    """Trailing correlation between same-side market and limit flows.

    Returns (window end times, rho). Windows shorter than the trailing
    span or with zero variance in either flow are NaN (undefined, not 0).
    """
    w = int(window_ns // grid.width_ns)
    if w < 3:
        raise WindowTooLong(
            f"window {window_ns} shorter than 3 sub-buckets of {grid.width_ns}")
    vm = grid.vm_bid if side is Side.BID else grid.vm_ask
    vl = grid.vl_bid if side is Side.BID else grid.vl_ask
    return grid.times(), _rolling_corr(vm, vl, w)


def toxicity_correlation(tape: TradeTape, window: int = 200) -> np.ndarray:
    """Trailing correlation between per-trade signed volume and the mid
    move across each trade, over the previous `window` trades.

    Returns one value per trade (NaN until `window` trades have been seen
    and for degenerate windows).
    """
    if window < 3:
        raise WindowTooLong("toxicity window must be >= 3 trades")
    dp = tape.mid_after - tape.mid_before
    vol = tape.signed_size.astype(np.float64)
    ok = np.isfinite(dp)
    dp = np.where(ok, dp, 0.0)
    rho = _rolling_corr(vol, dp, window)
    return rho


# --- bucket CSV interchange ---------------------------------------------------

BUCKET_CSV_COLUMNS = (
    "index", "t_open_ns", "t_close_ns", "duration_ns", "bucket_volume",
    "vm_buy", "vm_sell", "ti",
    "vl_add_bid", "vl_cancel_bid", "vl_add_ask", "vl_cancel_ask",
    "vl_bid", "vl_ask", "pc_bid", "pc_ask",
    "delta_p", "tima", "zero_duration", "is_final_partial",
    "open_mid", "open_spread", "open_bi",
    "open_d1_bid", "open_d2_bid", "open_d3_bid", "open_d4_bid",
    "open_d1_ask", "open_d2_ask", "open_d3_ask", "open_d4_ask",
    "open_pi_bid", "open_pi_ask", "open_slope_bid", "open_slope_ask",
    "open_truncated",
)


def write_bucket_csv(series: FlowSeries, out) -> None:
    """One row per bucket (final partial last, flagged), fixed column order.

    Units: mids half-ticks, spreads ticks, volumes shares, pi ticks,
    slopes ticks/share, durations nanoseconds. Session parameters ride in
    a header comment so the file round-trips through read_bucket_csv.
    """
    cfg = series.session
    out.write("# units: mid half-ticks, spread ticks, volumes shares, "
              "pi ticks, slope ticks/share, pc cancels/adds\n")
    out.write(f"# session_start={cfg.session_start} session_end={cfg.session_end} "
              f"tick_size={cfg.tick_size!r} bucket_volume={cfg.bucket_volume} "
              f"pi_n={series.pi_n} symbol={cfg.symbol}\n")
    out.write(",".join(BUCKET_CSV_COLUMNS) + "\n")
    rows = list(series.records)
    if series.final_partial is not None:
        rows.append(series.final_partial)
    for r in rows:
        m = r.open_metrics
        vals = [
            r.index, r.t_open, r.t_close, r.duration, r.bucket_volume,
            r.vm_buy, r.vm_sell, repr(r.ti),
            r.vl_add_bid, r.vl_cancel_bid, r.vl_add_ask, r.vl_cancel_ask,
            r.vl_bid, r.vl_ask,
            "" if r.pc_bid is None else repr(r.pc_bid),
            "" if r.pc_ask is None else repr(r.pc_ask),
            repr(float(r.delta_p)), repr(r.tima),
            int(r.zero_duration), int(r.is_final_partial),
        ]
        if m is None:
            vals += [""] * 16
        else:
            vals += [
                m.mid, m.spread, repr(m.bi),
                m.depth_bid[0], m.depth_bid[1], m.depth_bid[2], m.depth_bid[3],
                m.depth_ask[0], m.depth_ask[1], m.depth_ask[2], m.depth_ask[3],
                repr(float(m.pi_bid)), repr(float(m.pi_ask)),
                repr(m.slope_bid), repr(m.slope_ask),
                int(m.truncated),
            ]
        out.write(",".join(str(v) for v in vals) + "\n")


def read_bucket_csv(text: str) -> FlowSeries:
    """Rebuild a FlowSeries from its CSV form (snapshots and the trade
    tape are not part of the interchange and come back as None)."""
    from fractions import Fraction

    session_kw: dict = {}
    pi_n = 0
    rows: list[str] = []
    for ln in text.splitlines():
        if ln.startswith("#"):
            if "session_start=" in ln:
                for tok in ln.lstrip("# ").split():
                    key, _, val = tok.partition("=")
                    if key == "tick_size":
                        session_kw[key] = float(val)
                    elif key == "symbol":
                        session_kw[key] = val
                    elif key == "pi_n":
                        pi_n = int(val)
                    elif key in ("session_start", "session_end", "bucket_volume"):
                        session_kw[key] = int(val)
            continue
        if ln:
            rows.append(ln)
    if not rows or rows[0].split(",")[0] != "index":
        raise DataError("not a bucket CSV (missing header row)")
    header = rows[0].split(",")
    if tuple(header) != BUCKET_CSV_COLUMNS:
        raise DataError("bucket CSV columns do not match the documented layout")
    col = {name: i for i, name in enumerate(header)}

    records: list[BucketRecord] = []
    final_partial = None
    for ln in rows[1:]:
        p = ln.split(",")

        def get(name: str) -> str:
            return p[col[name]]

        metrics = None
        if get("open_mid") != "":
            metrics = StaticMetrics(
                mid=int(get("open_mid")), spread=int(get("open_spread")),
                bi=float(get("open_bi")),
                depth_bid=tuple(int(get(f"open_d{i}_bid")) for i in range(1, 5)),
                depth_ask=tuple(int(get(f"open_d{i}_ask")) for i in range(1, 5)),
                pi_bid=Fraction(get("open_pi_bid")),
                pi_ask=Fraction(get("open_pi_ask")),
                slope_bid=float(get("open_slope_bid")),
                slope_ask=float(get("open_slope_ask")),
                pi_n=pi_n, truncated=bool(int(get("open_truncated"))),
            )
        rec = BucketRecord(
            index=int(get("index")),
            t_open=int(get("t_open_ns")),
            t_close=int(get("t_close_ns")),
            bucket_volume=int(get("bucket_volume")),
            vm_buy=int(get("vm_buy")),
            vm_sell=int(get("vm_sell")),
            vl_add_bid=int(get("vl_add_bid")),
            vl_cancel_bid=int(get("vl_cancel_bid")),
            vl_add_ask=int(get("vl_add_ask")),
            vl_cancel_ask=int(get("vl_cancel_ask")),
            delta_p=float(get("delta_p")),
            tima=float(get("tima")),
            zero_duration=bool(int(get("zero_duration"))),
            is_final_partial=bool(int(get("is_final_partial"))),
            open_metrics=metrics,
        )
        if rec.is_final_partial:
            final_partial = rec
        else:
            records.append(rec)

    session = SessionConfig(**session_kw) if session_kw else SessionConfig()
    return FlowSeries(records=records, final_partial=final_partial,
                      session=session, pi_n=pi_n, tape=None)

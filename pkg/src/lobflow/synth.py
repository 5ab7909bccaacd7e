"""Synthetic sessions with known ground truth.

Two generators back the test suite and the CLI `synth` subcommand:

* message level — a replayable event stream built against a live internal
  book, so every CANCEL targets a real resting order and every EXECUTE
  respects visible depth. Market-order signs follow a persistent Markov
  draw; limit adds and cancels concentrate at the touch. Cancel/add side
  selection can be modulated by the running trade-sign pressure with a
  piecewise-linear (kinked) response, which induces one-sided limit-flow
  curves against trade imbalance.

* bucket level — draws (TI, VL) directly and sets the price change from a
  known linear model plus Gaussian noise, giving an exact
  coefficient-recovery oracle for the regression layer.

All randomness flows from a single seed through one numpy Generator, so a
given config reproduces its stream byte for byte.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .book import BookState
from .buckets import BucketRecord, FlowSeries, tima_update
from .errors import InvalidConfig
from .messages import Kind, Message, SessionConfig, Side

__all__ = ["SynthConfig", "generate_session", "sample_linear_buckets"]

NS_PER_SEC = 1_000_000_000


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for both generators; mode selects which ones apply."""

    seed: int = 0
    mode: str = "message"               # "message" or "bucket"

    # shared
    bucket_volume: int = 2000

    # message level
    n_buckets: int = 10                 # executed-volume target, in buckets
    base_price: int = 2500              # opening best bid, ticks
    levels: int = 6                     # seeded ladder levels per side
    level_volume: int = 1200            # mean shares per seeded level
    orders_per_level: int = 3
    mean_trade: int = 350
    max_trade: int = 2500
    limit_rate: float = 8.0             # expected limit events per trade
    cancel_fraction: float = 0.45       # cancels among limit events
    buy_fraction: float = 0.5
    sign_persistence: float = 0.7
    ti_kink: float = 0.3
    ti_cancel_slope: float = 0.0        # 0 disables flow modulation
    mean_gap_ns: int = 40_000_000
    session_start: int = 10 * 3600 * NS_PER_SEC

    # bucket level
    n_samples: int = 10_000
    alpha: tuple[float, float, float] = (0.0, 1.0, 0.6)
    noise_sigma: float = 0.1
    vl_mean: float = 0.5
    vl_sigma: float = 0.5

    def __post_init__(self) -> None:
        if self.mode not in ("message", "bucket"):
            raise InvalidConfig(f"unknown mode {self.mode!r}")
        if self.bucket_volume <= 0:
            raise InvalidConfig("bucket_volume must be positive")
        if min(self.levels, self.level_volume, self.orders_per_level,
               self.mean_trade, self.max_trade, self.n_buckets) <= 0:
            raise InvalidConfig("ladder and trade parameters must be positive")
        if not (0.0 <= self.buy_fraction <= 1.0
                and 0.0 <= self.sign_persistence < 1.0
                and 0.0 <= self.cancel_fraction <= 1.0):
            raise InvalidConfig("probabilities must lie in [0, 1]")
        if self.limit_rate < 0 or self.ti_cancel_slope < 0 or self.noise_sigma < 0:
            raise InvalidConfig("rates, slopes and sigma must be non-negative")
        if self.base_price <= self.levels:
            raise InvalidConfig("base_price too small for the ladder")


class _SessionBuilder:
    """Stateful helper walking a live book while emitting messages."""

    def __init__(self, cfg: SynthConfig):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.book = BookState()
        self.messages: list[Message] = []
        self.next_id = 1
        self.ts = cfg.session_start

    def emit(self, m: Message) -> None:
        self.book.apply(m)
        self.messages.append(m)

    def new_id(self) -> int:
        oid = self.next_id
        self.next_id += 1
        return oid

    def advance(self) -> int:
        self.ts += max(1, int(self.rng.exponential(self.cfg.mean_gap_ns)))
        return self.ts

    def sized(self, mean: float) -> int:
        return 1 + int(self.rng.exponential(mean - 1)) if mean > 1 else 1

    # -- ladder ------------------------------------------------------------

    def seed_ladder(self) -> None:
        cfg = self.cfg
        ts = cfg.session_start - cfg.levels * cfg.orders_per_level * 2_000_000
        per_order = max(1, cfg.level_volume // cfg.orders_per_level)
        for side, p0, step in ((Side.BID, cfg.base_price, -1),
                               (Side.ASK, cfg.base_price + 1, +1)):
            for i in range(cfg.levels):
                price = p0 + step * i
                for _ in range(cfg.orders_per_level):
                    size = self.sized(per_order)
                    self.emit(Message(ts, Kind.ADD, self.new_id(), side,
                                      price, size))
                    ts += 1_000_000

    # -- event builders ------------------------------------------------------

    def refill(self, side: Side) -> None:
        # keep both sides deep enough that trades never drain a side
        cfg = self.cfg
        best = self.book.best(side)
        offset = int(self.rng.integers(1, 4))
        price = best - offset if side is Side.BID else best + offset
        self.emit(Message(self.advance(), Kind.ADD, self.new_id(), side,
                          price, self.sized(cfg.level_volume)))

    def ensure_depth(self) -> None:
        floor = 3 * self.cfg.max_trade
        for side in (Side.BID, Side.ASK):
            while (self.book.side_volume(side) < floor
                   or self.book.level_count(side) < 3):
                self.refill(side)

    def pressure_shift(self, pressure: float, side: Side) -> float:
        """Kinked response of one side to signed trade pressure: positive
        pressure (buys) stresses the ask side, negative the bid side."""
        cfg = self.cfg
        signed = pressure if side is Side.ASK else -pressure
        return cfg.ti_cancel_slope * max(0.0, signed - cfg.ti_kink)

    def pick_side(self, pressure: float, for_cancel: bool) -> Side:
        w_ask = 1.0 + (self.pressure_shift(pressure, Side.ASK)
                       if for_cancel else -0.9 * min(1.0, self.pressure_shift(pressure, Side.ASK)))
        w_bid = 1.0 + (self.pressure_shift(pressure, Side.BID)
                       if for_cancel else -0.9 * min(1.0, self.pressure_shift(pressure, Side.BID)))
        w_ask = max(w_ask, 0.05)
        w_bid = max(w_bid, 0.05)
        return Side.ASK if self.rng.random() < w_ask / (w_ask + w_bid) else Side.BID

    def emit_add(self, side: Side) -> None:
        cfg = self.cfg
        rng = self.rng
        best = self.book.best(side)
        if self.book.spread_ticks() >= 2 and rng.random() < 0.8:
            # restore the one-tick spread with an improving order
            price = best + 1 if side is Side.BID else best - 1
        else:
            # queue-reactive placement: join the touch while it is short,
            # go behind once it holds about two levels' worth
            crowding = self.book.level_volume(side, best) / (2.0 * cfg.level_volume)
            if rng.random() < 0.3 + 0.7 * min(1.0, crowding):
                offset = int(rng.integers(1, 4))
                price = best - offset if side is Side.BID else best + offset
            else:
                price = best
        size = self.sized(cfg.level_volume / cfg.orders_per_level)
        self.emit(Message(self.advance(), Kind.ADD, self.new_id(), side,
                          price, size))

    def emit_cancel(self, side: Side) -> None:
        book = self.book
        rng = self.rng
        if book.level_count(side) < 2:
            return  # never empty a side by cancelling its last level
        best = book.best(side)
        # mostly pull from the touch, sometimes one or two levels behind
        offset = int(rng.choice((0, 0, 0, 1, 2)))
        price = best - offset if side is Side.BID else best + offset
        resting = book.orders_at(side, price)
        if not resting:
            return
        oid, remaining = resting[int(rng.integers(0, len(resting)))]
        roll = rng.random()
        if roll < 0.3 and remaining > 1:
            qty = int(rng.integers(1, remaining))
            self.emit(Message(self.advance(), Kind.CANCEL, oid, side,
                              price, qty))
        elif roll < 0.8:
            self.emit(Message(self.advance(), Kind.DELETE, oid, side,
                              price, remaining))
        else:
            new_size = int(rng.integers(0, remaining))
            self.emit(Message(self.advance(), Kind.MODIFY, oid, side, price,
                              new_size, old_size=remaining, new_size=new_size))

    def emit_trade(self, sign: int) -> int:
        cfg = self.cfg
        aggressor = Side.BID if sign > 0 else Side.ASK
        resting = aggressor.opposite
        available = self.book.side_volume(resting)
        cap = min(cfg.max_trade, available - cfg.mean_trade)
        if cap < 1:
            self.refill(resting)
            return 0
        size = min(self.sized(cfg.mean_trade), cap)
        self.emit(Message(self.advance(), Kind.EXECUTE, self.new_id(),
                          aggressor, self.book.best(resting), size))
        return size


def generate_session(cfg: SynthConfig) -> list[Message]:
    """Generate a time-sorted, replayable message stream whose executed
    volume reaches at least n_buckets * bucket_volume."""
    if cfg.mode != "message":
        raise InvalidConfig("generate_session requires mode='message'")
    b = _SessionBuilder(cfg)
    b.seed_ladder()

    target = cfg.n_buckets * cfg.bucket_volume
    executed = 0
    rng = b.rng
    p_trade = 1.0 / (1.0 + cfg.limit_rate)
    sign = 1 if rng.random() < cfg.buy_fraction else -1
    pressure = 0.0
    pressure_beta = 1.0 / cfg.bucket_volume

    while executed < target:
        b.ensure_depth()
        if rng.random() < p_trade:
            if rng.random() >= cfg.sign_persistence:
                sign = 1 if rng.random() < cfg.buy_fraction else -1
            done = b.emit_trade(sign)
            executed += done
            if done:
                pressure = tima_update(pressure, done, sign, pressure_beta)
        elif rng.random() < cfg.cancel_fraction:
            b.emit_cancel(b.pick_side(pressure, for_cancel=True))
        else:
            b.emit_add(b.pick_side(pressure, for_cancel=False))
    return b.messages


def sample_linear_buckets(cfg: SynthConfig) -> FlowSeries:
    """Bucket records drawn straight from the linear price-change model
    dp = a0 + a1*TI + a2*(VL_bid - VL_ask)/V + noise.

    The stored integer flows are what dp was generated from, so with
    noise_sigma=0 an OLS fit recovers the coefficients exactly.
    """
    if cfg.mode != "bucket":
        raise InvalidConfig("sample_linear_buckets requires mode='bucket'")
    if cfg.n_samples < 3:
        raise InvalidConfig("n_samples must be at least 3")
    rng = np.random.default_rng(cfg.seed)
    V = cfg.bucket_volume
    a0, a1, a2 = cfg.alpha

    u = rng.uniform(-1.0, 1.0, cfg.n_samples)
    vm_buy = np.clip(np.rint(V * (1.0 + u) / 2.0), 0, V).astype(np.int64)
    vm_sell = V - vm_buy
    ti = (vm_buy - vm_sell) / V

    vl_bid = np.rint(rng.normal(cfg.vl_mean, cfg.vl_sigma, cfg.n_samples) * V)
    vl_ask = np.rint(rng.normal(cfg.vl_mean, cfg.vl_sigma, cfg.n_samples) * V)
    nl = (vl_bid - vl_ask) / V
    noise = (rng.normal(0.0, cfg.noise_sigma, cfg.n_samples)
             if cfg.noise_sigma > 0 else np.zeros(cfg.n_samples))
    dp = a0 + a1 * ti + a2 * nl + noise

    t0 = cfg.session_start
    records = []
    for k in range(cfg.n_samples):
        vb = int(vl_bid[k])
        va = int(vl_ask[k])
        records.append(BucketRecord(
            index=k,
            t_open=t0 + k * NS_PER_SEC,
            t_close=t0 + (k + 1) * NS_PER_SEC,
            bucket_volume=V,
            vm_buy=int(vm_buy[k]),
            vm_sell=int(vm_sell[k]),
            vl_add_bid=max(vb, 0),
            vl_cancel_bid=max(-vb, 0),
            vl_add_ask=max(va, 0),
            vl_cancel_ask=max(-va, 0),
            delta_p=float(dp[k]),
        ))
    session = SessionConfig(
        session_start=t0,
        session_end=t0 + (cfg.n_samples + 1) * NS_PER_SEC,
        bucket_volume=V,
        symbol="synthetic",
    )
    return FlowSeries(records=records, final_partial=None, session=session,
                      pi_n=0, tape=None)

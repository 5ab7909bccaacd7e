"""Price-level limit order book maintained under message replay.

The ladder is sparse (dict keyed by integer tick) with best quotes tracked
through lazily-cleaned heaps, so the hot path — apply one message — stays
O(1) amortized. Volume within a level is consumed FIFO, but queue position
carries no semantics elsewhere in the package.

Crossing limit orders are rejected rather than matched: for the large-tick
universe this engine targets, marketable limit orders are treated as data
errors, and executions arrive as explicit EXECUTE messages. Market orders
larger than the visible opposite-side depth abort atomically.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .errors import (
    CancelExceedsResting,
    CrossingLimitOrder,
    DuplicateOrderId,
    EmptySide,
    ExecuteExceedsVisibleDepth,
    UnknownOrderId,
)
from .messages import Kind, Message, Side

__all__ = ["BookState", "Snapshot", "Fill", "replay", "seed_book"]


class Fill(NamedTuple):
    """Volume consumed from one resting price level by a market order."""

    price: int
    size: int


@dataclass(frozen=True)
class Snapshot:
    """Immutable top-of-book view: up to k occupied levels per side.

    bids are ordered best-first (descending price), asks best-first
    (ascending price). Prices are integer ticks, volumes shares.
    """

    ts: int
    bids: tuple[tuple[int, int], ...]
    asks: tuple[tuple[int, int], ...]

    @property
    def best_bid(self) -> int:
        return self.bids[0][0]

    @property
    def best_ask(self) -> int:
        return self.asks[0][0]

    def levels(self, side: Side) -> tuple[tuple[int, int], ...]:
        return self.bids if side is Side.BID else self.asks


class BookState:
    """Two-sided ladder replayed from normalized messages (single writer)."""

    __slots__ = ("_levels", "_queues", "_orders", "_heaps", "_volume", "last_ts")

    def __init__(self) -> None:
        self._levels = {Side.BID: {}, Side.ASK: {}}   # price -> resting volume
        self._queues = {Side.BID: {}, Side.ASK: {}}   # price -> {order_id: None}
        self._orders: dict[int, list] = {}            # order_id -> [side, price, remaining]
        self._heaps = {Side.BID: [], Side.ASK: []}    # lazy best-quote heaps
        self._volume = {Side.BID: 0, Side.ASK: 0}     # total resting per side
        self.last_ts = 0

    # -- queries ---------------------------------------------------------

    def empty(self, side: Side) -> bool:
        return not self._levels[side]

    def best(self, side: Side) -> int:
        """Best price on a side. Raises EmptySide when no level exists."""
        levels = self._levels[side]
        if not levels:
            raise EmptySide(f"no resting volume on {side.name}")
        heap = self._heaps[side]
        if side is Side.BID:
            while -heap[0] not in levels:
                heapq.heappop(heap)
            return -heap[0]
        while heap[0] not in levels:
            heapq.heappop(heap)
        return heap[0]

    def best_or_none(self, side: Side) -> int | None:
        return None if not self._levels[side] else self.best(side)

    def mid_halfticks(self) -> int:
        """Mid-price in half-ticks: best_bid + best_ask (both sides required)."""
        return self.best(Side.BID) + self.best(Side.ASK)

    def spread_ticks(self) -> int:
        return self.best(Side.ASK) - self.best(Side.BID)

    def side_volume(self, side: Side) -> int:
        return self._volume[side]

    def level_volume(self, side: Side, price: int) -> int:
        return self._levels[side].get(price, 0)

    def level_count(self, side: Side) -> int:
        return len(self._levels[side])

    def orders_at(self, side: Side, price: int) -> list[tuple[int, int]]:
        """(order_id, remaining) for every order resting at a level, FIFO order."""
        queue = self._queues[side].get(price)
        if not queue:
            return []
        orders = self._orders
        return [(oid, orders[oid][2]) for oid in queue]

    def order_info(self, order_id: int) -> tuple[Side, int, int]:
        """(side, price, remaining) for a live order."""
        try:
            side, price, remaining = self._orders[order_id]
        except KeyError:
            raise UnknownOrderId(str(order_id))
        return side, price, remaining

    def has_order(self, order_id: int) -> bool:
        return order_id in self._orders

    def snapshot(self, k: int = 30, ts: int | None = None) -> Snapshot:
        """Top-k occupied levels per side; truncates when fewer exist."""
        bids = self._levels[Side.BID]
        asks = self._levels[Side.ASK]
        if not bids or not asks:
            raise EmptySide("snapshot requires both sides non-empty")
        bid_prices = sorted(bids, reverse=True)[:k]
        ask_prices = sorted(asks)[:k]
        return Snapshot(
            ts=self.last_ts if ts is None else ts,
            bids=tuple((p, bids[p]) for p in bid_prices),
            asks=tuple((p, asks[p]) for p in ask_prices),
        )

    # -- mutations --------------------------------------------------------

    def apply(self, m: Message) -> list[Fill]:
        """Apply one message; returns the fills for EXECUTE, else []."""
        self.last_ts = m.ts
        kind = m.kind
        if kind is Kind.ADD:
            self._add(m.side, m.price, m.size, m.order_id)
            return []
        if kind is Kind.EXECUTE:
            resting = m.side.opposite
            if m.size > self._volume[resting]:
                raise ExecuteExceedsVisibleDepth(
                    f"trade of {m.size} vs {self._volume[resting]} visible")
            return self.execute_shares(m.side, m.size)
        if kind is Kind.CANCEL:
            if m.size == 0:
                return []
            self._reduce(m.order_id, m.size)
            return []
        if kind is Kind.DELETE:
            order = self._orders.get(m.order_id)
            if order is None:
                raise UnknownOrderId(str(m.order_id))
            self._reduce(m.order_id, order[2])
            return []
        # MODIFY: replace resting size at the same price (0 deletes).
        order = self._orders.get(m.order_id)
        if order is None:
            raise UnknownOrderId(str(m.order_id))
        new_size = m.new_size if m.new_size is not None else m.size
        side, price, remaining = order
        if new_size == 0:
            self._reduce(m.order_id, remaining)
            return []
        levels = self._levels[side]
        levels[price] += new_size - remaining
        self._volume[side] += new_size - remaining
        order[2] = new_size
        return []

    def _add(self, side: Side, price: int, size: int, order_id: int) -> None:
        if order_id in self._orders:
            raise DuplicateOrderId(str(order_id))
        opp = self._levels[side.opposite]
        if opp:
            opp_best = self.best(side.opposite)
            if (price >= opp_best) if side is Side.BID else (price <= opp_best):
                raise CrossingLimitOrder(
                    f"{side.name} at {price} crosses {side.opposite.name} {opp_best}")
        levels = self._levels[side]
        if price in levels:
            levels[price] += size
        else:
            levels[price] = size
            self._queues[side][price] = {}
            heapq.heappush(self._heaps[side], -price if side is Side.BID else price)
        self._queues[side][price][order_id] = None
        self._orders[order_id] = [side, price, size]
        self._volume[side] += size

    def _reduce(self, order_id: int, qty: int) -> None:
        order = self._orders.get(order_id)
        if order is None:
            raise UnknownOrderId(str(order_id))
        side, price, remaining = order
        if qty > remaining:
            raise CancelExceedsResting(
                f"cancel {qty} vs {remaining} resting (order {order_id})")
        levels = self._levels[side]
        left = levels[price] - qty
        self._volume[side] -= qty
        if order[2] == qty:
            del self._orders[order_id]
            del self._queues[side][price][order_id]
        else:
            order[2] -= qty
        if left == 0:
            del levels[price]
            del self._queues[side][price]
        else:
            levels[price] = left

    def execute_shares(self, aggressor: Side, size: int) -> list[Fill]:
        """Consume `size` shares from the side opposite the aggressor.

        Walks occupied levels in price order from the touch, FIFO within a
        level, emitting one Fill per consumed level. Aborts atomically
        (book untouched) when size exceeds the visible depth.
        """
        resting = aggressor.opposite
        if size > self._volume[resting]:
            raise ExecuteExceedsVisibleDepth(
                f"trade of {size} vs {self._volume[resting]} visible")
        levels = self._levels[resting]
        queues = self._queues[resting]
        orders = self._orders
        fills: list[Fill] = []
        remaining = size
        while remaining > 0:
            price = self.best(resting)
            level_vol = levels[price]
            take = level_vol if level_vol < remaining else remaining
            fills.append(Fill(price, take))
            queue = queues[price]
            need = take
            while need > 0:
                oid = next(iter(queue))
                order = orders[oid]
                avail = order[2]
                if avail <= need:
                    need -= avail
                    del queue[oid]
                    del orders[oid]
                else:
                    order[2] = avail - need
                    need = 0
            if take == level_vol:
                del levels[price]
                del queues[price]
            else:
                levels[price] = level_vol - take
            remaining -= take
        self._volume[resting] -= size
        return fills


def replay(book: BookState, messages: Iterable[Message]) -> int:
    """Apply a message sequence in order; returns the number applied."""
    n = 0
    for m in messages:
        book.apply(m)
        n += 1
    return n


def seed_book(seed_messages: Sequence[Message]) -> BookState:
    """Build an opening book by silently replaying pre-session events."""
    book = BookState()
    replay(book, seed_messages)
    return book

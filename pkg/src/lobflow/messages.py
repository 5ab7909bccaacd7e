"""Normalized market-data messages: schema, interchange parsing, pre-processing.

The wire formats are NDJSON (one object per line) and CSV, both with the
same field names:

    ts        integer nanoseconds since session midnight
    kind      ADD | CANCEL | DELETE | MODIFY | EXECUTE
    order_id  opaque integer identifier
    side      B | A  (resting side for limit events, aggressor side for EXECUTE)
    price     integer ticks
    size      positive integer shares (unused for MODIFY)
    hidden    EXECUTE only, optional; truthy means the trade hit hidden liquidity
    old_size / new_size   MODIFY only; new_size == 0 is equivalent to DELETE

Pre-processing mirrors the usual event-replay hygiene for this kind of
feed: restrict to the trading window, drop executions against hidden
orders, and recombine market orders that the exchange reported as several
fills (consecutive EXECUTE messages with the same aggressor side and an
identical timestamp become one trade).
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import ConfigError, MalformedRecord

__all__ = [
    "Kind",
    "Side",
    "Message",
    "SessionConfig",
    "ParseDiagnostic",
    "SessionSlice",
    "parse_stream",
    "filter_session",
    "recombine_market_orders",
    "write_ndjson",
    "write_csv",
    "sort_by_ts",
]


class Kind(Enum):
    ADD = "ADD"
    CANCEL = "CANCEL"
    DELETE = "DELETE"
    MODIFY = "MODIFY"
    EXECUTE = "EXECUTE"


class Side(Enum):
    BID = "B"
    ASK = "A"

    @property
    def opposite(self) -> "Side":
        return Side.ASK if self is Side.BID else Side.BID


_KINDS = {k.value: k for k in Kind}
_SIDES = {"B": Side.BID, "A": Side.ASK, "BID": Side.BID, "ASK": Side.ASK}


@dataclass(slots=True)
class Message:
    """One normalized market-data event.

    For MODIFY the ``size`` attribute mirrors ``new_size``; the
    authoritative pair is (old_size, new_size).
    """

    ts: int
    kind: Kind
    order_id: int
    side: Side
    price: int
    size: int
    hidden: bool = False
    old_size: int | None = None
    new_size: int | None = None


@dataclass(frozen=True)
class SessionConfig:
    """Session window and bucketing parameters for one symbol-day."""

    tick_size: float = 0.01
    session_start: int = 10 * 3600 * 1_000_000_000   # 10:00
    session_end: int = (15 * 3600 + 45 * 60) * 1_000_000_000  # 15:45
    symbol: str = ""
    bucket_volume: int = 10_000
    tima_beta: float | None = None  # defaults to 0.5 / bucket_volume

    def __post_init__(self) -> None:
        if self.session_start >= self.session_end:
            raise ConfigError("session_start must precede session_end")
        if self.bucket_volume <= 0:
            raise ConfigError("bucket_volume must be positive")
        if self.tick_size <= 0:
            raise ConfigError("tick_size must be positive")


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    reason: str


def _build_message(line_no: int, rec: dict) -> Message:
    kind_raw = rec.get("kind")
    kind = _KINDS.get(kind_raw)
    if kind is None:
        kind = _KINDS.get(str(kind_raw).upper())
        if kind is None:
            raise MalformedRecord(line_no, f"unknown kind {kind_raw!r}")

    try:
        ts = int(rec["ts"])
        order_id = int(rec["order_id"])
        price = int(rec["price"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedRecord(line_no, f"bad ts/order_id/price: {exc}")
    side_raw = rec.get("side")
    side = _SIDES.get(side_raw)
    if side is None:
        side = _SIDES.get(str(side_raw).upper())
        if side is None:
            raise MalformedRecord(line_no, f"unknown side {side_raw!r}")
    if price <= 0:
        raise MalformedRecord(line_no, "price must be positive")
    if ts < 0:
        raise MalformedRecord(line_no, "negative timestamp")

    old_size = new_size = None
    if kind is Kind.MODIFY:
        try:
            old_size = int(rec["old_size"])
            new_size = int(rec["new_size"])
        except (KeyError, TypeError, ValueError):
            raise MalformedRecord(line_no, "MODIFY requires old_size and new_size")
        if old_size <= 0 or new_size < 0:
            raise MalformedRecord(line_no, "MODIFY sizes out of range")
        size = new_size
    else:
        try:
            size = int(rec["size"])
        except (KeyError, TypeError, ValueError):
            raise MalformedRecord(line_no, "missing size")
        if size <= 0:
            raise MalformedRecord(line_no, "size must be positive")

    hidden = False
    if kind is Kind.EXECUTE:
        hidden = _truthy(rec.get("hidden"))
    return Message(ts, kind, order_id, side, price, size, hidden, old_size, new_size)


def _truthy(v) -> bool:
    if v is None or v == "":
        return False
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "t", "yes")


def parse_stream(
    data: str | bytes,
    fmt: str = "ndjson",
    strict: bool = False,
) -> tuple[list[Message], list[ParseDiagnostic]]:
    """Decode an NDJSON or CSV message stream.

    Lenient mode (the default) skips malformed lines and reports each one
    as a ParseDiagnostic with its 1-based line number; strict mode raises
    MalformedRecord at the first offending line. Input order is preserved.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    fmt = fmt.lower()
    if fmt not in ("ndjson", "csv"):
        raise ConfigError(f"unknown format {fmt!r}")

    messages: list[Message] = []
    diagnostics: list[ParseDiagnostic] = []

    def handle(line_no: int, rec_or_exc) -> None:
        if isinstance(rec_or_exc, MalformedRecord):
            if strict:
                raise rec_or_exc
            diagnostics.append(ParseDiagnostic(rec_or_exc.line, rec_or_exc.reason))
        else:
            messages.append(rec_or_exc)

    if fmt == "ndjson":
        for line_no, line in enumerate(data.splitlines(), start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            try:
                rec = json.loads(line)
                if not isinstance(rec, dict):
                    raise MalformedRecord(line_no, "not a JSON object")
                handle(line_no, _build_message(line_no, rec))
            except json.JSONDecodeError as exc:
                handle(line_no, MalformedRecord(line_no, f"invalid JSON: {exc.msg}"))
            except MalformedRecord as exc:
                handle(line_no, exc)
    else:
        lines = [ln for ln in data.splitlines() if not ln.startswith("#")]
        reader = csv.DictReader(lines)
        if reader.fieldnames is None:
            return messages, diagnostics
        for line_no, row in enumerate(reader, start=2):
            rec = {k: v for k, v in row.items() if v not in (None, "")}
            try:
                handle(line_no, _build_message(line_no, rec))
            except MalformedRecord as exc:
                handle(line_no, exc)

    return messages, diagnostics


_CSV_FIELDS = ("ts", "kind", "order_id", "side", "price", "size",
               "hidden", "old_size", "new_size")


def _to_record(m: Message) -> dict:
    rec = {
        "ts": m.ts,
        "kind": m.kind.value,
        "order_id": m.order_id,
        "side": m.side.value,
        "price": m.price,
    }
    if m.kind is Kind.MODIFY:
        rec["old_size"] = m.old_size
        rec["new_size"] = m.new_size
    else:
        rec["size"] = m.size
    if m.kind is Kind.EXECUTE and m.hidden:
        rec["hidden"] = True
    return rec


def write_ndjson(messages: Iterable[Message], out: io.TextIOBase) -> None:
    for m in messages:
        out.write(json.dumps(_to_record(m), separators=(",", ":")))
        out.write("\n")


def write_csv(messages: Iterable[Message], out: io.TextIOBase) -> None:
    writer = csv.DictWriter(out, fieldnames=_CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for m in messages:
        rec = _to_record(m)
        if rec.get("hidden"):
            rec["hidden"] = 1
        writer.writerow(rec)


def sort_by_ts(messages: Sequence[Message]) -> list[Message]:
    """Stable sort by timestamp; ties keep their input order."""
    return sorted(messages, key=lambda m: m.ts)


@dataclass(frozen=True)
class SessionSlice:
    """Output of filter_session: pre-window book-seeding events plus the
    in-window stream."""

    seed: list[Message]
    session: list[Message]


def filter_session(messages: Sequence[Message], cfg: SessionConfig) -> SessionSlice:
    """Restrict a time-sorted stream to the session window.

    Hidden executions never touched the visible book and are dropped
    everywhere. Events before session_start are kept in the seed slice so
    the opening book can be replayed silently (this keeps order lifecycles
    consistent: an order added pre-window may be cancelled in-window).
    Events after session_end are discarded. Both window edges are
    inclusive.
    """
    seed: list[Message] = []
    session: list[Message] = []
    start, end = cfg.session_start, cfg.session_end
    for m in messages:
        if m.hidden:
            continue
        if m.ts < start:
            seed.append(m)
        elif m.ts <= end:
            session.append(m)
    return SessionSlice(seed, session)


def recombine_market_orders(messages: Sequence[Message]) -> list[Message]:
    """Merge split market orders back into single trades.

    A maximal run of EXECUTE messages that are consecutive in the stream,
    on the same aggressor side, with identical timestamps (and the same
    hidden flag) becomes one EXECUTE whose size is the run total. The
    merged trade keeps the first order_id of the run. All other messages
    pass through unchanged and break runs.
    """
    out: list[Message] = []
    run: Message | None = None
    for m in messages:
        if m.kind is Kind.EXECUTE:
            if (run is not None and run.ts == m.ts and run.side is m.side
                    and run.hidden == m.hidden):
                run.size += m.size
                continue
            run = Message(m.ts, Kind.EXECUTE, m.order_id, m.side, m.price,
                          m.size, m.hidden)
            out.append(run)
        else:
            run = None
            out.append(m)
    return out

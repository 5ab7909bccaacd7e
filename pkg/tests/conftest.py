import pytest

from lobflow import BookState, Kind, Message, Side, Snapshot


def mk(ts, kind, oid, side, price, size, **kw):
    """Terse message builder for fixtures."""
    return Message(ts, Kind[kind], oid, Side.BID if side in ("B", "BID") else Side.ASK,
                   price, size, **kw)


def ladder_book(bids, asks, start_oid=1000, ts=0):
    """Book with one order per level; bids/asks are [(price, volume), ...]."""
    book = BookState()
    oid = start_oid
    for price, vol in bids:
        book.apply(Message(ts, Kind.ADD, oid, Side.BID, price, vol))
        oid += 1
    for price, vol in asks:
        book.apply(Message(ts, Kind.ADD, oid, Side.ASK, price, vol))
        oid += 1
    return book


@pytest.fixture
def fig_book_snapshot():
    """Four-level reference book: volumes (8000, 10000, 7000, 15000) behind
    a one-tick spread, mirrored on both sides."""
    return Snapshot(
        ts=0,
        bids=((2500, 8000), (2499, 10000), (2498, 7000), (2497, 15000)),
        asks=((2501, 8000), (2502, 10000), (2503, 7000), (2504, 15000)),
    )

import io
import json

import pytest

from lobflow import (
    Kind,
    Message,
    SessionConfig,
    Side,
    filter_session,
    parse_stream,
    recombine_market_orders,
    sort_by_ts,
    write_csv,
    write_ndjson,
)
from lobflow.errors import ConfigError, MalformedRecord

from conftest import mk

H = 3_600_000_000_000  # ns per hour


def test_parse_ndjson_basic():
    line = ('{"ts":36000000000000,"kind":"ADD","order_id":1,"side":"B",'
            '"price":2629,"size":100}')
    msgs, diags = parse_stream(line, "ndjson")
    assert diags == []
    (m,) = msgs
    assert m == Message(36000000000000, Kind.ADD, 1, Side.BID, 2629, 100)


def test_parse_rejects_zero_size():
    line = '{"ts":1,"kind":"ADD","order_id":1,"side":"B","price":10,"size":0}'
    msgs, diags = parse_stream(line, "ndjson")
    assert msgs == [] and len(diags) == 1
    assert "size" in diags[0].reason


def test_parse_lenient_skips_bad_middle_line():
    lines = "\n".join([
        '{"ts":1,"kind":"ADD","order_id":1,"side":"B","price":10,"size":5}',
        '{"ts":2,"kind":"ADD","order_id":2,"side":"B","price":10,"size":0}',
        '{"ts":3,"kind":"EXECUTE","order_id":3,"side":"A","price":10,"size":5}',
    ])
    msgs, diags = parse_stream(lines, "ndjson")
    assert len(msgs) == 2 and len(diags) == 1
    assert diags[0].line == 2
    # input order preserved
    assert [m.ts for m in msgs] == [1, 3]


def test_parse_strict_raises():
    with pytest.raises(MalformedRecord):
        parse_stream('{"ts":1,"kind":"NOPE","order_id":1,"side":"B",'
                     '"price":10,"size":5}', "ndjson", strict=True)


def test_parse_unknown_format():
    with pytest.raises(ConfigError):
        parse_stream("", "xml")


def test_parse_modify_requires_sizes():
    good = ('{"ts":1,"kind":"MODIFY","order_id":1,"side":"A","price":10,'
            '"old_size":50,"new_size":20}')
    msgs, diags = parse_stream(good, "ndjson")
    assert msgs[0].old_size == 50 and msgs[0].new_size == 20
    bad = '{"ts":1,"kind":"MODIFY","order_id":1,"side":"A","price":10,"size":20}'
    _, diags = parse_stream(bad, "ndjson")
    assert len(diags) == 1


def test_parse_execute_hidden_flag():
    line = ('{"ts":1,"kind":"EXECUTE","order_id":9,"side":"A","price":10,'
            '"size":5,"hidden":true}')
    msgs, _ = parse_stream(line, "ndjson")
    assert msgs[0].hidden is True
    # hidden ignored on limit events
    line2 = ('{"ts":1,"kind":"ADD","order_id":9,"side":"A","price":10,'
             '"size":5,"hidden":true}')
    msgs2, _ = parse_stream(line2, "ndjson")
    assert msgs2[0].hidden is False


def test_ndjson_round_trip():
    msgs = [
        mk(1, "ADD", 1, "B", 100, 10),
        mk(2, "MODIFY", 1, "B", 100, 4, old_size=10, new_size=4),
        mk(3, "EXECUTE", 2, "A", 100, 4, hidden=True),
        mk(4, "DELETE", 1, "B", 100, 4),
    ]
    buf = io.StringIO()
    write_ndjson(msgs, buf)
    back, diags = parse_stream(buf.getvalue(), "ndjson")
    assert diags == []
    assert back == msgs


def test_csv_round_trip():
    msgs = [
        mk(1, "ADD", 1, "B", 100, 10),
        mk(2, "CANCEL", 1, "B", 100, 3),
        mk(3, "MODIFY", 1, "B", 100, 0, old_size=7, new_size=0),
        mk(4, "EXECUTE", 2, "B", 101, 9, hidden=True),
    ]
    buf = io.StringIO()
    write_csv(msgs, buf)
    back, diags = parse_stream(buf.getvalue(), "csv")
    assert diags == []
    assert back == msgs


def test_csv_reports_line_numbers():
    text = ("ts,kind,order_id,side,price,size,hidden,old_size,new_size\n"
            "1,ADD,1,B,100,10,,,\n"
            "2,ADD,2,B,100,-5,,,\n")
    msgs, diags = parse_stream(text, "csv")
    assert len(msgs) == 1
    assert diags[0].line == 3


def _session_cfg(**kw):
    kw.setdefault("session_start", 10 * H)
    kw.setdefault("session_end", 12 * H)
    kw.setdefault("bucket_volume", 100)
    return SessionConfig(**kw)


def test_filter_session_drops_hidden_and_windows():
    cfg = _session_cfg()
    msgs = [
        mk(9 * H, "ADD", 1, "B", 100, 10),            # seed
        mk(9 * H + 1, "EXECUTE", 2, "A", 100, 5),     # seed execute kept
        mk(10 * H, "ADD", 3, "A", 101, 10),           # boundary: kept
        mk(10 * H + 1, "EXECUTE", 4, "B", 101, 5, hidden=True),  # dropped
        mk(11 * H, "EXECUTE", 5, "B", 101, 5),
        mk(12 * H, "CANCEL", 1, "B", 100, 5),         # boundary end: kept
        mk(12 * H + 1, "ADD", 6, "B", 99, 10),        # after end: dropped
    ]
    out = filter_session(msgs, cfg)
    assert [m.order_id for m in out.seed] == [1, 2]
    assert [m.order_id for m in out.session] == [3, 5, 1]


def test_filter_session_counts():
    cfg = _session_cfg()
    msgs = [mk(9 * H + i, "ADD", i, "B", 100, 1) for i in range(4)]
    msgs += [mk(10 * H + i, "ADD", 10 + i, "B", 100, 1) for i in range(6)]
    out = filter_session(msgs, cfg)
    assert len(out.session) == 6
    assert len(out.seed) == 4


def test_recombine_merges_same_ts_same_side():
    msgs = [
        mk(5, "EXECUTE", 1, "B", 100, 100),
        mk(5, "EXECUTE", 2, "B", 100, 200),
    ]
    out = recombine_market_orders(msgs)
    assert len(out) == 1
    assert out[0].size == 300
    assert out[0].order_id == 1


def test_recombine_respects_side_and_adjacency():
    msgs = [
        mk(5, "EXECUTE", 1, "B", 100, 100),
        mk(5, "EXECUTE", 2, "A", 100, 200),   # direction differs
    ]
    assert len(recombine_market_orders(msgs)) == 2

    msgs = [
        mk(5, "EXECUTE", 1, "B", 100, 100),
        mk(5, "ADD", 9, "B", 99, 10),
        mk(5, "EXECUTE", 2, "B", 100, 200),   # non-consecutive
    ]
    out = recombine_market_orders(msgs)
    assert sum(1 for m in out if m.kind is Kind.EXECUTE) == 2


def test_recombine_idempotent_and_conserves_volume():
    msgs = [
        mk(1, "EXECUTE", 1, "B", 100, 10),
        mk(1, "EXECUTE", 2, "B", 100, 20),
        mk(1, "EXECUTE", 3, "A", 100, 30),
        mk(2, "ADD", 4, "B", 99, 5),
        mk(3, "EXECUTE", 5, "A", 100, 40),
        mk(3, "EXECUTE", 6, "A", 100, 50),
    ]
    once = recombine_market_orders(msgs)
    twice = recombine_market_orders(once)
    assert once == twice
    vol = sum(m.size for m in msgs if m.kind is Kind.EXECUTE)
    assert sum(m.size for m in once if m.kind is Kind.EXECUTE) == vol


def test_filter_and_recombine_commute_on_hidden_free_streams():
    cfg = _session_cfg()
    msgs = [
        mk(10 * H + 1, "EXECUTE", 1, "B", 100, 10),
        mk(10 * H + 1, "EXECUTE", 2, "B", 100, 15),
        mk(10 * H + 2, "ADD", 3, "A", 101, 7),
        mk(10 * H + 3, "EXECUTE", 4, "A", 100, 9),
    ]
    a = recombine_market_orders(filter_session(msgs, cfg).session)
    b = filter_session(recombine_market_orders(msgs), cfg).session
    assert a == b


def test_sort_by_ts_is_stable():
    msgs = [
        mk(2, "ADD", 1, "B", 100, 1),
        mk(1, "ADD", 2, "B", 100, 1),
        mk(2, "ADD", 3, "B", 100, 1),
    ]
    out = sort_by_ts(msgs)
    assert [m.order_id for m in out] == [2, 1, 3]


def test_session_config_validation():
    with pytest.raises(ConfigError):
        SessionConfig(session_start=5, session_end=5)
    with pytest.raises(ConfigError):
        SessionConfig(bucket_volume=0)
    with pytest.raises(ConfigError):
        SessionConfig(tick_size=0)

import io
import json
import logging

import pytest
from hypothesis import given, strategies as st

from congestlab.costs import BPR, Affine, Constant, Polynomial, RecursivePiecewise
from congestlab.fixtures import SHIPPED
from congestlab.formats import (
    InstanceParseError,
    InstanceValidationError,
    derive_capacity,
    derive_free_flow_time,
    load_instance,
    parse_instance,
    serialize_instance,
    sweep_csv,
    write_sweep_csv,
)
from congestlab.network import Instance, Network, ODPair
from congestlab.scaling import CSV_FIELDS, SweepRow

PIGOU_DOC = """{
  "schema_version": 1,
  "nodes": ["o", "t"],
  "arcs": [
    {"tail": "o", "head": "t", "cost": {"family": "polynomial", "terms": [[1, 4]]}},
    {"tail": "o", "head": "t", "cost": {"family": "constant", "value": 1}}
  ],
  "od_pairs": [{"origin": "o", "destination": "t", "demand": 1}]
}"""

NET = """<NUMBER OF ZONES> 2
<NUMBER OF NODES> 3
<NUMBER OF LINKS> 3
<END OF METADATA>

~ init term capacity length fft B power speed toll type ;
1 2 200 1 10 0.15 4 0 0 1 ;
2 3 100 1 5 0.15 4 0 0 1 ;
1 3 50 1 20 0.15 4 0 0 1 ;
"""

TRIPS = """<NUMBER OF ZONES> 3
<TOTAL OD FLOW> {total}
<END OF METADATA>

Origin 1
    2 : 5.0; 3 : 10.0;
Origin 2
    3 : 0.0;
"""


def test_minimal_json_pigou():
    inst = parse_instance(PIGOU_DOC.encode())
    assert inst.network.num_nodes == 2
    assert inst.network.num_arcs == 2
    assert len(inst.od_pairs) == 1
    assert inst.network.arcs[1].cost == Constant(1.0)


def test_json_syntax_error_has_position():
    with pytest.raises(InstanceParseError) as err:
        parse_instance('{\n  "schema_version": 1,\n  "nodes": [,]\n}')
    assert err.value.line == 3 and err.value.column is not None


def test_json_validation_errors_aggregate():
    doc = json.loads(PIGOU_DOC)
    doc["od_pairs"] = [{"origin": "o", "destination": "t", "demand": -1}, {"origin": "t", "destination": "o", "demand": 1}]
    with pytest.raises(InstanceValidationError) as err:
        parse_instance(json.dumps(doc))
    assert len(err.value.violations) == 2


def test_json_schema_version_checked():
    doc = json.loads(PIGOU_DOC)
    doc["schema_version"] = 2
    with pytest.raises(InstanceParseError):
        parse_instance(json.dumps(doc))


def test_tntp_rows_become_bpr():
    inst = parse_instance(NET, "tntp", TRIPS.format(total=15.0))
    first = inst.network.arcs[0].cost
    assert first == BPR(10.0, 200.0, 0.15, 4.0)
    assert first.gamma == pytest.approx(0.15 * 10 / 200**4, rel=1e-15)
    assert [(od.origin, od.destination, od.demand) for od in inst.od_pairs] == [(0, 1, 5.0), (0, 2, 10.0)]


def test_tntp_total_mismatch_warns(caplog):
    with caplog.at_level(logging.WARNING, logger="congestlab.formats"):
        inst = parse_instance(NET, "tntp", TRIPS.format(total=99.0))
    assert inst.total_demand == 15.0
    assert any("declared total ignored" in r.message for r in caplog.records)


def test_tntp_bad_row_position():
    bad = NET.replace("2 3 100 1 5", "2 3 abc 1 5")
    with pytest.raises(InstanceParseError) as err:
        parse_instance(bad, "tntp", TRIPS.format(total=15.0))
    assert err.value.line == 8


def test_tntp_load_from_disk(tmp_path):
    (tmp_path / "toy_net.tntp").write_text(NET)
    (tmp_path / "toy_trips.tntp").write_text(TRIPS.format(total=15.0))
    assert load_instance(tmp_path / "toy_net.tntp").total_demand == 15.0


def test_derive_capacity():
    assert derive_capacity(750, 2) == 200
    assert derive_capacity(7.5, 1) == 1
    with pytest.raises(ValueError):
        derive_capacity(0, 1)
    assert derive_free_flow_time(100.0, 10.0) == 10.0


costs = st.one_of(
    st.builds(BPR, st.floats(0.01, 100), st.floats(0.01, 1e4), st.floats(0, 2), st.floats(0, 6)),
    st.builds(
        lambda t: Polynomial(tuple(t)),
        st.lists(st.tuples(st.floats(0, 10), st.floats(0, 5)), min_size=1, max_size=3),
    ),
    st.builds(Affine, st.floats(0, 10), st.floats(0, 10)),
    st.builds(Constant, st.floats(0, 10)),
    st.just(RecursivePiecewise((0.0, 1.0, 3.0, 10.0))),
)


@st.composite
def instances(draw):
    n = draw(st.integers(2, 5))
    arcs = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), costs), min_size=1, max_size=8))
    arcs = [(t, h, c) for t, h, c in arcs if t != h] or [(0, 1, Constant(1.0))]
    net = Network.build(n, arcs, tuple(f"n{i}" for i in range(n)))
    ods = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.floats(0, 1e6)), min_size=1, max_size=3))
    return Instance(net, tuple(ODPair(o, d, v) for o, d, v in ods))


@given(instances())
def test_json_round_trip(inst):
    text = serialize_instance(inst)
    back = parse_instance(text, validate=False)
    assert back == inst
    assert serialize_instance(back) == text


@pytest.mark.parametrize("name", sorted(SHIPPED))
def test_shipped_fixture_files_match_builders(name, fixture_path):
    assert load_instance(fixture_path(name), validate=False) == SHIPPED[name]()


def _rows():
    return [
        SweepRow(10.0, 2.0, 1.5, 4 / 3, 0.1, 0.2, 1 / 7, 1e-9, 2e-9),
        SweepRow(101074.0, 3.0, 3.0, 1.0, 0.3, 0.3, 0.0, 0.0, 0.0),
    ]


def test_csv_schema_and_precision(tmp_path):
    dest = tmp_path / "out.csv"
    n = write_sweep_csv(_rows()[:1], dest)
    data = dest.read_bytes()
    assert n == len(data)
    lines = data.decode().splitlines()
    assert len(lines) == 2
    assert lines[0] == "t,c_ne,c_so,poa,ratio_ne,ratio_so,eps_so,ne_gap,so_gap"
    assert lines[0].split(",") == list(CSV_FIELDS)
    assert float(lines[1].split(",")[3]) == 4 / 3
    assert lines[1].split(",")[3] == "1.3333333333333333"


def test_csv_final_row_present_and_deterministic():
    a, b = sweep_csv(_rows()), sweep_csv(_rows())
    assert a == b
    assert a.splitlines()[-1].startswith("101074,")
    buf = io.StringIO()
    write_sweep_csv(_rows(), buf)
    assert buf.getvalue() == a


def test_csv_empty_rows_rejected():
    with pytest.raises(ValueError):
        sweep_csv([])

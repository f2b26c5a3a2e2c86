import json
from importlib import resources

import pytest
from hypothesis import given, settings, strategies as st

from otsbound.caseio import (CaseDocument, FlexibleSpec, SourceFormat, apply_flexible_spec,
                             load_bundled, parse_matpower, parse_native, write_native)
from otsbound.errors import (InvalidArgument, IslandingError, MissingRating, ParseError,
                             UnsupportedCost, UnsupportedLine)
from otsbound.graph import build_fixed_subgraph, is_spanning_connected
from otsbound.network import CostKind, validate


def two_bus_text():
    return (resources.files("otsbound") / "data" / "two_bus.m").read_text()


def test_matpower_two_bus():
    doc = parse_matpower(two_bus_text())
    net = doc.network
    assert doc.source_format is SourceFormat.MATPOWER and doc.base_mva == 100.0
    assert doc.name == "two_bus"
    assert [b.demand for b in net.buses] == [0.0, 30.0]
    (ln,) = net.lines
    assert ln.susceptance == pytest.approx(10.0) and ln.capacity == 100.0
    (g,) = net.generators
    assert (g.p_min, g.p_max) == (5.0, 80.0)
    assert g.cost.kind is CostKind.QUADRATIC
    assert (g.cost.a, g.cost.b, g.cost.c) == (0.1, 5.0, 0.0)


def test_out_of_service_branch_is_dropped():
    text = two_bus_text().replace("0\t0\t1\t-360", "0\t0\t0\t-360")
    net = parse_matpower(text).network
    assert net.lines == ()
    assert validate(net) == []
    assert not is_spanning_connected(build_fixed_subgraph(net))


def test_non_positive_reactance_rejected():
    text = two_bus_text().replace("0.01\t0.1\t0.02", "0.01\t-0.1\t0.02")
    with pytest.raises(UnsupportedLine):
        parse_matpower(text)


def test_zero_rating_rejected():
    text = two_bus_text().replace("0.02\t100\t100", "0.02\t0\t100")
    with pytest.raises(MissingRating):
        parse_matpower(text)


def test_piecewise_gencost_rejected():
    text = two_bus_text().replace("2\t0\t0\t3\t0.1", "1\t0\t0\t3\t0.1")
    with pytest.raises(UnsupportedCost):
        parse_matpower(text)


def test_linear_gencost_two_coefficients():
    text = two_bus_text().replace("2\t0\t0\t3\t0.1\t5\t0", "2\t0\t0\t2\t7\t1")
    g = parse_matpower(text).network.generators[0]
    assert g.cost.kind is CostKind.LINEAR and (g.cost.b, g.cost.c) == (7.0, 1.0)


def test_missing_matrix_is_a_parse_error():
    text = two_bus_text().split("%% branch data")[0]
    with pytest.raises(ParseError) as err:
        parse_matpower(text)
    assert err.value.path == "mpc.branch"


def test_sparse_bus_numbers_are_renumbered():
    text = two_bus_text().replace("\t2\t1\t30", "\t7\t1\t30").replace("1\t2\t0.01", "1\t7\t0.01")
    doc = parse_matpower(text)
    assert [b.id for b in doc.network.buses] == [1, 2]
    assert doc.bus_id_map == {1: 1, 2: 7}


def test_matpower_with_flexible_spec():
    doc = parse_matpower(two_bus_text(), FlexibleSpec.explicit([]))
    assert doc.network.flexible_lines == ()


def test_native_round_trip_and_determinism():
    for name in ("six_bus", "example1", "tightness"):
        doc = load_bundled(name)
        text = write_native(doc)
        assert parse_native(text) == doc
        assert write_native(parse_native(text)) == text
        bundled = (resources.files("otsbound") / "data" / f"{name}.json").read_text()
        assert text == bundled


def test_empty_flexible_set_serialises_as_empty_list():
    doc = load_bundled("six_bus")
    doc = CaseDocument(doc.network.with_flexible([], r=0), doc.name)
    assert json.loads(write_native(doc))["flexible_lines"] == []


def test_missing_key_reports_its_path():
    doc = json.loads(write_native(load_bundled("six_bus")))
    del doc["flexible_lines"]
    with pytest.raises(ParseError) as err:
        parse_native(json.dumps(doc))
    assert err.value.path == "$.flexible_lines"


def test_schema_type_error_reports_nested_path():
    doc = json.loads(write_native(load_bundled("six_bus")))
    doc["lines"][2]["capacity"] = "big"
    with pytest.raises(ParseError) as err:
        parse_native(json.dumps(doc))
    assert err.value.path == "$.lines[2].capacity"


def test_unknown_flexible_id_and_invalid_network_rejected():
    doc = json.loads(write_native(load_bundled("six_bus")))
    doc["flexible_lines"].append(99)
    with pytest.raises(ParseError):
        parse_native(json.dumps(doc))
    doc = json.loads(write_native(load_bundled("six_bus")))
    doc["lines"][0]["susceptance"] = 0
    with pytest.raises(ParseError):
        parse_native(json.dumps(doc))


def test_example1_topology():
    net = load_bundled("example1").network
    assert net.n_buses == 6 and len(net.lines) == 8
    ends = {ln.id: (ln.from_bus, ln.to_bus) for ln in net.lines}
    assert ends == {1: (1, 2), 2: (2, 3), 3: (1, 3), 4: (4, 5), 5: (5, 6),
                    6: (1, 6), 7: (2, 5), 8: (3, 4)}
    assert net.flexible_ids == (6, 7, 8)


def test_explicit_spec():
    net = load_bundled("six_bus").network
    out = apply_flexible_spec(net, FlexibleSpec.explicit([3], r=1))
    assert out.flexible_ids == (3,) and out.r == 1
    with pytest.raises(InvalidArgument):
        apply_flexible_spec(net, FlexibleSpec.explicit([42]))
    with pytest.raises(InvalidArgument):
        apply_flexible_spec(net, FlexibleSpec.explicit([3], r=2))


def test_random_spanning_tree_fixed_set():
    net = load_bundled("six_bus").network
    out = apply_flexible_spec(net, FlexibleSpec.random_spanning(7, net.n_buses - 1))
    assert len(out.fixed_lines) == net.n_buses - 1
    assert is_spanning_connected(build_fixed_subgraph(out))
    again = apply_flexible_spec(net, FlexibleSpec.random_spanning(7, net.n_buses - 1))
    assert again.flexible_ids == out.flexible_ids


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(5, 8))
def test_random_spanning_always_connected(seed, count):
    net = load_bundled("six_bus").network
    out = apply_flexible_spec(net, FlexibleSpec.random_spanning(seed, count))
    assert len(out.fixed_lines) == count
    assert is_spanning_connected(build_fixed_subgraph(out))


def test_random_spanning_errors():
    net = load_bundled("six_bus").network
    with pytest.raises(InvalidArgument):
        apply_flexible_spec(net, FlexibleSpec.random_spanning(1, 9))
    with pytest.raises(InvalidArgument):
        apply_flexible_spec(net, FlexibleSpec.random_spanning(1, 4))
    split = net.__class__(net.buses, net.generators, tuple(ln for ln in net.lines if ln.id not in (6, 7, 8)))
    with pytest.raises(IslandingError):
        apply_flexible_spec(split, FlexibleSpec.random_spanning(1, 5))


def test_flexible_spec_parse():
    assert FlexibleSpec.parse("3,5,7", 2) == FlexibleSpec.explicit([3, 5, 7], 2)
    assert FlexibleSpec.parse("random:4:10") == FlexibleSpec.random_spanning(4, 10)
    assert FlexibleSpec.parse("") == FlexibleSpec.explicit([])
    with pytest.raises(InvalidArgument):
        FlexibleSpec.parse("random:x")


def test_unknown_bundled_case():
    with pytest.raises(InvalidArgument):
        load_bundled("nope")

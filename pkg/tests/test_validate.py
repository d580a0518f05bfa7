import dataclasses
import json

import pytest

from conftest import layout_of
from olnd import synth
from olnd.diagram import BusSegment, LayoutConfig, LayoutDiagram, Placement, Polyline
from olnd.validate import (
    DecencyReport,
    corpus_report,
    count_crossings,
    find_dangling,
    find_overlaps,
    report_json,
    validate,
)
from olnd.graph import ComponentKind

D = ComponentKind.DISCONNECTOR


def _p(cid, x, y):
    return Placement(cid, x, y, 0, 110, D, 110)


def test_identical_coordinates_overlap(config):
    d = LayoutDiagram(placements=(_p("Disconnector#1", 0, 0), _p("Disconnector#2", 0, 0), _p("Disconnector#3", 100, 0)))
    assert find_overlaps(d, config) == [("Disconnector#1", "Disconnector#2")]


def test_touching_boxes_overlap_but_spaced_ones_do_not(config):
    # 20-wide boxes: centres 20 apart touch, 22 apart leave a 2-unit gap
    assert find_overlaps(LayoutDiagram(placements=(_p("Disconnector#1", 0, 0), _p("Disconnector#2", 20, 0))), config)
    assert not find_overlaps(LayoutDiagram(placements=(_p("Disconnector#1", 0, 0), _p("Disconnector#2", 22, 0))), config)


def test_dangling_endpoint(config):
    bus = BusSegment("Bus#1", -40, 40, 0, 110)
    sw = _p("Disconnector#1", 0, -40)
    good = Polyline(((0, 0), (0, -30)), ("Bus#1", "Disconnector#1"), 110)
    short = Polyline(((0, 0), (0, -25)), ("Bus#1", "Disconnector#1"), 110)
    off_bus = Polyline(((50, 0), (50, -30)), ("Bus#1", "Disconnector#1"), 110)
    slanted = Polyline(((0, 0), (5, -30)), ("Bus#1", "Disconnector#1"), 110)
    d = LayoutDiagram(placements=(sw,), buses=(bus,), polylines=(good, short, off_bus, slanted))
    assert find_dangling(d, config) == [1, 2, 3]


@pytest.mark.parametrize("name", list(synth.SCHEME_FIXTURES))
def test_fixtures_pass(name, config):
    report = validate(layout_of(synth.SCHEME_FIXTURES[name]()), config)
    assert report.passed, report.to_dict()


def test_forced_overlap_fails(config):
    d = layout_of(synth.fixture_dbsb())
    first, second = d.placements[:2]
    moved = dataclasses.replace(second, x=first.x, y=first.y)
    broken = dataclasses.replace(d, placements=(first, moved) + d.placements[2:])
    report = validate(broken, config)
    assert not report.passed
    assert (first.component_id, second.component_id) in report.overlap_pairs


def test_out_of_region_detected(config):
    d = layout_of(synth.fixture_single_bus())
    far = dataclasses.replace(d.placements[0], x=d.placements[0].x + 10_000)
    report = validate(dataclasses.replace(d, placements=(far,) + d.placements[1:]), config)
    assert report.out_of_region == [far.component_id] and not report.passed


def _lines(*pts):
    return LayoutDiagram(polylines=tuple(Polyline(p, ("A#1", "B#1"), 10) for p in pts))


def test_crossings():
    plus = _lines(((-10, 0), (10, 0)), ((0, -10), (0, 10)))
    tee = _lines(((-10, 0), (10, 0)), ((0, 0), (0, 10)))
    corner = _lines(((-10, 0), (0, 0)), ((0, 0), (0, 10)))
    assert (count_crossings(plus), count_crossings(tee), count_crossings(corner)) == (1, 0, 0)
    # a connector passing through a bus counts too
    bus = LayoutDiagram(buses=(BusSegment("Bus#1", -10, 10, 0, 10),), polylines=plus.polylines[1:])
    assert count_crossings(bus) == 1


def test_crossings_symmetric_under_reversal():
    d = layout_of(synth.fixture_three_level())
    flipped = dataclasses.replace(
        d, polylines=tuple(dataclasses.replace(l, points=l.points[::-1]) for l in reversed(d.polylines))
    )
    assert count_crossings(flipped) == count_crossings(d)


def test_corpus_report():
    ok, bad = DecencyReport(), DecencyReport(overlap_pairs=[("a", "b")], passed=False)
    assert corpus_report([("A", ok), ("B", ok)]).pass_rate == 1.0
    empty = corpus_report([])
    assert empty.pass_rate is None and empty.to_dict()["pass_rate"] == "n/a"
    mixed = corpus_report([(f"S{i:03d}", ok) for i in range(19)] + [("S019", bad)])
    assert mixed.pass_rate == 0.95 and mixed.failures == ["S019"]
    assert mixed.defects == {"dangling": 0, "out_of_region": 0, "overlap": 1}
    doc = json.loads(report_json(mixed, {"S019": bad, "S000": ok}))
    assert list(doc["substations"]) == ["S000", "S019"]
    assert doc["summary"]["total"] == 20

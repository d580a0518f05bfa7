"""End-to-end acceptance checks, one printed PASS/FAIL line per criterion."""

import time

from conftest import graph_of, layout_of
from test_emit import GOLDEN, golden_placement
from test_layout import check_invariants, random_station

from olnd import cli, synth
from olnd.cime import list_substations, parse_cime, query_substation
from olnd.diagram import LayoutConfig
from olnd.emit import dumps, emit_layout_json, node_entry
from olnd.errors import TooManyLevels
from olnd.graph import ComponentKind, build_graph
from olnd.layout import layout_substation
from olnd.topology import branches_by_bus, classify_scheme, group_voltage_levels
from olnd.validate import validate


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


def test_1_scheme_classification(capsys):
    start = time.perf_counter()
    hits = 0
    for expected, build in synth.SCHEME_FIXTURES.items():
        g = graph_of(build())
        (region,) = group_voltage_levels(g)
        scheme, _ = classify_scheme(g, region, branches_by_bus(g, region.buses))
        hits += scheme.value == expected
    elapsed = time.perf_counter() - start
    ok = hits == 5 and len(synth.SCHEME_FIXTURES) == 5 and elapsed < 1.0
    report(capsys, 1, ok, f"schemes {hits}/5 exact in {elapsed:.3f}s (limit 1s)")


def test_2_golden_json(capsys):
    text = dumps(node_entry(golden_placement()))
    report(capsys, 2, text == GOLDEN, "disconnector object byte-identical" if text == GOLDEN else text)


def test_3_synthetic_corpus(capsys):
    count = 200
    text, info = synth.generate_corpus(count)
    start = time.perf_counter()
    store = parse_cime(text)
    names = list_substations(store)
    parsed = laid = decent = crossings = 0
    slowest = 0.0
    config = LayoutConfig()
    for name in names:
        t0 = time.perf_counter()
        graph = build_graph(query_substation(store, name))
        parsed += 1
        diagram = layout_substation(graph, config, name=name)
        laid += 1
        r = validate(diagram, config)
        decent += r.passed
        crossings += r.crossing_count
        slowest = max(slowest, time.perf_counter() - t0)
    total = time.perf_counter() - start
    levels = {len(i["levels"]) for i in info}
    ok = (
        len(names) == count
        and parsed == laid == decent == count
        and slowest < 1.0
        and total < 60.0
        and levels <= {1, 2, 3, 4}
    )
    report(
        capsys,
        3,
        ok,
        f"{count} substations: parse {parsed}, layout {laid}, decent {decent}; "
        f"slowest {slowest:.3f}s, total {total:.2f}s; crossings reported {crossings}",
    )


def test_4_layout_invariants(capsys, tmp_path):
    cases = 100
    config = LayoutConfig()
    failures = []
    for seed in range(cases):
        graph, name = random_station(seed)
        try:
            d1 = layout_substation(graph, config, name=name)
            check_invariants(graph, d1, config)
            assert emit_layout_json(d1) == emit_layout_json(layout_substation(graph, config, name=name))
        except AssertionError as exc:
            failures.append(f"seed {seed}: {exc}")

    model = tmp_path / "corpus.cime"
    model.write_text(synth.generate_corpus(cases, seed=99)[0])
    one, eight = tmp_path / "j1", tmp_path / "j8"
    codes = [
        cli.main(["generate", "--input", str(model), "--out", str(d), "--jobs", j, "--format", "json"])
        for d, j in ((one, "1"), (eight, "8"))
    ]
    files = sorted(p.name for p in one.iterdir())
    same = files == sorted(p.name for p in eight.iterdir()) and all(
        (one / f).read_bytes() == (eight / f).read_bytes() for f in files
    )
    ok = not failures and codes == [0, 0] and same and len(files) == cases
    detail = f"{cases} random cases, {len(failures)} invariant failures; jobs 1 vs 8 identical: {same} ({len(files)} files)"
    report(capsys, 4, ok, detail + ("; " + failures[0] if failures else ""))


def test_5_five_levels_rejected(capsys, tmp_path):
    raised = False
    try:
        group_voltage_levels(graph_of(synth.fixture_five_levels()))
    except TooManyLevels:
        raised = True
    model = tmp_path / "five.cime"
    model.write_text(synth.fixture_five_levels())
    out = tmp_path / "out"
    code = cli.main(["generate", "--input", str(model), "--out", str(out)])
    leftovers = sorted(p.name for p in out.iterdir()) if out.exists() else []
    ok = raised and code != 0 and leftovers == []
    report(capsys, 5, ok, f"TooManyLevels raised: {raised}; exit {code}; files written {leftovers}")


def test_6_three_level_integration(capsys):
    d = layout_of(synth.fixture_three_level())
    decent = validate(d).passed
    frames = {r.level_kv: r.bbox for r in d.regions}
    # frames are (maxX, minX, maxY, minY) with y growing downward
    split = 500.0 in frames and 220.0 in frames and frames[500.0][2] < frames[220.0][3]
    t_x = sorted(p.x for p in d.placements if p.kind is ComponentKind.TRANSFORMER3W)
    low_bus = max(b.y for b in d.buses if b.voltage_kv == 220.0)
    tails = [p for p in d.placements if p.voltage_kv == 35.0]
    hanging = bool(tails) and all(p.y > low_bus and p.x in t_x for p in tails)
    under_each = sorted({p.x for p in tails}) == t_x and len(t_x) == 2
    ok = decent and split and hanging and under_each
    report(
        capsys,
        6,
        ok,
        f"validator pass {decent}; 500 kV frame above 220 kV {split}; "
        f"{len(tails)} 35 kV symbols below the 220 kV buses at transformer x {hanging and under_each}",
    )

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import BUS, LINE, ONE, SWITCH, T2W, cime, graph_of
from olnd import synth
from olnd.cime import parse_cime, query_substation
from olnd.errors import NoBuses, TooManyLevels, UnrecognizedScheme
from olnd.graph import ComponentKind, build_graph
from olnd.topology import (
    BusScheme,
    assign_branch_owner,
    branches_by_bus,
    classify_scheme,
    find_branches,
    group_voltage_levels,
    iter_sub_branches,
)


def scheme_of(text):
    g = graph_of(text)
    (region,) = group_voltage_levels(g)
    return classify_scheme(g, region, branches_by_bus(g, region.buses))


def test_regions_descending():
    text = cime(("Bus", BUS, ["1 a 35 1 F", "2 b 500 2 F", "3 c 220 3 F", "4 d 220 4 F"]))
    regions = group_voltage_levels(graph_of(text))
    assert [r.level_kv for r in regions] == [500.0, 220.0, 35.0]
    assert regions[1].buses == ("Bus#3", "Bus#4")


def test_transformer_only_level_ignored():
    text = cime(
        ("Bus", BUS, ["1 a 110 1 F"]),
        ("Disconnector", SWITCH, ["1 d 110 1 2 1 F"]),
        ("Transformer2W", T2W, ["1 t 110 10 2 3 F"]),
        ("Load", ONE, ["1 l 10 3 F"]),
    )
    assert [r.level_kv for r in group_voltage_levels(graph_of(text))] == [110.0]


def test_five_levels_and_no_buses():
    with pytest.raises(TooManyLevels):
        group_voltage_levels(graph_of(synth.fixture_five_levels()))
    with pytest.raises(NoBuses):
        group_voltage_levels(graph_of(cime(("Load", ONE, ["1 l 10 3 F"]))))


def test_shared_branch_seen_from_both_buses():
    text = cime(
        ("Bus", BUS, ["1 a 110 1 F", "2 b 110 4 F"]),
        ("Disconnector", SWITCH, ["1 d 110 1 2 1 F", "2 e 110 3 4 1 F"]),
        ("Breaker", SWITCH, ["1 k 110 2 3 1 F"]),
    )
    g = graph_of(text)
    (from_a,) = find_branches(g, "Bus#1")
    (from_b,) = find_branches(g, "Bus#2")
    assert from_a.members == ("Disconnector#1", "Breaker#1", "Disconnector#2")
    assert from_b.members == ("Disconnector#2", "Breaker#1", "Disconnector#1")
    assert from_a.other_bus == "Bus#2" and from_b.other_bus == "Bus#1"
    assert from_a.key == from_b.key


def test_load_branch():
    text = cime(("Bus", BUS, ["1 a 10 1 F"]), ("Disconnector", SWITCH, ["1 d 10 1 2 1 F"]), ("Load", ONE, ["1 l 10 2 F"]))
    (br,) = find_branches(graph_of(text), "Bus#1")
    assert br.members == ("Disconnector#1", "Load#1") and not br.shared


T_JUNCTION = cime(
    ("Bus", BUS, ["1 a 110 1 F"]),
    ("Disconnector", SWITCH, ["1 head 110 1 2 1 F", "2 tail 110 3 4 1 F", "3 leg 110 2 5 1 F"]),
    ("Breaker", SWITCH, ["1 k 110 2 3 1 F"]),
    ("ACLine", LINE, ["1 l 110 4 NULL F"]),
    ("Load", ONE, ["1 ld 110 5 F"]),
)


def _maximal_paths(g, head, entry):
    """Brute force: every simple path from the head until nothing new is reachable."""
    out = []

    def walk(cid, came_from, path):
        nxt = []
        for node in g.attributes[cid].nodes:
            if node == came_from:
                continue
            for other in g.node_owner.get(node, ()):
                kind = g.attributes[other].kind
                if other not in path and kind is not ComponentKind.BUS and not kind.is_transformer:
                    nxt.append((other, node))
        if not nxt:
            out.append(path)
        for other, node in nxt:
            walk(other, node, path + [other])

    walk(head, entry, [head])
    return out


def test_t_junction_sub_branches():
    g = graph_of(T_JUNCTION)
    (br,) = find_branches(g, "Bus#1")
    paths = _maximal_paths(g, "Disconnector#1", "1")
    assert sorted(map(tuple, paths)) == [
        ("Disconnector#1", "Breaker#1", "Disconnector#2", "ACLine#1"),
        ("Disconnector#1", "Disconnector#3", "Load#1"),
    ]
    assert set(br.members) == {c for p in paths for c in p}
    subs = list(iter_sub_branches(br.tree))
    assert [(s.members, s.placement_slot) for s in subs] == [
        (("Breaker#1", "Disconnector#2", "ACLine#1"), "Continue"),
        (("Disconnector#3", "Load#1"), "Right"),
    ]


@pytest.mark.parametrize("name", list(synth.SCHEME_FIXTURES))
def test_fixture_schemes(name):
    scheme, bypass = scheme_of(synth.SCHEME_FIXTURES[name]())
    assert scheme.value == name
    assert (bypass is not None) == (name == "MainAndBypass")


def test_bypass_bus_is_next_to_double_disconnector():
    # main bus 1, bypass bus 2: each feeder is D-B-D to the line node then D to bus 2
    _, bypass = scheme_of(synth.fixture_main_and_bypass())
    assert bypass == "Bus#2"


def test_single_dd_tie_unrecognised():
    text = cime(
        ("Bus", BUS, ["1 a 110 1 F", "2 b 110 2 F"]),
        ("Disconnector", SWITCH, ["1 x 110 1 3 1 F", "2 y 110 2 3 1 F"]),
        ("Load", ONE, ["1 l 110 3 F"]),
    )
    with pytest.raises(UnrecognizedScheme):
        scheme_of(text)


def _relabel(text: str, seed: int) -> str:
    """Shuffle record order inside every block and renumber ids."""
    rng = random.Random(seed)
    out, block = [], []
    for line in text.splitlines():
        if line.startswith("# "):
            block.append(line)
            continue
        if block:
            rng.shuffle(block)
            ids = rng.sample(range(1, 10 * len(block) + 1), len(block))
            out += [f"# {i} " + l.split(" ", 2)[2] for i, l in zip(ids, block)]
            block = []
        out.append(line)
    return "\n".join(out) + "\n"


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(sorted(synth.SCHEME_FIXTURES)), st.integers(0, 10_000))
def test_classification_invariant_under_relabelling(name, seed):
    scheme, _ = scheme_of(_relabel(synth.SCHEME_FIXTURES[name](), seed))
    assert scheme.value == name


def test_owner_rules():
    g = graph_of(synth.fixture_dbsb())
    (region,) = group_voltage_levels(g)
    upper = region.buses[0]
    shared = [b for b in find_branches(g, region.buses[1]) if b.shared]
    assert shared and all(assign_branch_owner(b, list(region.buses)) == upper for b in shared)
    lone = [b for b in find_branches(g, upper) if not b.shared]
    assert all(assign_branch_owner(b) == upper for b in lone)

    g = graph_of(synth.fixture_sectionalizer())
    (region,) = group_voltage_levels(g)
    (tie,) = [b for b in find_branches(g, region.buses[1]) if b.shared]
    assert assign_branch_owner(tie, list(region.buses)) == region.buses[0]


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_branch_partition(seed):
    text, info = synth.generate_corpus(1, seed)
    g = build_graph(query_substation(parse_cime(text), info[0]["name"]))
    regions = group_voltage_levels(g)
    first = {b: find_branches(g, b) for r in regions for b in r.buses}
    again = {b: find_branches(g, b) for r in regions for b in r.buses}
    assert {b: [x.members for x in v] for b, v in first.items()} == {b: [x.members for x in v] for b, v in again.items()}

    covered = {m for v in first.values() for br in v for m in br.members}
    # oracle: flood from bus nodes without crossing buses or transformers
    reach, stack = set(), [n for r in regions for b in r.buses for n in g.attributes[b].nodes]
    seen_nodes = set(stack)
    while stack:
        node = stack.pop()
        for cid in g.node_owner.get(node, ()):
            comp = g.attributes[cid]
            if comp.kind is ComponentKind.BUS or comp.kind.is_transformer or cid in reach:
                continue
            reach.add(cid)
            for n in comp.nodes:
                if n not in seen_nodes and n in g.node_owner:
                    seen_nodes.add(n)
                    stack.append(n)
    assert covered == reach
    for v in first.values():
        for br in v:
            assert br.head in br.members
            assert all(not g.attributes[m].kind.is_transformer for m in br.members)

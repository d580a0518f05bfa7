"""Voltage regions, branches and bus-scheme classification.

A *branch* is everything reachable from a component sitting on a bus without
crossing a bus connectivity node or a transformer. The traversal is a
depth-first walk over connectivity nodes with id-sorted children, recorded as
a :class:`TreeNode` tree rooted at the branch head. Junction nodes (one
connectivity node shared by three or more components) split a branch into
sub-branches.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import NoBuses, TooManyLevels, UnrecognizedScheme
from .graph import ComponentKind, SubstationGraph, id_key, terminals

log = logging.getLogger(__name__)

MAX_LEVELS = 4


class BusScheme(str, Enum):
    SINGLE_BUS = "SingleBus"
    DOUBLE_BUS_SINGLE_BREAKER = "DoubleBusSingleBreaker"
    MAIN_AND_BYPASS = "MainAndBypass"
    BREAKER_AND_HALF = "BreakerAndHalfOrDBDB"
    SECTIONALIZED = "SingleBusWithSectionalizer"


class Direction(str, Enum):
    UP = "Up"
    DOWN = "Down"


@dataclass(frozen=True)
class Contact:
    kind: str  # "bus" or "transformer"
    target: str
    node: str


@dataclass
class TreeNode:
    cid: str
    entry: str | None
    exits: list[str] = field(default_factory=list)
    children: list["TreeNode"] = field(default_factory=list)
    contacts: list[Contact] = field(default_factory=list)
    # non-tree connections: (connectivity node, component already drawn)
    links: list[tuple[str, str]] = field(default_factory=list)

    def walk(self) -> Iterator["TreeNode"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def size(self) -> int:
        return sum(1 for _ in self.walk())


@dataclass(frozen=True)
class SubBranch:
    parent: str  # component id at whose exit node the sub-branch starts
    members: tuple[str, ...]
    placement_slot: str  # "Continue" or "Right"


@dataclass
class Branch:
    head: str
    members: tuple[str, ...]
    owner_bus: str
    other_bus: str | None
    tree: TreeNode
    buses: frozenset[str]
    direction: Direction | None = None

    @property
    def shared(self) -> bool:
        return self.other_bus is not None

    @property
    def key(self) -> frozenset[str]:
        return frozenset(self.members)

    def transformer_contacts(self) -> list[tuple[str, Contact]]:
        return [(n.cid, c) for n in self.tree.walk() for c in n.contacts if c.kind == "transformer"]

    def bus_contacts(self) -> list[tuple[str, Contact]]:
        return [(n.cid, c) for n in self.tree.walk() for c in n.contacts if c.kind == "bus"]


@dataclass(frozen=True)
class VoltageRegion:
    level_kv: float
    buses: tuple[str, ...]
    scheme: BusScheme | None = None
    bypass_bus: str | None = None
    # (maxX, minX, maxY, minY)
    bbox: tuple[float, float, float, float] | None = None
    warnings: tuple[str, ...] = ()


def bus_nodes(graph: SubstationGraph) -> frozenset[str]:
    return frozenset(n for bus in graph.buses for n in bus.nodes)


def grow_tree(graph: SubstationGraph, root: str, entry: str | None, visited: set[str]) -> TreeNode:
    """Depth-first tree from ``root``, entered through connectivity node ``entry``.

    Stops at bus connectivity nodes and at transformers, recording both as
    contacts. ``visited`` is updated in place.
    """
    stop = bus_nodes(graph)
    visited.add(root)
    return _grow(graph, root, entry, visited, stop)


def _grow(graph, cid, entry, visited, stop) -> TreeNode:
    node = TreeNode(cid, entry)
    exits: list[str] = []
    for c in terminals(graph.attributes[cid]):
        if c != entry and c not in exits:
            exits.append(c)
    node.exits = exits
    for c in exits:
        linked = False
        for other in graph.node_owner.get(c, ()):
            if other == cid:
                continue
            kind = graph.attributes[other].kind
            if kind is ComponentKind.BUS:
                node.contacts.append(Contact("bus", other, c))
            elif kind.is_transformer:
                node.contacts.append(Contact("transformer", other, c))
            elif c in stop:
                continue
            elif other in visited:
                if not linked and not _is_relative(node, other):
                    node.links.append((c, other))
                    linked = True
            else:
                visited.add(other)
                node.children.append(_grow(graph, other, c, visited, stop))
    return node


def _is_relative(node: TreeNode, other: str) -> bool:
    return any(ch.cid == other for ch in node.children)


def _branch_from_tree(tree: TreeNode, bus_id: str) -> Branch:
    members = tuple(n.cid for n in tree.walk())
    touched = {c.target for _, c in ((n.cid, c) for n in tree.walk() for c in n.contacts) if c.kind == "bus"}
    touched.add(bus_id)
    others = sorted(touched - {bus_id}, key=id_key)
    return Branch(
        head=tree.cid,
        members=members,
        owner_bus=bus_id,
        other_bus=others[0] if others else None,
        tree=tree,
        buses=frozenset(touched),
    )


def find_branches(graph: SubstationGraph, bus_id: str) -> list[Branch]:
    """One branch per distinct component group hanging off ``bus_id``."""
    bus = graph.component(bus_id)
    visited: set[str] = set()
    out: list[Branch] = []
    for node in bus.nodes:
        for cid in graph.node_owner.get(node, ()):
            kind = graph.attributes[cid].kind
            if cid in visited or kind is ComponentKind.BUS or kind.is_transformer:
                continue
            tree = grow_tree(graph, cid, node, visited)
            out.append(_branch_from_tree(tree, bus_id))
    return out


def iter_sub_branches(tree: TreeNode) -> Iterator[SubBranch]:
    """Sub-branches created at every junction of ``tree``.

    The largest child (ties by id) continues the parent's direction; the
    rest are placed to the right.
    """
    for node in tree.walk():
        if len(node.children) < 2:
            continue
        cont = continue_child(node)
        for child in node.children:
            slot = "Continue" if child is cont else "Right"
            yield SubBranch(node.cid, tuple(n.cid for n in child.walk()), slot)


def continue_child(node: TreeNode) -> TreeNode | None:
    if not node.children:
        return None
    return min(node.children, key=lambda ch: (-ch.size(), id_key(ch.cid)))


def group_voltage_levels(graph: SubstationGraph) -> list[VoltageRegion]:
    buses = graph.buses
    if not buses:
        raise NoBuses("substation has no buses")
    levels: dict[float, list[str]] = {}
    for bus in buses:
        levels.setdefault(bus.kv, []).append(bus.id)
    if len(levels) > MAX_LEVELS:
        found = ", ".join(f"{kv:g}" for kv in sorted(levels, reverse=True))
        raise TooManyLevels(f"{len(levels)} bus voltage levels ({found}); at most {MAX_LEVELS} supported")
    return [
        VoltageRegion(kv, tuple(sorted(ids, key=id_key)))
        for kv, ids in sorted(levels.items(), key=lambda kv: -kv[0])
    ]


def path_to(tree: TreeNode, target: str) -> list[list[str]]:
    """Root-to-node paths (component ids) for every node touching bus ``target``."""
    out: list[list[str]] = []

    def rec(node: TreeNode, trail: list[str]) -> None:
        trail = trail + [node.cid]
        if any(c.kind == "bus" and c.target == target for c in node.contacts):
            out.append(trail)
        for child in node.children:
            rec(child, trail)

    rec(tree, [])
    return out


_LETTER = {ComponentKind.DISCONNECTOR: "D", ComponentKind.BREAKER: "B"}


def _signature(graph: SubstationGraph, path: Sequence[str]) -> str:
    return "".join(_LETTER.get(graph.attributes[c].kind, "x") for c in path)


def _is_chained_dbd(sig: str) -> bool:
    return len(sig) >= 6 and len(sig) % 3 == 0 and sig == "DBD" * (len(sig) // 3)


def _classify_pair(graph, a: str, b: str, by_bus: Mapping[str, list[Branch]]) -> tuple[BusScheme, str | None]:
    sigs: list[str] = []
    for br in by_bus.get(a, ()):
        if b in br.buses:
            sigs.extend(_signature(graph, p) for p in path_to(br.tree, b))
    private_a = [br for br in by_bus.get(a, ()) if b not in br.buses]
    private_b = [br for br in by_bus.get(b, ()) if a not in br.buses]

    if any(_is_chained_dbd(s) for s in sigs):
        return BusScheme.BREAKER_AND_HALF, None
    fwd = sigs.count("DBDD")
    rev = sigs.count("DDBD")
    if fwd + rev >= 2:
        return BusScheme.MAIN_AND_BYPASS, (b if fwd >= rev else a)
    if sigs.count("DD") >= 2:
        return BusScheme.DOUBLE_BUS_SINGLE_BREAKER, None
    if sigs == ["DBD"] and private_a and private_b:
        return BusScheme.SECTIONALIZED, None
    raise UnrecognizedScheme(f"buses {a} and {b}: inter-bus signatures {sorted(sigs)}")


def classify_scheme(
    graph: SubstationGraph,
    region: VoltageRegion,
    branches: Mapping[str, list[Branch]],
) -> tuple[BusScheme, str | None]:
    """Bus scheme of ``region`` and, for main-and-bypass, the bypass bus.

    ``branches`` maps each bus id to :func:`find_branches` output. Regions
    with three or four buses are classified pairwise and must agree.
    """
    buses = region.buses
    if len(buses) == 1:
        return BusScheme.SINGLE_BUS, None
    if len(buses) == 2:
        return _classify_pair(graph, buses[0], buses[1], branches)

    results = []
    for a, b in combinations(buses, 2):
        if any(b in br.buses for br in branches.get(a, ())):
            results.append(_classify_pair(graph, a, b, branches))
    kinds = {r[0] for r in results}
    if len(kinds) != 1:
        raise UnrecognizedScheme(f"{len(buses)}-bus region at {region.level_kv:g} kV: pair schemes {sorted(k.value for k in kinds)}")
    return results[0]


def assign_branch_owner(branch: Branch, order: Sequence[str] | None = None) -> str:
    """Bus in charge of drawing ``branch``: the first of its buses in ``order``.

    ``order`` is the row-major bus order of the layout (upper before lower,
    left before right); without it buses are taken in id order.
    """
    if order is not None:
        for bus in order:
            if bus in branch.buses:
                return bus
    return min(branch.buses, key=id_key)


def branches_by_bus(graph: SubstationGraph, buses: Iterable[str]) -> dict[str, list[Branch]]:
    return {bus: find_branches(graph, bus) for bus in buses}


def region_of_bus(regions: Sequence[VoltageRegion]) -> dict[str, VoltageRegion]:
    return {bus: r for r in regions for bus in r.buses}

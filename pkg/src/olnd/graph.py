"""Adjacency-map view of one substation.

Graph vertices are components (tagged ``Kind#id``); two components are
neighbours when they share a connectivity node. Alongside the adjacency map
the graph keeps the attribute map and, per connectivity node, the components
touching it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .cime import Record
from .errors import DanglingNode, DuplicateComponentId, GraphError, UnknownComponent


class ComponentKind(str, Enum):
    BUS = "Bus"
    BREAKER = "Breaker"
    DISCONNECTOR = "Disconnector"
    ACLINE = "ACLine"
    LOAD = "Load"
    TRANSFORMER2W = "Transformer2W"
    TRANSFORMER3W = "Transformer3W"
    COMPENSATOR = "Compensator"
    GENUNIT = "GenUnit"

    @property
    def is_transformer(self) -> bool:
        return self in (ComponentKind.TRANSFORMER2W, ComponentKind.TRANSFORMER3W)

    @property
    def is_switch(self) -> bool:
        return self in (ComponentKind.BREAKER, ComponentKind.DISCONNECTOR)


_TWO_TERMINAL = (ComponentKind.BREAKER, ComponentKind.DISCONNECTOR, ComponentKind.TRANSFORMER2W)


def id_key(cid: str) -> tuple[str, int, str]:
    """Sort key for ``Kind#123`` tags: kind, then numeric id."""
    prefix, _, num = cid.partition("#")
    try:
        return (prefix, int(num), "")
    except ValueError:
        return (prefix, -1, num)


@dataclass(frozen=True)
class Component:
    id: str
    kind: ComponentKind
    name: str
    voltage_kv: tuple[float, ...]
    status: str | None  # "open" / "closed" for switches, None otherwise
    nodes: tuple[str, ...]

    @property
    def kv(self) -> float:
        """Nominal voltage; the highest winding for transformers."""
        return max(self.voltage_kv) if self.voltage_kv else 0.0

    @property
    def closed(self) -> bool:
        return self.status != "open"


@dataclass(frozen=True)
class SubstationGraph:
    adjacency: Mapping[str, tuple[str, ...]]
    attributes: Mapping[str, Component]
    node_owner: Mapping[str, tuple[str, ...]]
    external_nodes: frozenset[str] = frozenset()

    def __contains__(self, cid: str) -> bool:
        return cid in self.attributes

    def __len__(self) -> int:
        return len(self.attributes)

    def component(self, cid: str) -> Component:
        try:
            return self.attributes[cid]
        except KeyError:
            raise UnknownComponent(f"unknown component {cid!r}") from None

    def of_kind(self, *kinds: ComponentKind) -> list[Component]:
        return [c for c in self.attributes.values() if c.kind in kinds]

    @property
    def buses(self) -> list[Component]:
        return self.of_kind(ComponentKind.BUS)

    @property
    def transformers(self) -> list[Component]:
        return self.of_kind(ComponentKind.TRANSFORMER2W, ComponentKind.TRANSFORMER3W)


def component_from_record(rec: Record) -> Component:
    try:
        kind = ComponentKind(rec.kind)
    except ValueError:
        raise GraphError(f"{rec.kind} records are not components") from None
    volts = rec.voltages
    if kind.is_transformer:
        expected = 3 if kind is ComponentKind.TRANSFORMER3W else 2
        if len(volts) != expected:
            raise GraphError(f"{kind.value}#{rec.id} needs {expected} winding voltages, got {len(volts)}")
    status = None
    if kind.is_switch:
        status = "open" if rec.closed is False else "closed"
    return Component(f"{kind.value}#{rec.id}", kind, rec.name, volts, status, rec.nodes)


def build_graph(records: Iterable[Record]) -> SubstationGraph:
    """Build the graph for one substation. ``Substation`` records are skipped."""
    attributes: dict[str, Component] = {}
    for rec in records:
        if rec.kind == "Substation":
            continue
        comp = component_from_record(rec)
        if comp.id in attributes:
            raise DuplicateComponentId(f"duplicate component {comp.id}")
        attributes[comp.id] = comp

    external: set[str] = set()
    owners: dict[str, list[str]] = {}
    terminals: dict[str, int] = {}
    for comp in attributes.values():
        nodes = comp.nodes
        if comp.kind is ComponentKind.ACLINE and len(nodes) > 1:
            # far end leaves the station
            external.update(nodes[1:])
            nodes = nodes[:1]
        for node in nodes:
            owners.setdefault(node, []).append(comp.id)
            terminals[node] = terminals.get(node, 0) + 1

    # a free end is a leaf of its branch; a device touching nothing at all is an error
    for comp in attributes.values():
        if comp.kind in _TWO_TERMINAL and all(terminals[n] == 1 and n not in external for n in comp.nodes):
            raise DanglingNode(f"{comp.id} connects to nothing at nodes {', '.join(comp.nodes)}")

    adjacency: dict[str, set[str]] = {cid: set() for cid in attributes}
    for cids in owners.values():
        for a in cids:
            for b in cids:
                if a != b:
                    adjacency[a].add(b)

    return SubstationGraph(
        adjacency={cid: tuple(sorted(n, key=id_key)) for cid, n in sorted(adjacency.items(), key=lambda kv: id_key(kv[0]))},
        attributes=dict(sorted(attributes.items(), key=lambda kv: id_key(kv[0]))),
        node_owner={node: tuple(sorted(set(c), key=id_key)) for node, c in owners.items()},
        external_nodes=frozenset(external),
    )


def neighbors(graph: SubstationGraph, component_id: str) -> list[Component]:
    if component_id not in graph.attributes:
        raise UnknownComponent(f"unknown component {component_id!r}")
    return [graph.attributes[cid] for cid in graph.adjacency[component_id]]


def terminals(comp: Component) -> tuple[str, ...]:
    """Connectivity nodes of ``comp`` that stay inside the station."""
    if comp.kind is ComponentKind.ACLINE:
        return comp.nodes[:1]
    return comp.nodes

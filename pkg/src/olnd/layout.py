"""Coordinate assignment for a substation one-line diagram.

Pipeline, per substation:

1. group buses into voltage regions and classify each region's bus scheme;
2. extract branches, choose the owning bus of shared ones, set directions;
3. size every branch by dry-running its placement, then size buses;
4. place regions row by row (highest voltage first), buses, branches,
   transformers, and finally the bus-less tails hanging off transformers;
5. route the remaining connectors (bus contacts, transformer windings).

Coordinates are abstract units with y growing downward; the final diagram is
shifted so the canvas centre is the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .diagram import (
    BusSegment,
    LaidBranch,
    LayoutConfig,
    LayoutDiagram,
    Placement,
    Point,
    Polyline,
    bbox,
    port,
    route,
    simplify,
)
from .errors import UnrecognizedScheme
from .graph import Component, ComponentKind, SubstationGraph, id_key, terminals
from .topology import (
    Branch,
    BusScheme,
    Contact,
    Direction,
    TreeNode,
    VoltageRegion,
    assign_branch_owner,
    bus_nodes,
    classify_scheme,
    continue_child,
    find_branches,
    group_voltage_levels,
    grow_tree,
    path_to,
)

SIGN = {Direction.UP: -1, Direction.DOWN: 1}
ORIENTATION = {Direction.UP: 0, Direction.DOWN: 180}
ROLES = ("entry", "exit", "side")


# -- region arrangement ------------------------------------------------------


def region_grid(n: int) -> list[tuple[int, int]]:
    """(row, column) of each region, regions given in descending voltage."""
    grids = {
        1: [(0, 0)],
        2: [(0, 0), (1, 0)],
        3: [(0, 0), (1, 0), (1, 1)],
        4: [(0, 0), (0, 1), (1, 0), (1, 1)],
    }
    if n not in grids:
        from .errors import TooManyLevels

        raise TooManyLevels(f"{n} voltage regions; 1 to 4 supported")
    return grids[n]


def place_voltage_regions(
    regions: Sequence[VoltageRegion],
    sizes: Sequence[tuple[float, float]],
    config: LayoutConfig | None = None,
) -> list[tuple[float, float, float, float]]:
    """Frame rectangles ``(maxX, minX, maxY, minY)`` for regions of the given content sizes.

    One region per row spans the canvas width; a row of two puts the higher
    voltage on the left. Frames are separated by ``region_margin``.
    """
    config = config or LayoutConfig()
    m = config.region_margin
    grid = region_grid(len(regions))
    frame_sizes = [(w + 2 * m, h + 2 * m) for w, h in sizes]
    n_rows = max(r for r, _ in grid) + 1
    rows = [[i for i, (r, _) in enumerate(grid) if r == row] for row in range(n_rows)]
    row_widths = [sum(frame_sizes[i][0] for i in row) + m * (len(row) - 1) for row in rows]
    canvas_w = max(row_widths)

    frames: list[tuple[float, float, float, float] | None] = [None] * len(regions)
    top = 0.0
    for row, row_w in zip(rows, row_widths):
        height = max(frame_sizes[i][1] for i in row)
        if len(row) == 1:
            i = row[0]
            frames[i] = (canvas_w / 2, -canvas_w / 2, top + frame_sizes[i][1], top)
        else:
            x = -row_w / 2
            for i in row:
                w, h = frame_sizes[i]
                frames[i] = (x + w, x, top + h, top)
                x += w + m
        top += height + m
    total_h = top - m
    return [(a, b, c - total_h / 2, d - total_h / 2) for a, b, c, d in frames]


# -- bus length ---------------------------------------------------------------


def side_length(widths: Iterable[float], gap: float) -> float:
    widths = list(widths)
    if not widths:
        return gap
    return sum(widths) + gap * (len(widths) + 1)


def compute_bus_length(
    up_widths: Sequence[float], down_widths: Sequence[float], config: LayoutConfig
) -> float:
    """Longer of the two sides (branch widths plus a gap around each), floored at ``min_bus_length``."""
    gap = config.branch_gap
    return max(side_length(up_widths, gap), side_length(down_widths, gap), config.min_bus_length)


# -- branch geometry ----------------------------------------------------------


@dataclass
class TreeLayout:
    """Placement of a branch tree relative to its left edge.

    ``pos`` maps component id to (x from the left edge, level); level 1 is
    next to the bus. ``edges`` holds (parent, child, parent level).
    """

    pos: dict[str, tuple[float, int]]
    edges: list[tuple[str, str, int]]
    width: float
    head_x: float
    nodes: dict[str, TreeNode]


def tree_layout(graph: SubstationGraph, tree: TreeNode, config: LayoutConfig) -> TreeLayout:
    pos: dict[str, tuple[float, int]] = {}
    edges: list[tuple[str, str, int]] = []
    nodes: dict[str, TreeNode] = {}

    def symbol_width(n: TreeNode) -> float:
        return config.extent(graph.attributes[n.cid].kind)[0]

    def place(node: TreeNode, level: int, left: float) -> float:
        chain = [node]
        while (nxt := continue_child(chain[-1])) is not None:
            chain.append(nxt)
        col_w = max(symbol_width(n) for n in chain)
        cx = left + col_w / 2
        for i, n in enumerate(chain):
            pos[n.cid] = (cx, level + i)
            nodes[n.cid] = n
        right = left + col_w
        # farthest junctions take the nearest columns so their feed lines stay short
        for i in range(len(chain) - 1, -1, -1):
            n = chain[i]
            cont = chain[i + 1] if i + 1 < len(chain) else None
            if cont is not None:
                edges.append((n.cid, cont.cid, level + i))
            for child in n.children:
                if child is cont:
                    continue
                edges.append((n.cid, child.cid, level + i))
                right = place(child, level + i + 1, right + config.grid_unit)
        return right

    width = place(tree, 1, 0.0)
    return TreeLayout(pos, edges, width, pos[tree.cid][0], nodes)


def dry_run_branch_width(graph: SubstationGraph, branch: Branch, config: LayoutConfig) -> float:
    """Horizontal extent ``place_branch`` will give ``branch``, without placing it."""
    return tree_layout(graph, branch.tree, config).width


def _reach(graph: SubstationGraph, tl: TreeLayout, config: LayoutConfig) -> float:
    """Distance from the bus to the far edge of the farthest member."""
    pitch = config.grid_unit
    return max(
        lvl * pitch + config.extent(graph.attributes[cid].kind)[1] / 2 for cid, (_, lvl) in tl.pos.items()
    )


def _transformer_stack(far: float, heights: Sequence[float], pitch: float) -> list[float]:
    centres = []
    for h in heights:
        c = far + pitch / 2 + h / 2
        centres.append(c)
        far = c + h / 2
    return centres


def _place_tree(
    graph: SubstationGraph,
    tl: TreeLayout,
    left: float,
    base_y: float,
    direction: Direction,
    region_kv: float,
    config: LayoutConfig,
) -> tuple[dict[str, Placement], list[Polyline]]:
    pitch = config.grid_unit
    sgn = SIGN[direction]
    orient = ORIENTATION[direction]
    placed: dict[str, Placement] = {}
    for cid, (lx, lvl) in tl.pos.items():
        comp = graph.attributes[cid]
        placed[cid] = Placement(
            cid, left + lx, base_y + sgn * lvl * pitch, orient, region_kv, comp.kind, comp.kv or region_kv, comp.closed
        )
    lines: list[Polyline] = []
    for parent, child, lvl in tl.edges:
        pe, _ = port(placed[parent], "exit", config)
        ce, _ = port(placed[child], "entry", config)
        if pe[0] == ce[0]:
            pts: tuple[Point, ...] = (pe, ce)
        else:
            yj = base_y + sgn * (lvl + 0.5) * pitch
            pts = simplify([pe, (pe[0], yj), (ce[0], yj), ce])
        lines.append(Polyline(pts, (parent, child), placed[child].voltage_kv))
    return placed, lines


def place_branch(
    graph: SubstationGraph,
    branch: Branch,
    slot_x: float,
    bus_y: float,
    config: LayoutConfig,
    region_kv: float | None = None,
) -> tuple[list[Placement], list[Polyline]]:
    """Place ``branch`` with its head column centred at ``slot_x``.

    Members stack away from the bus one ``grid_unit`` per level; at each
    junction the largest sub-branch continues straight and the others take
    successive columns to the right, recursively.
    """
    tl = tree_layout(graph, branch.tree, config)
    direction = branch.direction or Direction.UP
    kv = region_kv if region_kv is not None else graph.attributes[branch.owner_bus].kv
    placed, lines = _place_tree(graph, tl, slot_x - tl.head_x, bus_y, direction, kv, config)
    head = placed[branch.head]
    entry, _ = port(head, "entry", config)
    lines.insert(0, Polyline(((head.x, bus_y), entry), (branch.owner_bus, branch.head), kv))
    return list(placed.values()), lines


def place_transformers(
    graph: SubstationGraph,
    branch: Branch,
    members: Mapping[str, Placement],
    transformer_ids: Sequence[str],
    bus_y: float,
    config: LayoutConfig,
) -> list[Placement]:
    """Stack the transformers fed by ``branch`` beyond its far end.

    Each transformer sits in the column of the member it connects to, so that
    member's branch dictates the transformer's x position.
    """
    if not transformer_ids:
        return []
    direction = branch.direction or Direction.UP
    sgn = SIGN[direction]
    far = max(abs(p.y - bus_y) + config.extent(p.kind, p.orientation)[1] / 2 for p in members.values())
    comps = [graph.attributes[t] for t in transformer_ids]
    centres = _transformer_stack(far, [config.extent(c.kind)[1] for c in comps], config.grid_unit)
    feeders = _transformer_feeders(branch)
    out = []
    for comp, c in zip(comps, centres):
        x = members[feeders[comp.id]].x
        out.append(
            Placement(comp.id, x, bus_y + sgn * c, ORIENTATION[direction], members[branch.head].region, comp.kind, comp.kv)
        )
    return out


def _transformer_feeders(branch: Branch) -> dict[str, str]:
    out: dict[str, str] = {}
    for node_cid, contact in branch.transformer_contacts():
        out.setdefault(contact.target, node_cid)
    return out


# -- directions and ordering --------------------------------------------------


def assign_branch_directions(
    branches: Sequence[Branch],
    graph: SubstationGraph,
    down_pairs: Iterable[frozenset[str]] = (),
) -> list[Branch]:
    """Set ``direction`` on every branch, in place.

    Rules in order: a branch with a generator hangs below its bus; a branch
    feeding a transformer keeps pointing up only if it is the lowest-voltage
    branch on that transformer; shared branches between the buses of a
    pair listed in ``down_pairs`` hang down; everything else points up.
    """
    down_pairs = set(down_pairs)
    kv_on: dict[str, list[float]] = {}
    for br in branches:
        kv = graph.attributes[br.owner_bus].kv
        for t in {c.target for _, c in br.transformer_contacts()}:
            kv_on.setdefault(t, []).append(kv)

    for br in branches:
        kv = graph.attributes[br.owner_bus].kv
        tfs = {c.target for _, c in br.transformer_contacts()}
        if any(graph.attributes[m].kind is ComponentKind.GENUNIT for m in br.members):
            br.direction = Direction.DOWN
        elif tfs:
            lowest = all(kv <= min(kv_on[t]) for t in tfs)
            br.direction = Direction.UP if lowest else Direction.DOWN
        elif br.other_bus is not None and frozenset((br.owner_bus, br.other_bus)) in down_pairs:
            br.direction = Direction.DOWN
        else:
            br.direction = Direction.UP
    return list(branches)


def sort_branches(
    bus: str,
    branches: Sequence[Branch],
    paired: str | None = None,
    paired_end: str = "right",
    transformer_x: Mapping[str, float] | None = None,
) -> list[Branch]:
    """Left-to-right order of the branches drawn by ``bus``: upward ones, then downward ones.

    Upward branches go by member count (ties by head id), with branches that
    also reach the ``paired`` bus moved to the end nearest it; those tied to an
    already placed transformer keep their slots but follow the transformers'
    x order. Downward branches follow their transformer's x, then member count.
    ``transformer_x`` maps a branch head to the x of its placed transformer.
    """
    transformer_x = transformer_x or {}
    up = [b for b in branches if b.direction is not Direction.DOWN]
    down = [b for b in branches if b.direction is Direction.DOWN]

    def up_key(b: Branch):
        tied = paired is not None and paired in b.buses
        first = tied if paired_end == "right" else not tied
        return (first, len(b.members), id_key(b.head))

    up.sort(key=up_key)
    slots = [i for i, b in enumerate(up) if b.head in transformer_x]
    ordered = sorted((up[i] for i in slots), key=lambda b: (transformer_x[b.head], id_key(b.head)))
    for i, b in zip(slots, ordered):
        up[i] = b
    down.sort(key=lambda b: (transformer_x.get(b.head, math.inf), len(b.members), id_key(b.head)))
    return up + down


def pack_slots(
    widths: Sequence[float],
    desired: Sequence[float | None],
    x1: float,
    x2: float,
    gap: float,
) -> list[float]:
    """Left edges for consecutive branches on a bus segment.

    Branches keep their order and at least ``gap`` around each; a branch with a
    desired left edge is moved toward it as far as the bus allows.
    """
    lefts: list[float] = []
    cursor = x1 + gap
    for w, want in zip(widths, desired):
        left = cursor if want is None else max(cursor, want)
        lefts.append(left)
        cursor = left + w + gap
    bound = x2 - gap
    for i in range(len(lefts) - 1, -1, -1):
        lefts[i] = min(lefts[i], bound - widths[i])
        bound = lefts[i] - gap
    return lefts


# -- whole-substation layout --------------------------------------------------


def _rows(region: VoltageRegion, scheme: BusScheme | None, bypass: str | None) -> list[list[str]]:
    buses = list(region.buses)
    if scheme is None or len(buses) > 2 or scheme is BusScheme.SINGLE_BUS:
        return [[b] for b in buses]
    if scheme is BusScheme.SECTIONALIZED:
        return [buses]
    if scheme is BusScheme.MAIN_AND_BYPASS and bypass is not None:
        return [[bypass], [b for b in buses if b != bypass]]
    return [[b] for b in buses]


@dataclass
class _Tie:
    left: str
    right: str
    branch: Branch
    path: list[str]


@dataclass
class _Plan:
    region: VoltageRegion
    rows: list[list[str]]
    owned: dict[str, list[Branch]]
    lengths: dict[str, float]
    ties: list[_Tie]

    def row_width(self, row: list[str], pitch: float) -> float:
        w = sum(self.lengths[b] for b in row)
        for tie in self.ties:
            if tie.left in row:
                w += (len(tie.path) + 1) * pitch
        return w


@dataclass
class _Tail:
    transformer: str | None
    node: str | None
    tree: TreeNode
    layout: TreeLayout
    region: float = 0.0


class _Builder:
    def __init__(self, graph: SubstationGraph, config: LayoutConfig):
        self.graph = graph
        self.config = config
        self.placed: dict[str, Placement] = {}
        self.lines: list[Polyline] = []
        self.buses: dict[str, BusSegment] = {}
        self.laid: list[LaidBranch] = []
        self.warnings: list[dict[str, str]] = []
        self.layouts: dict[frozenset[str], TreeLayout] = {}
        self.trees: list[tuple[TreeNode, TreeLayout]] = []

    # -- analysis --

    def analyse(self) -> None:
        g = self.graph
        regions = group_voltage_levels(g)
        by_bus = {b: find_branches(g, b) for r in regions for b in r.buses}
        rows: dict[float, list[list[str]]] = {}
        down_pairs: set[frozenset[str]] = set()
        classified: list[VoltageRegion] = []
        sect_pairs: list[tuple[str, str]] = []
        for r in regions:
            try:
                scheme, bypass = classify_scheme(g, r, by_bus)
                notes: tuple[str, ...] = ()
            except UnrecognizedScheme as exc:
                scheme, bypass = None, None
                notes = (f"UnrecognizedScheme: {exc}",)
                self.warnings.append(
                    {"code": "UnrecognizedScheme", "region": f"{r.level_kv:g}kV", "message": str(exc)}
                )
            rows[r.level_kv] = _rows(r, scheme, bypass)
            if scheme is BusScheme.BREAKER_AND_HALF and len(r.buses) == 2:
                down_pairs.add(frozenset(r.buses))
            if scheme is BusScheme.SECTIONALIZED and len(r.buses) == 2:
                sect_pairs.append((r.buses[0], r.buses[1]))
            classified.append(
                replace(r, scheme=scheme or BusScheme.SINGLE_BUS, bypass_bus=bypass, warnings=notes)
            )
        self.regions = classified
        self.rows = rows
        self.region_of = {b: r.level_kv for r in classified for b in r.buses}
        order = [b for r in classified for row in rows[r.level_kv] for b in row]
        self.order = order

        groups: dict[frozenset[str], list[Branch]] = {}
        for bus in order:
            for br in by_bus[bus]:
                groups.setdefault(br.key, []).append(br)
        branches: list[Branch] = []
        for cands in groups.values():
            owner = assign_branch_owner(cands[0], order)
            branches.append(next(c for c in cands if c.owner_bus == owner))

        ties: dict[float, list[_Tie]] = {}
        for left, right in sect_pairs:
            for br in branches:
                if br.owner_bus == left and br.buses == frozenset((left, right)):
                    paths = path_to(br.tree, right)
                    if len(paths) == 1 and len(paths[0]) == len(br.members):
                        ties.setdefault(self.region_of[left], []).append(_Tie(left, right, br, paths[0]))
        tie_keys = {t.branch.key for ts in ties.values() for t in ts}
        branches = [b for b in branches if b.key not in tie_keys]
        assign_branch_directions(branches, g, down_pairs)
        self.branches = branches
        self.ties = ties

        assigned = {m for b in branches for m in b.members} | {m for k in tie_keys for m in k}
        visited = set(assigned)
        stop = bus_nodes(g)
        tails: list[_Tail] = []
        for t in g.transformers:
            for node in t.nodes:
                if node in stop:
                    continue
                for cid in g.node_owner.get(node, ()):
                    kind = g.attributes[cid].kind
                    if cid in visited or kind is ComponentKind.BUS or kind.is_transformer:
                        continue
                    tree = grow_tree(g, cid, node, visited)
                    tails.append(_Tail(t.id, node, tree, tree_layout(g, tree, self.config)))
        for cid, comp in g.attributes.items():
            if cid in visited or comp.kind is ComponentKind.BUS or comp.kind.is_transformer:
                continue
            tree = grow_tree(g, cid, None, visited)
            tails.append(_Tail(None, None, tree, tree_layout(g, tree, self.config)))
            self.warnings.append({"code": "Unattached", "component": cid, "message": "not reachable from a bus or transformer"})
        self.tails = tails

        # transformers: which branch places each one
        contacts: dict[str, list[tuple[Branch, str]]] = {}
        for br in branches:
            for node_cid, c in br.transformer_contacts():
                contacts.setdefault(c.target, []).append((br, node_cid))
        self.t_contacts = contacts
        # regions each transformer touches, through a branch or straight onto a bus
        self.t_regions: dict[str, set[float]] = {}
        for t in g.transformers:
            kvs = {self.region_of[br.owner_bus] for br, _ in contacts.get(t.id, ())}
            kvs |= {self.region_of[c] for n in t.nodes for c in g.node_owner.get(n, ()) if c in self.region_of}
            self.t_regions[t.id] = kvs
        self.primary: dict[str, Branch] = {}
        for t, lst in contacts.items():
            best = min(lst, key=lambda bn: (-self.region_of[bn[0].owner_bus], order.index(bn[0].owner_bus)))
            self.primary[t] = best[0]
        self.t_on_branch: dict[frozenset[str], list[str]] = {}
        for t, br in sorted(self.primary.items(), key=lambda kv: id_key(kv[0])):
            self.t_on_branch.setdefault(br.key, []).append(t)

        for br in branches:
            self.layouts[br.key] = tree_layout(g, br.tree, self.config)

        self.plans: list[_Plan] = []
        for r in classified:
            owned = {b: [] for b in r.buses}
            for br in branches:
                if br.owner_bus in owned:
                    owned[br.owner_bus].append(br)
            lengths = {}
            for b in r.buses:
                # a shared branch counts for both of its buses, whichever one draws it
                touching = [x for x in branches if b in x.buses]
                up = [self.layouts[x.key].width for x in touching if x.direction is not Direction.DOWN]
                down = [self.layouts[x.key].width for x in touching if x.direction is Direction.DOWN]
                lengths[b] = compute_bus_length(up, down, self.config)
            self.plans.append(_Plan(r, rows[r.level_kv], owned, lengths, ties.get(r.level_kv, [])))

    def _extent(self, br: Branch) -> float:
        tl = self.layouts[br.key]
        far = _reach(self.graph, tl, self.config)
        heights = [self.config.extent(self.graph.attributes[t].kind)[1] for t in self.t_on_branch.get(br.key, ())]
        if heights:
            far = _transformer_stack(far, heights, self.config.grid_unit)[-1] + heights[-1] / 2
        return far

    # -- placement --

    def place(self) -> None:
        cfg = self.config
        m = cfg.region_margin
        wmax = max(max(w, h) for w, h in cfg.symbol_extent.values())
        grid = region_grid(len(self.plans))
        n_rows = max(r for r, _ in grid) + 1
        self.frames: dict[float, list[float]] = {}
        row_of_frame: dict[float, int] = {}
        top = 0.0
        for row in range(n_rows):
            plans = [p for p, (r, _) in zip(self.plans, grid) if r == row]
            widths = [max(p.row_width(rw, cfg.grid_unit) for rw in p.rows) for p in plans]
            cursor = -(sum(widths) + (len(plans) - 1) * (3 * m + wmax / 2)) / 2
            bottom = top
            for k, plan in enumerate(plans):
                oy = top + m
                for t, kvs in self.t_regions.items():
                    if t in self.placed and plan.region.level_kv in kvs:
                        tp = self.placed[t]
                        oy = max(oy, bbox(tp, cfg)[3] + 2 * m)
                snap = self._snapshot()
                self._place_region(plan, cursor, oy)
                # slide the region so branches fed by already placed transformers line up under them
                delta = self._alignment_shift(plan)
                if delta and (k == 0 or delta > 0):
                    self._restore(snap)
                    self._place_region(plan, cursor + delta, oy)
                frame = self._frame(plan.region.level_kv)
                self.frames[plan.region.level_kv] = frame
                row_of_frame[plan.region.level_kv] = row
                cursor = frame[0] + 2 * m + wmax / 2
                bottom = max(bottom, frame[2])
            top = bottom + m
        self.row_of_frame = row_of_frame

    def _snapshot(self):
        return (dict(self.placed), len(self.lines), dict(self.buses), len(self.laid), len(self.trees))

    def _restore(self, snap) -> None:
        placed, n_lines, buses, n_laid, n_trees = snap
        self.placed = placed
        self.buses = buses
        del self.lines[n_lines:], self.laid[n_laid:], self.trees[n_trees:]

    def _alignment_shift(self, plan: _Plan) -> float:
        deltas = []
        for b in plan.region.buses:
            for br in plan.owned[b]:
                for node_cid, c in br.transformer_contacts():
                    t = self.placed.get(c.target)
                    if t is not None and t.region != plan.region.level_kv and self.primary.get(c.target) is not br:
                        deltas.append(t.x - self.placed[node_cid].x)
        if not deltas:
            return 0.0
        return sorted(deltas)[(len(deltas) - 1) // 2]

    def _frame(self, kv: float) -> list[float]:
        cfg = self.config
        xs1, ys1, xs2, ys2 = [], [], [], []
        for p in self.placed.values():
            if p.region == kv:
                x1, y1, x2, y2 = bbox(p, cfg)
                xs1.append(x1), ys1.append(y1), xs2.append(x2), ys2.append(y2)
        for b in self.buses.values():
            if b.voltage_kv == kv and self.region_of.get(b.bus_id) == kv:
                xs1.append(b.x1), xs2.append(b.x2), ys1.append(b.y), ys2.append(b.y)
        m = cfg.region_margin
        return [max(xs2) + m, min(xs1) - m, max(ys2) + m, min(ys1) - m]

    def _place_region(self, plan: _Plan, ox: float, oy: float) -> None:
        cfg = self.config
        pitch = cfg.grid_unit
        kv = plan.region.level_kv
        y = oy
        last_bottom = oy
        for row in plan.rows:
            up_ext = max(
                [self._extent(br) for b in row for br in plan.owned[b] if br.direction is not Direction.DOWN] or [0.0]
            )
            down_ext = max(
                [self._extent(br) for b in row for br in plan.owned[b] if br.direction is Direction.DOWN] or [0.0]
            )
            bus_y = y + up_ext
            x = ox
            for b in row:
                seg = BusSegment(b, x, x + plan.lengths[b], bus_y, kv)
                self.buses[b] = seg
                x = seg.x2
                for tie in plan.ties:
                    if tie.left == b:
                        x += (len(tie.path) + 1) * pitch
            for b in row:
                self._place_bus_branches(plan, b, row)
            for tie in plan.ties:
                if tie.left in row:
                    self._place_tie(tie, kv)
            last_bottom = bus_y + down_ext
            y = last_bottom + pitch
        self._place_band(plan, ox, last_bottom)

    def _paired(self, plan: _Plan, bus: str, row: list[str]) -> tuple[str | None, str]:
        if len(row) == 2:
            other = row[1] if row[0] == bus else row[0]
            return other, ("right" if row[0] == bus else "left")
        if len(plan.region.buses) == 2:
            other = [b for b in plan.region.buses if b != bus][0]
            return other, "right"
        return None, "right"

    def _place_bus_branches(self, plan: _Plan, bus: str, row: list[str]) -> None:
        cfg = self.config
        seg = self.buses[bus]
        owned = plan.owned[bus]
        desired_x: dict[str, float] = {}
        anchor: dict[str, float] = {}
        for br in owned:
            tl = self.layouts[br.key]
            for node_cid, c in br.transformer_contacts():
                if c.target in self.placed and self.primary.get(c.target) is not br:
                    desired_x.setdefault(br.head, self.placed[c.target].x)
                    anchor.setdefault(br.head, tl.pos[node_cid][0])
        paired, end = self._paired(plan, bus, row)
        ordered = sort_branches(bus, owned, paired, end, desired_x)
        for direction in (Direction.UP, Direction.DOWN):
            side = [b for b in ordered if (b.direction is Direction.DOWN) == (direction is Direction.DOWN)]
            widths = [self.layouts[b.key].width for b in side]
            want = [
                desired_x[b.head] - anchor[b.head] if b.head in desired_x else None for b in side
            ]
            lefts = pack_slots(widths, want, seg.x1, seg.x2, cfg.branch_gap)
            for br, left in zip(side, lefts):
                self._place_one(br, left, seg, plan.region.level_kv)

    def _place_one(self, br: Branch, left: float, seg: BusSegment, kv: float) -> None:
        tl = self.layouts[br.key]
        slot_x = left + tl.head_x
        placements, lines = place_branch(self.graph, br, slot_x, seg.y, self.config, kv)
        members = {p.component_id: p for p in placements}
        self.placed.update(members)
        self.lines.extend(lines)
        buses = tuple(sorted(br.buses, key=id_key))
        self.laid.append(LaidBranch(br.owner_bus, br.head, br.members, br.direction.value, tl.width, slot_x, buses))
        self.trees.append((br.tree, tl))
        for t in place_transformers(self.graph, br, members, self.t_on_branch.get(br.key, ()), seg.y, self.config):
            self.placed[t.component_id] = t

    def _place_tie(self, tie: _Tie, kv: float) -> None:
        cfg = self.config
        left, right = self.buses[tie.left], self.buses[tie.right]
        prev: tuple[str, Point] = (tie.left, (left.x2, left.y))
        for k, cid in enumerate(tie.path, start=1):
            comp = self.graph.attributes[cid]
            p = Placement(cid, left.x2 + k * cfg.grid_unit, left.y, 90, kv, comp.kind, comp.kv or kv, comp.closed)
            self.placed[cid] = p
            entry, _ = port(p, "entry", cfg)
            self.lines.append(Polyline((prev[1], entry), (prev[0], cid), kv))
            prev = (cid, port(p, "exit", cfg)[0])
        self.lines.append(Polyline((prev[1], (right.x1, right.y)), (prev[0], tie.right), kv))
        self.trees.append((tie.branch.tree, None))

    def _tail_region(self, tail: _Tail) -> float:
        kvs = [self.region_of[br.owner_bus] for br, _ in self.t_contacts.get(tail.transformer, ())]
        if kvs:
            return min(kvs)
        if tail.transformer is not None:
            return self._lone_region(tail.transformer)
        return self.plans[-1].region.level_kv

    def _lone_region(self, t: str) -> float:
        levels = [p.region.level_kv for p in self.plans]
        for v in sorted(self.graph.attributes[t].voltage_kv, reverse=True):
            if v in levels:
                return v
        return levels[-1]

    def _place_band(self, plan: _Plan, ox: float, bottom: float) -> None:
        cfg = self.config
        g = self.graph
        kv = plan.region.level_kv
        gap = cfg.branch_gap
        items: list[tuple[tuple, object]] = []
        for t in g.transformers:
            if t.id not in self.primary and self._lone_region(t.id) == kv:
                items.append(((0, -math.inf, id_key(t.id)), t))
        for tail in self.tails:
            if self._tail_region(tail) == kv:
                pref = self.placed[tail.transformer].x if tail.transformer in self.placed else -math.inf
                rank = 1 if tail.transformer is not None else 2
                items.append(((rank, pref, id_key(tail.tree.cid)), tail))
        items.sort(key=lambda it: it[0])
        cursor = ox
        for (_, pref, _), item in items:
            if isinstance(item, Component):
                w, h = cfg.extent(item.kind)
                left = cursor
                p = Placement(item.id, left + w / 2, bottom + cfg.grid_unit / 2 + h / 2, 180, kv, item.kind, item.kv)
                self.placed[item.id] = p
                cursor = left + w + gap
            else:
                tl = item.layout
                left = cursor if pref == -math.inf else max(cursor, pref - tl.head_x)
                placed, lines = _place_tree(g, tl, left, bottom, Direction.DOWN, kv, cfg)
                self.placed.update(placed)
                self.lines.extend(lines)
                self.trees.append((item.tree, tl))
                cursor = left + tl.width + gap

    # -- connectors --

    def _role(self, node: TreeNode, cnode: str) -> str:
        entry = node.entry
        if entry is None:
            entry = terminals(self.graph.attributes[node.cid])[0]
        return "entry" if cnode == entry else "exit"

    def _winding_role(self, t: str, cnode: str) -> str:
        comp = self.graph.attributes[t]
        ranked = sorted(range(len(comp.nodes)), key=lambda i: (-comp.voltage_kv[i], i))
        idx = comp.nodes.index(cnode)
        return ROLES[ranked.index(idx)]

    def _to_bus(self, src: str, p0: Point, d0: Point, bus_id: str) -> None:
        seg = self.buses[bus_id]
        stub = self.config.grid_unit / 4
        if d0[0] == 0 and (seg.y - p0[1]) * d0[1] <= 0:
            # port faces away from the bus: step out, then down a lane beside the symbol
            w = self.config.extent(self.placed[src].kind, self.placed[src].orientation)[0]
            a = (p0[0], p0[1] + d0[1] * stub)
            x = min(max(p0[0] + w / 2 + stub, seg.x1), seg.x2)
            pts = simplify([p0, a, (x, a[1]), (x, seg.y)])
        else:
            x = min(max(p0[0], seg.x1), seg.x2)
            d1 = (0, -1) if p0[1] < seg.y else (0, 1)
            pts = route(p0, d0, (x, seg.y), d1, stub)
        self.lines.append(Polyline(pts, (src, bus_id), seg.voltage_kv))

    def _between(self, a: str, ra: str, b: str, rb: str, kv: float) -> None:
        pa, da = port(self.placed[a], ra, self.config)
        pb, db = port(self.placed[b], rb, self.config)
        pts = route(pa, da, pb, db, self.config.grid_unit / 4)
        self.lines.append(Polyline(pts, (a, b), kv))

    def connect(self) -> None:
        g = self.graph
        owner_of = {}
        for br in self.branches:
            owner_of[br.tree.cid] = br.owner_bus
        for tie in (t for ts in self.ties.values() for t in ts):
            owner_of[tie.branch.tree.cid] = tie.left
        ties_done = {cid for ts in self.ties.values() for t in ts for cid in t.path}

        for tree, _ in self.trees:
            owner = owner_of.get(tree.cid)
            for node in tree.walk():
                p = self.placed[node.cid]
                for c in node.contacts:
                    role = self._role(node, c.node)
                    if c.kind == "bus":
                        if node.cid in ties_done:
                            continue
                        if node is tree and c.target == owner:
                            continue
                        p0, d0 = port(p, role, self.config)
                        self._to_bus(node.cid, p0, d0, c.target)
                    else:
                        t = c.target
                        self._between(node.cid, role, t, self._winding_role(t, c.node), p.voltage_kv)
                for cnode, other in node.links:
                    other_node = self._find(other)
                    orole = self._role(other_node, cnode) if other_node else "exit"
                    self._between(node.cid, self._role(node, cnode), other, orole, p.voltage_kv)
                if node is tree and node.entry is not None:
                    # heads on a bus whose entry node also touches other buses
                    for bus in g.node_owner.get(node.entry, ()):
                        if g.attributes[bus].kind is ComponentKind.BUS and bus != owner and owner is not None:
                            p0, d0 = port(p, "entry", self.config)
                            self._to_bus(node.cid, p0, d0, bus)

        for tail in self.tails:
            if tail.transformer is None:
                continue
            root = self.placed[tail.tree.cid]
            self._between(
                tail.transformer, self._winding_role(tail.transformer, tail.node), root.component_id, "entry", root.voltage_kv
            )

        stop = bus_nodes(g)
        for t in g.transformers:
            for node in t.nodes:
                if node not in stop:
                    continue
                for bus in g.node_owner[node]:
                    if g.attributes[bus].kind is ComponentKind.BUS:
                        p0, d0 = port(self.placed[t.id], self._winding_role(t.id, node), self.config)
                        self._to_bus(t.id, p0, d0, bus)

    def _find(self, cid: str) -> TreeNode | None:
        for tree, _ in self.trees:
            for node in tree.walk():
                if node.cid == cid:
                    return node
        return None

    # -- result --

    def result(self, name: str) -> LayoutDiagram:
        frames = self.frames
        xs = [f[0] for f in frames.values()] + [f[1] for f in frames.values()]
        ys = [f[2] for f in frames.values()] + [f[3] for f in frames.values()]
        dx = -round((max(xs) + min(xs)) / 2)
        dy = -round((max(ys) + min(ys)) / 2)
        canvas = (max(xs) + dx, min(xs) + dx)

        rows: dict[int, list[float]] = {}
        for kv, row in self.row_of_frame.items():
            rows.setdefault(row, []).append(kv)
        regions = []
        for r in self.regions:
            f = frames[r.level_kv]
            maxx, minx = (canvas if len(rows[self.row_of_frame[r.level_kv]]) == 1 else (f[0] + dx, f[1] + dx))
            regions.append(replace(r, bbox=(maxx, minx, f[2] + dy, f[3] + dy)))

        placements = sorted(
            (replace(p, x=p.x + dx, y=p.y + dy) for p in self.placed.values()), key=lambda p: id_key(p.component_id)
        )
        lines = [replace(l, points=tuple((x + dx, y + dy) for x, y in l.points)) for l in self.lines]
        buses = [
            replace(b, x1=b.x1 + dx, x2=b.x2 + dx, y=b.y + dy)
            for b in sorted(self.buses.values(), key=lambda b: self.order.index(b.bus_id))
        ]
        laid = [replace(b, slot_x=b.slot_x + dx) for b in self.laid]
        return LayoutDiagram(
            placements=tuple(placements),
            buses=tuple(buses),
            polylines=tuple(lines),
            regions=tuple(regions),
            branches=tuple(laid),
            warnings=tuple(self.warnings),
            name=name,
        )


def layout_substation(graph: SubstationGraph, config: LayoutConfig | None = None, name: str = "") -> LayoutDiagram:
    """Compute the complete diagram for one substation.

    Raises :class:`~olnd.errors.TooManyLevels` or :class:`~olnd.errors.NoBuses`;
    an unrecognised bus scheme only adds a warning and falls back to one bus
    row per bus.
    """
    builder = _Builder(graph, config or LayoutConfig())
    builder.analyse()
    builder.place()
    builder.connect()
    return builder.result(name)

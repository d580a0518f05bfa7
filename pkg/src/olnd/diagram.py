"""Diagram data model, layout configuration and symbol geometry."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from types import MappingProxyType
from typing import Mapping, Sequence

from .graph import ComponentKind
from .topology import VoltageRegion

Point = tuple[float, float]

_DEFAULT_EXTENTS = MappingProxyType(
    {
        kind: ((40.0, 40.0) if kind.is_transformer else (20.0, 20.0))
        for kind in ComponentKind
        if kind is not ComponentKind.BUS
    }
)


@dataclass(frozen=True)
class LayoutConfig:
    """Layout constants in abstract grid units.

    ``grid_unit`` is the stacking pitch along a branch and the gap between
    sub-branch columns; ``branch_gap`` separates neighbouring branches on a bus.
    """

    grid_unit: float = 40.0
    branch_gap: float = 40.0
    min_bus_length: float = 80.0
    region_margin: float = 60.0
    symbol_extent: Mapping[ComponentKind, tuple[float, float]] = field(default=_DEFAULT_EXTENTS)

    def __post_init__(self) -> None:
        for name in ("grid_unit", "branch_gap", "min_bus_length", "region_margin"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        extents = dict(_DEFAULT_EXTENTS)
        extents.update(self.symbol_extent)
        for kind, (w, h) in extents.items():
            if not (w > 0 and h > 0):
                raise ValueError(f"symbol extent for {kind.value} must be strictly positive")
        object.__setattr__(self, "symbol_extent", MappingProxyType(extents))

    def __reduce__(self):
        # the read-only extent map cannot be pickled as is
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values["symbol_extent"] = dict(self.symbol_extent)
        return (_rebuild_config, (values,))

    def extent(self, kind: ComponentKind, orientation: int = 0) -> tuple[float, float]:
        w, h = self.symbol_extent[kind]
        return (h, w) if orientation in (90, 270) else (w, h)

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> "LayoutConfig":
        """Build from ``key=value`` overrides; ``symbol.<Kind>=WxH`` sets an extent."""
        scalars = {f.name for f in fields(cls)} - {"symbol_extent"}
        kwargs: dict = {}
        extents: dict[ComponentKind, tuple[float, float]] = {}
        for key, raw in values.items():
            if key in scalars:
                kwargs[key] = float(raw)
            elif key.startswith("symbol."):
                kind = ComponentKind(key.split(".", 1)[1])
                w, _, h = raw.lower().partition("x")
                extents[kind] = (float(w), float(h))
            else:
                raise ValueError(f"unknown config key {key!r}")
        if extents:
            kwargs["symbol_extent"] = extents
        return cls(**kwargs)


def _rebuild_config(values: dict) -> LayoutConfig:
    return LayoutConfig(**values)


def parse_config_text(text: str) -> LayoutConfig:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"config line {lineno}: expected key=value")
        values[key.strip()] = value.strip()
    return LayoutConfig.from_mapping(values)


@dataclass(frozen=True)
class Placement:
    component_id: str
    x: float
    y: float
    orientation: int
    region: float
    kind: ComponentKind
    voltage_kv: float
    closed: bool = True


@dataclass(frozen=True)
class BusSegment:
    bus_id: str
    x1: float
    x2: float
    y: float
    voltage_kv: float

    @property
    def length(self) -> float:
        return self.x2 - self.x1


@dataclass(frozen=True)
class Polyline:
    points: tuple[Point, ...]
    endpoints: tuple[str, str]
    voltage_kv: float


@dataclass(frozen=True)
class LaidBranch:
    owner_bus: str
    head: str
    members: tuple[str, ...]
    direction: str
    width: float
    slot_x: float
    buses: tuple[str, ...] = ()


@dataclass(frozen=True)
class LayoutDiagram:
    placements: tuple[Placement, ...] = ()
    buses: tuple[BusSegment, ...] = ()
    polylines: tuple[Polyline, ...] = ()
    regions: tuple[VoltageRegion, ...] = ()
    branches: tuple[LaidBranch, ...] = ()
    warnings: tuple[Mapping[str, str], ...] = ()
    name: str = ""

    def placement(self, cid: str) -> Placement:
        for p in self.placements:
            if p.component_id == cid:
                return p
        raise KeyError(cid)

    def bus(self, bus_id: str) -> BusSegment:
        for b in self.buses:
            if b.bus_id == bus_id:
                return b
        raise KeyError(bus_id)


def bbox(p: Placement, config: LayoutConfig) -> tuple[float, float, float, float]:
    """(x1, y1, x2, y2) of the rotated symbol box."""
    w, h = config.extent(p.kind, p.orientation)
    return (p.x - w / 2, p.y - h / 2, p.x + w / 2, p.y + h / 2)


# outward unit vectors of the entry/exit/side ports for each orientation
_PORT_DIRS = {
    0: {"entry": (0, 1), "exit": (0, -1), "side": (1, 0)},
    180: {"entry": (0, -1), "exit": (0, 1), "side": (1, 0)},
    90: {"entry": (-1, 0), "exit": (1, 0), "side": (0, 1)},
    270: {"entry": (1, 0), "exit": (-1, 0), "side": (0, 1)},
}


def port(p: Placement, role: str, config: LayoutConfig) -> tuple[Point, Point]:
    """Position and outward direction of port ``role`` (entry, exit or side)."""
    w, h = config.extent(p.kind, p.orientation)
    dx, dy = _PORT_DIRS[p.orientation][role]
    return (p.x + dx * w / 2, p.y + dy * h / 2), (dx, dy)


def all_ports(p: Placement, config: LayoutConfig) -> list[Point]:
    """Midpoints of the four sides of the symbol box."""
    x1, y1, x2, y2 = bbox(p, config)
    return [(p.x, y1), (p.x, y2), (x1, p.y), (x2, p.y)]


def simplify(points: Sequence[Point]) -> tuple[Point, ...]:
    out: list[Point] = []
    for pt in points:
        if out and out[-1] == pt:
            continue
        if len(out) >= 2:
            (ax, ay), (bx, by) = out[-2], out[-1]
            if (ax == bx == pt[0]) or (ay == by == pt[1]):
                out[-1] = pt
                continue
        out.append(pt)
    if len(out) == 1:
        out.append(out[0])
    return tuple(out)


def route(p0: Point, d0: Point, p1: Point, d1: Point, stub: float) -> tuple[Point, ...]:
    """Orthogonal path leaving ``p0`` along ``d0`` and entering ``p1`` against ``d1``."""
    a = (p0[0] + d0[0] * stub, p0[1] + d0[1] * stub)
    b = (p1[0] + d1[0] * stub, p1[1] + d1[1] * stub)
    if d0[0] == 0:
        ym = b[1] if d1[1] == 0 else (a[1] + b[1]) / 2
        mid = [(a[0], ym), (b[0], ym)]
    else:
        xm = b[0] if d1[0] == 0 else (a[0] + b[0]) / 2
        mid = [(xm, a[1]), (xm, b[1])]
    return simplify([p0, a, *mid, b, p1])


def translate(placements, polylines, dx: float, dy: float):
    moved_p = [replace(p, x=p.x + dx, y=p.y + dy) for p in placements]
    moved_l = [
        replace(l, points=tuple((x + dx, y + dy) for x, y in l.points)) for l in polylines
    ]
    return moved_p, moved_l

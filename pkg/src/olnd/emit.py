"""Serialisation of a laid-out diagram: the layout JSON document and SVG."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from xml.sax.saxutils import escape, quoteattr

from .diagram import LayoutConfig, LayoutDiagram, Placement, Polyline
from .graph import ComponentKind, id_key

VOLTAGE_COLORS = {
    500.0: "rgb(255,0,0)",
    330.0: "rgb(255,165,0)",
    220.0: "rgb(0,128,255)",
    110.0: "rgb(255,0,255)",
    35.0: "rgb(154,205,50)",
    10.0: "rgb(0,128,128)",
}
FALLBACK_COLOR = "rgb(128,128,128)"


def voltage_color(level_kv: float) -> str:
    return VOLTAGE_COLORS.get(float(level_kv), FALLBACK_COLOR)


def voltage_text(level_kv: float) -> str:
    return f"{float(level_kv):g}kV"


def image_path(kind: ComponentKind) -> str:
    return f"symbols/{kind.value.lower()}.json"


def _num(v: float) -> float:
    # one decimal minimum, no exponent, no negative zero
    v = round(float(v), 3)
    return 0.0 if v == 0 else v


def dumps(obj) -> str:
    """JSON text in the document's fixed style: two-space indent, ``", "`` separators."""
    return json.dumps(obj, indent=2, separators=(", ", ": "), ensure_ascii=False)


def node_entry(p: Placement) -> dict:
    a = {"state": bool(p.closed), "voltage": voltage_text(p.voltage_kv), "lineColor": voltage_color(p.voltage_kv)}
    if p.orientation:
        a["rotation"] = p.orientation
    return {
        "p": {
            "position": {"y": _num(p.y), "x": _num(p.x)},
            "tag": p.component_id,
            "image": image_path(p.kind),
        },
        "c": "Node",
        "a": a,
    }


def edge_entry(line: Polyline) -> dict:
    return {
        "p": {
            "points": [{"x": _num(x), "y": _num(y)} for x, y in line.points],
            "tag": f"{line.endpoints[0]}--{line.endpoints[1]}",
        },
        "c": "Edge",
        "a": {"lineColor": voltage_color(line.voltage_kv)},
    }


def _edge_key(line: Polyline):
    a, b = line.endpoints
    return (id_key(a), id_key(b), tuple(line.points))


def layout_document(diagram: LayoutDiagram) -> dict:
    elements: list[dict] = []
    for bus in diagram.buses:
        elements.append(
            {
                "p": {
                    "position": {"y": _num(bus.y), "x": _num((bus.x1 + bus.x2) / 2)},
                    "tag": bus.bus_id,
                    "image": "symbols/bus.json",
                },
                "c": "Node",
                "a": {
                    "state": True,
                    "voltage": voltage_text(bus.voltage_kv),
                    "lineColor": voltage_color(bus.voltage_kv),
                    "length": _num(bus.length),
                },
            }
        )
    for p in sorted(diagram.placements, key=lambda p: id_key(p.component_id)):
        elements.append(node_entry(p))
    for line in sorted(diagram.polylines, key=_edge_key):
        elements.append(edge_entry(line))
    return {"elements": elements}


def emit_layout_json(diagram: LayoutDiagram) -> bytes:
    """The layout document as UTF-8 bytes, newline terminated."""
    return (dumps(layout_document(diagram)) + "\n").encode("utf-8")


# -- SVG ------------------------------------------------------------------------


@lru_cache(maxsize=None)
def load_symbol(name: str) -> dict:
    text = resources.files("olnd").joinpath("symbols", f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def _path_elements(paths) -> list[str]:
    out = []
    for spec in paths:
        d, _, mode = spec.partition("|")
        fill = "currentColor" if mode == "fill" else "none"
        out.append(f'<path d="{d}" fill="{fill}" stroke="currentColor" stroke-width="1.5"/>')
    return out


def _symbol_defs() -> list[str]:
    defs = []
    for kind in ComponentKind:
        if kind is ComponentKind.BUS:
            continue
        sym = load_symbol(kind.value.lower())
        w, h = sym["width"], sym["height"]
        box = f'viewBox="{-w / 2:g} {-h / 2:g} {w:g} {h:g}"'
        if "closed" in sym:
            for state in ("closed", "open"):
                body = "".join(_path_elements(sym["paths"] + sym[state]))
                defs.append(f'<symbol id="{kind.value}-{state}" {box} overflow="visible">{body}</symbol>')
        else:
            body = "".join(_path_elements(sym["paths"]))
            defs.append(f'<symbol id="{kind.value}" {box} overflow="visible">{body}</symbol>')
    return defs


def _f(v: float) -> str:
    return f"{_num(v):g}"


def emit_svg(diagram: LayoutDiagram, config: LayoutConfig | None = None, scale: float = 1.0) -> bytes:
    """Standalone SVG 1.1 drawing: one element per bus, connector and symbol."""
    config = config or LayoutConfig()
    items: list[str] = []
    xs: list[float] = []
    ys: list[float] = []
    for bus in diagram.buses:
        color = voltage_color(bus.voltage_kv)
        items.append(
            f'<line id={quoteattr(bus.bus_id)} x1="{_f(bus.x1 * scale)}" y1="{_f(bus.y * scale)}" '
            f'x2="{_f(bus.x2 * scale)}" y2="{_f(bus.y * scale)}" stroke="{color}" stroke-width="{_f(4 * scale)}"/>'
        )
        xs += [bus.x1, bus.x2]
        ys += [bus.y]
    for line in sorted(diagram.polylines, key=_edge_key):
        pts = " ".join(f"{_f(x * scale)},{_f(y * scale)}" for x, y in line.points)
        tag = quoteattr(f"{line.endpoints[0]}--{line.endpoints[1]}")
        items.append(
            f'<polyline data-tag={tag} points="{pts}" fill="none" '
            f'stroke="{voltage_color(line.voltage_kv)}" stroke-width="{_f(1.5 * scale)}"/>'
        )
        xs += [x for x, _ in line.points]
        ys += [y for _, y in line.points]
    for p in sorted(diagram.placements, key=lambda p: id_key(p.component_id)):
        w, h = config.extent(p.kind)
        ref = p.kind.value
        if p.kind.is_switch:
            ref += "-closed" if p.closed else "-open"
        color = voltage_color(p.voltage_kv)
        transform = f' transform="rotate({p.orientation} {_f(p.x * scale)} {_f(p.y * scale)})"' if p.orientation else ""
        items.append(
            f'<use id={quoteattr(p.component_id)} xlink:href="#{ref}" x="{_f((p.x - w / 2) * scale)}" '
            f'y="{_f((p.y - h / 2) * scale)}" width="{_f(w * scale)}" height="{_f(h * scale)}" '
            f'color="{color}" stroke="{color}"{transform}/>'
        )
        ew, eh = config.extent(p.kind, p.orientation)
        xs += [p.x - ew / 2, p.x + ew / 2]
        ys += [p.y - eh / 2, p.y + eh / 2]

    pad = config.region_margin
    if xs:
        x0, y0 = (min(xs) - pad) * scale, (min(ys) - pad) * scale
        width, height = (max(xs) - min(xs) + 2 * pad) * scale, (max(ys) - min(ys) + 2 * pad) * scale
    else:
        x0 = y0 = 0.0
        width = height = 0.0
    title = f"<title>{escape(diagram.name)}</title>" if diagram.name else ""
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" version="1.1" '
        f'viewBox="{_f(x0)} {_f(y0)} {_f(width)} {_f(height)}" width="{_f(width)}" height="{_f(height)}">',
        title,
        "<defs>",
        *_symbol_defs(),
        "</defs>",
        '<g id="diagram">',
        *items,
        "</g>",
        "</svg>",
    ]
    return ("\n".join(l for l in lines if l) + "\n").encode("utf-8")

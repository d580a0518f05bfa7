"""Machine checks standing in for a human judging whether a diagram is decent.

A diagram passes when no two symbols overlap, every connector ends on a
symbol port or on a bus, and every symbol lies inside its voltage region.
Connector crossings are counted and reported but do not fail a diagram.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .diagram import LayoutConfig, LayoutDiagram, all_ports, bbox

# boxes closer than this on both axes count as overlapping
OVERLAP_GAP = 1.0
EPS = 1e-6


@dataclass
class DecencyReport:
    overlap_pairs: list[tuple[str, str]] = field(default_factory=list)
    dangling_endpoints: list[int] = field(default_factory=list)
    out_of_region: list[str] = field(default_factory=list)
    crossing_count: int = 0
    passed: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["overlap_pairs"] = [list(p) for p in self.overlap_pairs]
        return d


def find_overlaps(diagram: LayoutDiagram, config: LayoutConfig) -> list[tuple[str, str]]:
    ps = list(diagram.placements)
    if len(ps) < 2:
        return []
    boxes = np.array([bbox(p, config) for p in ps], dtype=float)
    x1, y1, x2, y2 = boxes.T
    # gap along each axis between every pair; negative means the boxes intersect
    gx = np.maximum(x1[:, None], x1[None, :]) - np.minimum(x2[:, None], x2[None, :])
    gy = np.maximum(y1[:, None], y1[None, :]) - np.minimum(y2[:, None], y2[None, :])
    hit = (gx < OVERLAP_GAP) & (gy < OVERLAP_GAP)
    i, j = np.nonzero(np.triu(hit, k=1))
    return [(ps[a].component_id, ps[b].component_id) for a, b in zip(i.tolist(), j.tolist())]


def _on_point(pt, candidates) -> bool:
    return any(abs(pt[0] - c[0]) <= EPS and abs(pt[1] - c[1]) <= EPS for c in candidates)


def find_dangling(diagram: LayoutDiagram, config: LayoutConfig) -> list[int]:
    ports = {p.component_id: all_ports(p, config) for p in diagram.placements}
    buses = {b.bus_id: b for b in diagram.buses}

    def attached(pt, cid: str) -> bool:
        if cid in buses:
            b = buses[cid]
            return abs(pt[1] - b.y) <= EPS and b.x1 - EPS <= pt[0] <= b.x2 + EPS
        return cid in ports and _on_point(pt, ports[cid])

    bad = []
    for k, line in enumerate(diagram.polylines):
        if len(line.points) < 2 or not _axis_aligned(line.points):
            bad.append(k)
            continue
        a, b = line.endpoints
        if not (attached(line.points[0], a) and attached(line.points[-1], b)):
            bad.append(k)
    return bad


def _axis_aligned(points) -> bool:
    return all(abs(p[0] - q[0]) <= EPS or abs(p[1] - q[1]) <= EPS for p, q in zip(points, points[1:]))


def find_out_of_region(diagram: LayoutDiagram, config: LayoutConfig) -> list[str]:
    frames = {r.level_kv: r.bbox for r in diagram.regions if r.bbox is not None}
    m = config.region_margin
    out = []
    for p in diagram.placements:
        f = frames.get(p.region)
        if f is None:
            out.append(p.component_id)
            continue
        maxx, minx, maxy, miny = f
        if not (minx - m <= p.x <= maxx + m and miny - m <= p.y <= maxy + m):
            out.append(p.component_id)
    return out


def _segments(diagram: LayoutDiagram) -> np.ndarray:
    segs = []
    for line in diagram.polylines:
        for (ax, ay), (bx, by) in zip(line.points, line.points[1:]):
            if (ax, ay) != (bx, by):
                segs.append((ax, ay, bx, by))
    for b in diagram.buses:
        segs.append((b.x1, b.y, b.x2, b.y))
    return np.array(segs, dtype=float).reshape(-1, 4)


def count_crossings(diagram: LayoutDiagram) -> int:
    """Transversal crossings between horizontal and vertical segments.

    Only proper crossings count: both segments pass strictly through the
    intersection point, so connectors meeting a bus or each other at an end
    are not crossings.
    """
    s = _segments(diagram)
    if len(s) == 0:
        return 0
    horiz = s[np.isclose(s[:, 1], s[:, 3])]
    vert = s[np.isclose(s[:, 0], s[:, 2]) & ~np.isclose(s[:, 1], s[:, 3])]
    if len(horiz) == 0 or len(vert) == 0:
        return 0
    hx1, hx2 = np.minimum(horiz[:, 0], horiz[:, 2]), np.maximum(horiz[:, 0], horiz[:, 2])
    hy = horiz[:, 1]
    vx = vert[:, 0]
    vy1, vy2 = np.minimum(vert[:, 1], vert[:, 3]), np.maximum(vert[:, 1], vert[:, 3])
    cross = (
        (hx1[:, None] + EPS < vx[None, :])
        & (vx[None, :] < hx2[:, None] - EPS)
        & (vy1[None, :] + EPS < hy[:, None])
        & (hy[:, None] < vy2[None, :] - EPS)
    )
    return int(cross.sum())


def validate(diagram: LayoutDiagram, config: LayoutConfig | None = None) -> DecencyReport:
    config = config or LayoutConfig()
    report = DecencyReport(
        overlap_pairs=find_overlaps(diagram, config),
        dangling_endpoints=find_dangling(diagram, config),
        out_of_region=find_out_of_region(diagram, config),
        crossing_count=count_crossings(diagram),
    )
    report.passed = not (report.overlap_pairs or report.dangling_endpoints or report.out_of_region)
    return report


@dataclass
class CorpusReport:
    total: int
    passed: int
    pass_rate: float | None
    defects: dict[str, int]
    failures: list[str]
    crossings: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass_rate"] = "n/a" if self.pass_rate is None else self.pass_rate
        return d


def corpus_report(reports: Iterable[tuple[str, DecencyReport]]) -> CorpusReport:
    """Aggregate ``(name, report)`` pairs; the pass rate is ``None`` for an empty corpus."""
    reports = list(reports)
    hist: Counter[str] = Counter()
    failures = []
    for name, r in reports:
        hist["overlap"] += len(r.overlap_pairs)
        hist["dangling"] += len(r.dangling_endpoints)
        hist["out_of_region"] += len(r.out_of_region)
        if not r.passed:
            failures.append(name)
    passed = sum(1 for _, r in reports if r.passed)
    total = len(reports)
    return CorpusReport(
        total=total,
        passed=passed,
        pass_rate=None if total == 0 else passed / total,
        defects={k: hist[k] for k in ("dangling", "out_of_region", "overlap")},
        failures=sorted(failures),
        crossings=sum(r.crossing_count for _, r in reports),
    )


def report_json(corpus: CorpusReport, reports: Mapping[str, DecencyReport | dict]) -> bytes:
    """``decency_report.json`` contents: the corpus summary plus one report per substation."""
    per = {name: (r.to_dict() if isinstance(r, DecencyReport) else r) for name, r in sorted(reports.items())}
    doc = {"summary": corpus.to_dict(), "substations": per}
    return (json.dumps(doc, indent=2, sort_keys=False) + "\n").encode("utf-8")

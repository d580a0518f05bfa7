"""Seeded generator of CIM/E substations, plus the hand-built fixtures.

Every substation it produces stays inside the envelope the layout engine
supports: 1 to 4 bus voltage levels, each level built from one of the five
recognised bus schemes, 2 to 20 branches per bus, optional two- and
three-winding transformers between levels and optional generator feeders.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

HEADERS = {
    "Substation": ("id", "name"),
    "Bus": ("id", "name", "volt", "node", "st"),
    "Breaker": ("id", "name", "volt", "node_i", "node_j", "point", "st"),
    "Disconnector": ("id", "name", "volt", "node_i", "node_j", "point", "st"),
    "ACLine": ("id", "name", "volt", "node_i", "node_j", "st"),
    "Load": ("id", "name", "volt", "node", "st"),
    "Transformer2W": ("id", "name", "volt_h", "volt_l", "node_h", "node_l", "st"),
    "Transformer3W": ("id", "name", "volt_h", "volt_m", "volt_l", "node_h", "node_m", "node_l", "st"),
    "Compensator": ("id", "name", "volt", "node", "st"),
    "GenUnit": ("id", "name", "volt", "node", "st"),
}

LEVELS = (500.0, 330.0, 220.0, 110.0, 35.0, 10.0)
SCHEMES = (
    "SingleBus",
    "DoubleBusSingleBreaker",
    "MainAndBypass",
    "BreakerAndHalfOrDBDB",
    "SingleBusWithSectionalizer",
)


def _fmt(value) -> str:
    if value is None:
        return "NULL"
    if isinstance(value, float):
        return f"{value:g}"
    text = str(value)
    return f"'{text}'" if (" " in text or not text) else text


@dataclass
class CimeWriter:
    """Accumulates records for one or more substations and renders CIM/E text."""

    rows: dict[str, list[tuple]] = field(default_factory=lambda: {k: [] for k in HEADERS})
    next_id: dict[str, int] = field(default_factory=dict)
    next_node: int = 1

    def node(self) -> str:
        n = self.next_node
        self.next_node += 1
        return str(n)

    def _id(self, kind: str, rid: int | None) -> int:
        if rid is None:
            rid = self.next_id.get(kind, 1)
        self.next_id[kind] = max(self.next_id.get(kind, 1), rid + 1)
        return rid

    def substation(self, name: str) -> None:
        self.rows["Substation"].append((self._id("Substation", None), name))

    def add(self, kind: str, st: str, volt, nodes, *, closed: bool = True, rid: int | None = None, name=None) -> str:
        rid = self._id(kind, rid)
        name = name or f"{kind[:3]}{rid}"
        nodes = list(nodes)
        if kind in ("Breaker", "Disconnector"):
            row = (rid, name, volt, nodes[0], nodes[1], 1 if closed else 0, st)
        elif kind == "ACLine":
            row = (rid, name, volt, nodes[0], nodes[1] if len(nodes) > 1 else None, st)
        elif kind == "Transformer2W":
            row = (rid, name, *volt, *nodes, st)
        elif kind == "Transformer3W":
            row = (rid, name, *volt, *nodes, st)
        else:
            row = (rid, name, volt, nodes[0], st)
        self.rows[kind].append(row)
        return f"{kind}#{rid}"

    def text(self) -> str:
        out: list[str] = []
        for kind, header in HEADERS.items():
            rows = self.rows[kind]
            if not rows:
                continue
            out.append(f"<{kind}>")
            out.append("@ " + " ".join(header))
            for row in rows:
                out.append("# " + " ".join(_fmt(v) for v in row))
            out.append(f"</{kind}>")
        return "\n".join(out) + "\n"


class _Station:
    """Helper that builds the topology of one substation into a writer."""

    def __init__(self, writer: CimeWriter, name: str, rng: random.Random | None = None):
        self.w = writer
        self.st = name
        self.rng = rng or random.Random(0)
        writer.substation(name)

    def bus(self, kv: float) -> str:
        n = self.w.node()
        self.w.add("Bus", self.st, kv, [n])
        return n

    def sw(self, kind: str, kv: float, a: str, b: str, closed: bool = True) -> None:
        self.w.add(kind, self.st, kv, [a, b], closed=closed)

    def chain(self, kv: float, start: str, pattern: str) -> str:
        """Lay switches ``pattern`` (letters D/B) from node ``start``; return the end node."""
        node = start
        for letter in pattern:
            nxt = self.w.node()
            self.sw("Disconnector" if letter == "D" else "Breaker", kv, node, nxt, closed=self.rng.random() > 0.1)
            node = nxt
        return node

    def terminal(self, kv: float, node: str, kind: str | None = None) -> None:
        kind = kind or self.rng.choice(("ACLine", "ACLine", "Load", "Compensator"))
        if kind == "ACLine":
            self.w.add("ACLine", self.st, kv, [node, self.w.node()])
        else:
            self.w.add(kind, self.st, kv, [node])

    def feeder(self, kv: float, bus_node: str, kind: str | None = None) -> str:
        """A private branch from ``bus_node``; returns its far node."""
        style = self.rng.randrange(4)
        if style == 0:
            end = self.chain(kv, bus_node, "DBD")
        elif style == 1:
            end = self.chain(kv, bus_node, "DB")
        elif style == 2:
            # junction: one leg to a line, one to a load or compensator
            j = self.chain(kv, bus_node, "D")
            leg = self.chain(kv, j, "D")
            self.terminal(kv, leg, self.rng.choice(("Load", "Compensator")))
            end = self.chain(kv, j, "BD")
        else:
            end = self.chain(kv, bus_node, "DBD")
            extra = self.chain(kv, end, "D")
            self.terminal(kv, extra, "Compensator")
        if kind != "open":
            self.terminal(kv, end, kind)
        return end

    def transformer_feeder(self, kv: float, bus_node: str) -> str:
        return self.chain(kv, bus_node, "DBD")


@dataclass
class Level:
    kv: float
    scheme: str
    buses: list[str]
    taps: list[str]  # bus nodes where transformer feeders may attach


def _build_level(s: _Station, kv: float, scheme: str, n: int, gens: int) -> Level:
    rng = s.rng
    if scheme == "SingleBus":
        b = s.bus(kv)
        for _ in range(n):
            s.feeder(kv, b)
        for _ in range(gens):
            s.terminal(kv, s.chain(kv, b, "DB"), "GenUnit")
        return Level(kv, scheme, [b], [b])

    a, b = s.bus(kv), s.bus(kv)
    if scheme == "DoubleBusSingleBreaker":
        for _ in range(max(n, 2)):
            x = s.w.node()
            s.sw("Disconnector", kv, a, x)
            s.sw("Disconnector", kv, b, x)
            s.terminal(kv, s.chain(kv, x, "BD"))
        # bus coupler D-B-D
        s.sw("Disconnector", kv, s.chain(kv, a, "DB"), b)
        for _ in range(gens):
            x = s.w.node()
            s.sw("Disconnector", kv, a, x)
            s.sw("Disconnector", kv, b, x)
            s.terminal(kv, s.chain(kv, x, "B"), "GenUnit")
        return Level(kv, scheme, [a, b], [a])
    if scheme == "MainAndBypass":
        main, bypass = a, b
        for _ in range(max(n, 2)):
            z = s.chain(kv, main, "DBD")
            s.terminal(kv, z)
            s.sw("Disconnector", kv, z, bypass)
        for _ in range(rng.randrange(0, 3)):
            s.feeder(kv, main)
        for _ in range(gens):
            s.terminal(kv, s.chain(kv, main, "DB"), "GenUnit")
        return Level(kv, scheme, [main, bypass], [main])
    if scheme == "BreakerAndHalfOrDBDB":
        for _ in range(max(n // 2, 2)):
            f1 = s.chain(kv, a, "DBD")
            f2 = s.chain(kv, f1, "DBD")
            end = s.chain(kv, f2, "DB")
            s.sw("Disconnector", kv, end, b)
            s.terminal(kv, s.chain(kv, f1, "D"), "ACLine")
            s.terminal(kv, s.chain(kv, f2, "D"), "ACLine")
        for _ in range(gens):
            s.terminal(kv, s.chain(kv, b, "DB"), "GenUnit")
        return Level(kv, scheme, [a, b], [a, b])
    if scheme == "SingleBusWithSectionalizer":
        for bus in (a, b):
            for _ in range(max(n // 2, 1)):
                s.feeder(kv, bus)
        end = s.chain(kv, a, "DB")
        s.sw("Disconnector", kv, end, b)
        for _ in range(gens):
            s.terminal(kv, s.chain(kv, b, "DB"), "GenUnit")
        return Level(kv, scheme, [a, b], [a, b])
    raise ValueError(f"unknown scheme {scheme!r}")


def random_substation(writer: CimeWriter, name: str, rng: random.Random) -> dict:
    """Append one random substation to ``writer``; returns its description."""
    s = _Station(writer, name, rng)
    n_levels = rng.randint(1, 4)
    kvs = sorted(rng.sample(LEVELS, n_levels), reverse=True)
    levels = []
    for i, kv in enumerate(kvs):
        scheme = rng.choice(SCHEMES)
        gens = 1 if (i == n_levels - 1 and rng.random() < 0.4) else 0
        levels.append(_build_level(s, kv, scheme, rng.randint(2, 8), gens))

    transformers = 0
    for upper, lower in zip(levels, levels[1:]):
        for _ in range(rng.randint(1, 2)):
            hi = s.transformer_feeder(upper.kv, rng.choice(upper.taps))
            lo = s.transformer_feeder(lower.kv, rng.choice(lower.taps))
            if rng.random() < 0.5:
                writer.add("Transformer2W", name, (upper.kv, lower.kv), [hi, lo])
            else:
                tert_kv = 10.0 if lower.kv > 10.0 else 6.0
                tn = s.w.node()
                writer.add("Transformer3W", name, (upper.kv, lower.kv, tert_kv), [hi, lo, tn])
                s.terminal(tert_kv, s.chain(tert_kv, tn, "D"), "Compensator")
            transformers += 1
    return {"name": name, "levels": [(lv.kv, lv.scheme) for lv in levels], "transformers": transformers}


def generate_corpus(count: int = 200, seed: int = 2024) -> tuple[str, list[dict]]:
    """CIM/E text holding ``count`` random substations named ``S000``, ``S001``, ..."""
    rng = random.Random(seed)
    writer = CimeWriter()
    info = [random_substation(writer, f"S{i:03d}", rng) for i in range(count)]
    return writer.text(), info


# -- hand-built fixtures --------------------------------------------------------


def _fixture(build) -> str:
    writer = CimeWriter()
    build(_Station(writer, "F", random.Random(7)))
    return writer.text()


def fixture_single_bus() -> str:
    def build(s: _Station) -> None:
        b = s.bus(110.0)
        s.terminal(110.0, s.chain(110.0, b, "DBD"), "ACLine")
        s.terminal(110.0, s.chain(110.0, b, "DB"), "Load")

    return _fixture(build)


def fixture_dbsb() -> str:
    """Two buses tied by several {D, D} feeders and a D-B-D coupler."""

    def build(s: _Station) -> None:
        _build_level(s, 220.0, "DoubleBusSingleBreaker", 3, 0)

    return _fixture(build)


def fixture_main_and_bypass() -> str:
    def build(s: _Station) -> None:
        _build_level(s, 110.0, "MainAndBypass", 3, 0)

    return _fixture(build)


def fixture_breaker_and_half() -> str:
    def build(s: _Station) -> None:
        _build_level(s, 500.0, "BreakerAndHalfOrDBDB", 4, 0)

    return _fixture(build)


def fixture_sectionalizer() -> str:
    def build(s: _Station) -> None:
        _build_level(s, 35.0, "SingleBusWithSectionalizer", 4, 0)

    return _fixture(build)


SCHEME_FIXTURES = {
    "DoubleBusSingleBreaker": fixture_dbsb,
    "MainAndBypass": fixture_main_and_bypass,
    "BreakerAndHalfOrDBDB": fixture_breaker_and_half,
    "SingleBusWithSectionalizer": fixture_sectionalizer,
    "SingleBus": fixture_single_bus,
}


def fixture_golden_disconnector() -> str:
    """A lone closed 500 kV disconnector with id 282."""
    return (
        "<Disconnector>\n@ id name volt node_i node_j point st\n"
        "# 282 D282 500 1 2 1 F\n</Disconnector>\n"
    )


def _five_levels(s: _Station) -> None:
    for kv in (500.0, 220.0, 110.0, 35.0, 10.0):
        b = s.bus(kv)
        s.feeder(kv, b, "Load")
        s.feeder(kv, b, "ACLine")


def fixture_five_levels() -> str:
    return _fixture(_five_levels)


def corpus_with_five_level(count: int, bad_name: str, seed: int = 2024) -> str:
    """Random substations ``S000``... plus one five-level substation called ``bad_name``."""
    rng = random.Random(seed)
    writer = CimeWriter()
    for i in range(count):
        random_substation(writer, f"S{i:03d}", rng)
    _five_levels(_Station(writer, bad_name, rng))
    return writer.text()


def fixture_three_level() -> str:
    """500 kV breaker-and-a-half and 220 kV double bus joined by two 500/220/35 kV
    three-winding transformers whose 35 kV windings feed bus-less compensator branches.
    """

    def build(s: _Station) -> None:
        hv = _build_level(s, 500.0, "BreakerAndHalfOrDBDB", 4, 0)
        mv = _build_level(s, 220.0, "DoubleBusSingleBreaker", 4, 0)
        for _ in range(2):
            hi = s.transformer_feeder(500.0, hv.buses[1])
            lo = s.transformer_feeder(220.0, mv.buses[0])
            tn = s.w.node()
            s.w.add("Transformer3W", s.st, (500.0, 220.0, 35.0), [hi, lo, tn])
            s.terminal(35.0, s.chain(35.0, tn, "BD"), "Compensator")

    return _fixture(build)


def fixture_two_transformers() -> str:
    """220 kV bus and 35 kV bus joined by two 2W transformers."""

    def build(s: _Station) -> None:
        hv = s.bus(220.0)
        lv = s.bus(35.0)
        for kv, b in ((220.0, hv), (35.0, lv)):
            s.feeder(kv, b, "ACLine")
        for _ in range(2):
            hi = s.transformer_feeder(220.0, hv)
            lo = s.transformer_feeder(35.0, lv)
            s.w.add("Transformer2W", s.st, (220.0, 35.0), [hi, lo])

    return _fixture(build)

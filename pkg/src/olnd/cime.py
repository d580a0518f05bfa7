"""Reader for the block-structured CIM/E subset used as layout input.

A file is a sequence of entity blocks::

    <Breaker>
    @ id name volt node_i node_j point st
    # 1 'CB 1' 220 11 12 1 SubA
    </Breaker>

Values are whitespace separated; a value containing spaces is wrapped in
single quotes. ``NULL`` marks a missing value and ``//`` starts a comment line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .errors import (
    CimeError,
    DuplicateId,
    HeaderMismatch,
    UnknownEntity,
    UnterminatedBlock,
)

ENTITY_KINDS = (
    "Substation",
    "Bus",
    "Breaker",
    "Disconnector",
    "ACLine",
    "Load",
    "Transformer2W",
    "Transformer3W",
    "Compensator",
    "GenUnit",
)

# allowed number of (non-NULL) connectivity nodes per entity kind
NODE_COUNTS: Mapping[str, frozenset[int]] = MappingProxyType(
    {
        "Substation": frozenset({0}),
        "Bus": frozenset({1}),
        "Breaker": frozenset({2}),
        "Disconnector": frozenset({2}),
        "ACLine": frozenset({1, 2}),
        "Load": frozenset({1}),
        "Transformer2W": frozenset({2}),
        "Transformer3W": frozenset({3}),
        "Compensator": frozenset({1}),
        "GenUnit": frozenset({1}),
    }
)

SWITCH_KINDS = frozenset({"Breaker", "Disconnector"})

NULL = "NULL"

_TOKEN = re.compile(r"'([^']*)'|(\S+)")
_OPEN = re.compile(r"^<\s*([A-Za-z0-9_]+)\s*>$")
_CLOSE = re.compile(r"^</\s*([A-Za-z0-9_]+)\s*>$")


class DuplicateBlock(CimeError):
    code = "DuplicateBlock"


@dataclass(frozen=True)
class Record:
    kind: str
    id: int
    name: str
    st: str
    volt: float | None = None
    volts: tuple[float, ...] = ()
    nodes: tuple[str, ...] = ()
    point: int | None = None
    fields: Mapping[str, str | None] = field(default_factory=dict, compare=False, repr=False)
    line: int = field(default=0, compare=False)

    @property
    def closed(self) -> bool | None:
        """Switch status, ``None`` for anything that is not a switch."""
        if self.kind not in SWITCH_KINDS or self.point is None:
            return None
        return self.point == 1

    @property
    def voltages(self) -> tuple[float, ...]:
        """One voltage per winding for transformers, otherwise ``(volt,)``."""
        if self.volts:
            return self.volts
        return () if self.volt is None else (self.volt,)


@dataclass(frozen=True)
class EntityTable:
    entity_kind: str
    header_fields: tuple[str, ...]
    records: tuple[Record, ...]


@dataclass(frozen=True)
class ModelStore:
    tables: Mapping[str, EntityTable]
    records: tuple[Record, ...]

    @property
    def substations(self) -> dict[str, list[Record]]:
        out: dict[str, list[Record]] = {}
        for rec in self.records:
            out.setdefault(rec.st, []).append(rec)
        return out

    def __len__(self) -> int:
        return len(self.records)


def tokenize(line: str, lineno: int = 0) -> list[str | None]:
    values: list[str | None] = []
    pos = 0
    for m in _TOKEN.finditer(line):
        gap = line[pos:m.start()]
        if gap.strip():
            raise CimeError(f"unbalanced quote near {gap.strip()!r}", lineno)
        pos = m.end()
        quoted, bare = m.groups()
        if bare is not None:
            if "'" in bare:
                raise CimeError(f"quote inside value {bare!r}", lineno)
            values.append(None if bare == NULL else bare)
        else:
            values.append(quoted)
    if line[pos:].strip():
        raise CimeError(f"unbalanced quote near {line[pos:].strip()!r}", lineno)
    return values


def _float(value: str | None, name: str, lineno: int) -> float | None:
    if value is None:
        return None
    try:
        return float(value)
    except ValueError:
        raise HeaderMismatch(f"field {name!r} is not numeric: {value!r}", lineno) from None


def _make_record(kind: str, header: tuple[str, ...], values: list[str | None], lineno: int) -> Record:
    row = dict(zip(header, values))
    raw_id = row.get("id")
    if raw_id is None:
        raise HeaderMismatch("record has no id", lineno)
    try:
        rid = int(raw_id)
    except ValueError:
        raise HeaderMismatch(f"id is not an integer: {raw_id!r}", lineno) from None

    name = row.get("name") or str(rid)
    st = row.get("st")
    if kind == "Substation":
        st = st or name
    if not st:
        raise HeaderMismatch(f"{kind} {rid} has no owning substation (st)", lineno)

    nodes = tuple(row[f] for f in header if f.startswith("node") and row[f] is not None)
    if len(nodes) not in NODE_COUNTS[kind]:
        allowed = "/".join(str(n) for n in sorted(NODE_COUNTS[kind]))
        raise HeaderMismatch(f"{kind} {rid} has {len(nodes)} nodes, expected {allowed}", lineno)

    volts = tuple(
        v for v in (_float(row[f], f, lineno) for f in header if f.startswith("volt_")) if v is not None
    )
    point = row.get("point")
    if point is not None:
        if point not in ("0", "1"):
            raise HeaderMismatch(f"point must be 0 or 1, got {point!r}", lineno)
        point_val: int | None = int(point)
    else:
        point_val = None
    return Record(
        kind=kind,
        id=rid,
        name=name,
        st=st,
        volt=_float(row.get("volt"), "volt", lineno),
        volts=volts,
        nodes=nodes,
        point=point_val,
        fields=row,
        line=lineno,
    )


def parse_cime(text: bytes | str) -> ModelStore:
    """Parse CIM/E text into a :class:`ModelStore`.

    Raises a :class:`~olnd.errors.CimeError` subclass naming the offending line.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if text.startswith("﻿"):
        text = text[1:]

    tables: dict[str, EntityTable] = {}
    records: list[Record] = []
    kind: str | None = None
    header: tuple[str, ...] | None = None
    block: list[Record] = []
    seen_ids: set[int] = set()
    opened_at = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        if kind is None:
            m = _OPEN.match(line)
            if not m:
                raise CimeError(f"expected a block opening tag, got {line[:40]!r}", lineno)
            kind = m.group(1)
            if kind not in ENTITY_KINDS:
                raise UnknownEntity(f"unknown entity block <{kind}>", lineno)
            if kind in tables:
                raise DuplicateBlock(f"block <{kind}> appears twice", lineno)
            header, block, seen_ids, opened_at = None, [], set(), lineno
            continue

        m = _CLOSE.match(line)
        if m:
            if m.group(1) != kind:
                raise UnterminatedBlock(f"<{kind}> closed by </{m.group(1)}>", lineno)
            tables[kind] = EntityTable(kind, header or (), tuple(block))
            records.extend(block)
            kind = None
            continue
        if _OPEN.match(line):
            raise UnterminatedBlock(f"<{kind}> opened at line {opened_at} is not closed", lineno)

        if line.startswith("@"):
            if header is not None:
                raise HeaderMismatch(f"second header line in <{kind}>", lineno)
            fields = tokenize(line[1:], lineno)
            if None in fields or "id" not in fields:
                raise HeaderMismatch("header must name an id field and no NULL", lineno)
            header = tuple(f for f in fields if f is not None)
            if len(set(header)) != len(header):
                raise HeaderMismatch("duplicate header field", lineno)
        elif line.startswith("#"):
            if header is None:
                raise HeaderMismatch(f"record before header in <{kind}>", lineno)
            values = tokenize(line[1:], lineno)
            if len(values) != len(header):
                raise HeaderMismatch(
                    f"record has {len(values)} values but header has {len(header)}", lineno
                )
            rec = _make_record(kind, header, values, lineno)
            if rec.id in seen_ids:
                raise DuplicateId(f"duplicate {kind} id {rec.id}", lineno)
            seen_ids.add(rec.id)
            block.append(rec)
        else:
            raise CimeError(f"unexpected line {line[:40]!r}", lineno)

    if kind is not None:
        raise UnterminatedBlock(f"<{kind}> opened at line {opened_at} is not closed", opened_at)
    return ModelStore(MappingProxyType(tables), tuple(records))


def query_substation(store: ModelStore, name: str) -> list[Record]:
    """All records whose ``st`` is ``name``, in file order; empty if unknown."""
    return [rec for rec in store.records if rec.st == name]


def list_substations(store: ModelStore) -> list[str]:
    return sorted({rec.st for rec in store.records})


def node_universe(records: list[Record]) -> set[str]:
    return {node for rec in records for node in rec.nodes}

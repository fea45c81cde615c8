"""Workspace files: a universe, an initial state, a thread, and optional
oracle replies and fuel, in INI-like sections."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .dla import (
    DataLinkage,
    FieldLink,
    LinkageError,
    PartialFieldLink,
    SpotLink,
    Universe,
    ValueAssoc,
    check_link,
    parse_link,
)
from .dld import action_for, reachable_atoms
from .threads import DLD, External, Post, ThreadError, ThreadSpec, build, parse_thread_lines

SECTIONS = ("universe", "state", "thread", "oracle", "fuel")
DEFAULT_FUEL = 10_000


class WorkspaceError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


@dataclass
class Workspace:
    universe: Universe
    initial: DataLinkage
    thread: ThreadSpec
    oracle: list[bool] = field(default_factory=list)
    fuel: int = DEFAULT_FUEL

    def graph(self):
        return build(self.thread)


_SECTION = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")


def _split_sections(text: str) -> dict[str, list[tuple[int, str]]]:
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        m = _SECTION.match(stripped)
        if m:
            name = m.group(1).lower()
            if name not in SECTIONS:
                raise WorkspaceError(f"unknown section [{name}]", lineno)
            if name in sections:
                raise WorkspaceError(f"section [{name}] appears twice", lineno)
            sections[name] = []
            current = name
            continue
        if not stripped:
            continue
        if current is None:
            raise WorkspaceError("content before the first section", lineno)
        sections[current].append((lineno, raw))
    return sections


def _parse_universe(lines) -> Universe:
    found: dict[str, tuple[str, ...]] = {}
    for lineno, raw in lines:
        text = raw.split("#", 1)[0].strip()
        key, eq, rest = text.partition("=")
        key = key.strip().lower()
        if not eq or key not in ("spots", "fields", "atoms", "values"):
            raise WorkspaceError(f"expected 'spots|fields|atoms|values = ...', got {text!r}", lineno)
        if key in found:
            raise WorkspaceError(f"{key} declared twice", lineno)
        names = tuple(n for n in re.split(r"[\s,]+", rest.strip()) if n)
        for n in names:
            if not re.fullmatch(r"[A-Za-z_][\w']*", n) or n in ("fresh", "clr", "undef", "fgc", "empty"):
                raise WorkspaceError(f"bad name {n!r} in {key}", lineno)
        found[key] = names
    for key in ("spots", "fields", "atoms"):
        if key not in found:
            raise WorkspaceError(f"[universe] lacks '{key} = ...'")
    # values are never touched by the in-scope actions; default to one
    values = found.get("values") or ("nil",)
    try:
        return Universe(found["spots"], found["fields"], found["atoms"], values)
    except LinkageError as exc:
        raise WorkspaceError(str(exc)) from None


def _parse_state(lines, universe: Universe) -> DataLinkage:
    links = set()
    for lineno, raw in lines:
        text = raw.split("#", 1)[0].strip()
        if text == "empty":
            continue
        try:
            link = parse_link(text)
            check_link(link, universe)
        except LinkageError as exc:
            raise WorkspaceError(str(exc), lineno) from None
        links.add(link)
    return DataLinkage(frozenset(links), universe)


def _parse_oracle(lines) -> list[bool]:
    out = []
    for lineno, raw in lines:
        for tok in re.split(r"[\s,]+", raw.split("#", 1)[0].strip()):
            if not tok:
                continue
            if tok.lower() in ("true", "t", "1"):
                out.append(True)
            elif tok.lower() in ("false", "f", "0"):
                out.append(False)
            else:
                raise WorkspaceError(f"oracle reply must be true/false, got {tok!r}", lineno)
    return out


def _parse_fuel(lines) -> int:
    if len(lines) != 1:
        raise WorkspaceError("[fuel] takes exactly one number", lines[0][0] if lines else None)
    lineno, raw = lines[0]
    text = raw.split("#", 1)[0].strip()
    if not text.isdigit() or int(text) <= 0:
        raise WorkspaceError(f"fuel must be a positive integer, got {text!r}", lineno)
    return int(text)


def _check_thread(spec: ThreadSpec, universe: Universe, lines) -> None:
    g = build(spec)
    by_name = {}
    for lineno, raw in lines:
        m = re.match(r"\s*([A-Za-z_][\w']*)\s*:=", raw)
        if m:
            by_name[m.group(1)] = lineno
    for n, node in g.nodes.items():
        if isinstance(node, Post) and isinstance(node.action, External) and node.action.focus == DLD:
            if action_for(node.action.method, universe) is None:
                line = by_name.get(g.names.get(n))
                raise WorkspaceError(f"dld({node.action.method}) is not a basic action over the universe", line)


def parse_workspace(text: str) -> Workspace:
    sections = _split_sections(text)
    if "universe" not in sections:
        raise WorkspaceError("missing [universe] section")
    if "thread" not in sections:
        raise WorkspaceError("missing [thread] section")
    universe = _parse_universe(sections["universe"])
    initial = _parse_state(sections.get("state", []), universe)
    try:
        spec = parse_thread_lines(sections["thread"])
        _check_thread(spec, universe, sections["thread"])
    except ThreadError as exc:
        raise WorkspaceError(str(exc)) from None
    oracle = _parse_oracle(sections.get("oracle", []))
    fuel = _parse_fuel(sections["fuel"]) if "fuel" in sections else DEFAULT_FUEL
    return Workspace(universe, initial, spec, oracle, fuel)


def load_workspace(path: str | Path) -> Workspace:
    return parse_workspace(Path(path).read_text(encoding="utf-8"))


# -- garbage metrics ---------------------------------------------------------

@dataclass(frozen=True)
class GarbageRow:
    links: int
    occurring: int
    reachable: int

    @property
    def reclaimable(self) -> int:
        return self.occurring - self.reachable


def garbage_row(state: DataLinkage) -> GarbageRow:
    occurring = state.occurring_atoms()
    reachable = reachable_atoms(state) & occurring
    return GarbageRow(len(state.links), len(occurring), len(reachable))


def garbage_report(states) -> list[GarbageRow]:
    return [garbage_row(s) for s in states if isinstance(s, DataLinkage)]


def format_garbage(rows: list[GarbageRow]) -> str:
    out = ["step links occurring reachable reclaimable"]
    for i, r in enumerate(rows):
        out.append(f"{i} {r.links} {r.occurring} {r.reachable} {r.reclaimable}")
    return "\n".join(out)


# -- DOT ---------------------------------------------------------------------

def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(state: DataLinkage) -> str:
    """Graphviz text for a state: atoms are circles, spots are boxes, partial
    field links end in a point node, value associations annotate atoms."""
    links = state.sorted_links()
    atoms = [a for a in state.universe.all_atoms if a in state.occurring_atoms()]
    values: dict[str, list[str]] = {}
    for l in links:
        if isinstance(l, ValueAssoc):
            values.setdefault(l.atom, []).append(l.value)
    lines = ["digraph linkage {", "  rankdir=LR;"]
    for a in atoms:
        label = a if a not in values else a + "\\n" + ",".join(values[a])
        lines.append(f"  {_q('atom:' + a)} [shape=circle, label={_q(label)}];")
    spots = []
    for l in links:
        if isinstance(l, SpotLink) and l.spot not in spots:
            spots.append(l.spot)
    for s in spots:
        lines.append(f"  {_q('spot:' + s)} [shape=box, label={_q(s)}];")
    for l in links:
        if isinstance(l, SpotLink):
            lines.append(f"  {_q('spot:' + l.spot)} -> {_q('atom:' + l.atom)};")
        elif isinstance(l, FieldLink):
            lines.append(f"  {_q('atom:' + l.atom)} -> {_q('atom:' + l.target)} [label={_q(l.field)}];")
        elif isinstance(l, PartialFieldLink):
            half = f"half:{l.atom}.{l.field}"
            lines.append(f"  {_q(half)} [shape=point];")
            lines.append(f"  {_q('atom:' + l.atom)} -> {_q(half)} [label={_q(l.field)}, arrowhead=none];")
    lines.append("}")
    return "\n".join(lines) + "\n"

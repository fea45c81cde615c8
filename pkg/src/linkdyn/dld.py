"""Basic actions on data linkages: effect and reply of each structural
action, fresh-object allocation, and full garbage collection."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .dla import (
    PSO,
    SSO,
    DataLinkage,
    FieldKey,
    FieldLink,
    LinkageError,
    PartialFieldLink,
    SpotKey,
    SpotLink,
    Status,
    Universe,
)


class ActionError(LinkageError):
    pass


class DldAction:
    """Base of all basic actions. Subclasses are frozen dataclasses."""

    mimic_only = False

    def spots(self) -> tuple[str, ...]:
        return tuple(getattr(self, n) for n in ("s", "t") if hasattr(self, n))

    def fields(self) -> tuple[str, ...]:
        return (self.f,) if hasattr(self, "f") else ()


@dataclass(frozen=True, slots=True)
class GetFresh(DldAction):
    s: str

    def __str__(self):
        return f"{self.s} = fresh"


@dataclass(frozen=True, slots=True)
class SetSpot(DldAction):
    s: str
    t: str

    def __str__(self):
        return f"{self.s} = {self.t}"


@dataclass(frozen=True, slots=True)
class ClrSpot(DldAction):
    s: str

    def __str__(self):
        return f"clr {self.s}"


@dataclass(frozen=True, slots=True)
class EqualTst(DldAction):
    s: str
    t: str

    def __str__(self):
        return f"{self.s} == {self.t}"


@dataclass(frozen=True, slots=True)
class UndefTst(DldAction):
    s: str

    def __str__(self):
        return f"undef {self.s}"


@dataclass(frozen=True, slots=True)
class AddField(DldAction):
    s: str
    f: str

    def __str__(self):
        return f"{self.s} +. {self.f}"


@dataclass(frozen=True, slots=True)
class RmvField(DldAction):
    s: str
    f: str

    def __str__(self):
        return f"{self.s} -. {self.f}"


@dataclass(frozen=True, slots=True)
class HasField(DldAction):
    s: str
    f: str

    def __str__(self):
        return f"{self.s} ?. {self.f}"


@dataclass(frozen=True, slots=True)
class SetField(DldAction):
    s: str
    f: str
    t: str

    def __str__(self):
        return f"{self.s}.{self.f} = {self.t}"


@dataclass(frozen=True, slots=True)
class ClrField(DldAction):
    s: str
    f: str

    def __str__(self):
        return f"clr {self.s}.{self.f}"


@dataclass(frozen=True, slots=True)
class GetField(DldAction):
    """s := content of field f of the object in spot t."""

    s: str
    t: str
    f: str

    def __str__(self):
        return f"{self.s} = {self.t}.{self.f}"


@dataclass(frozen=True, slots=True)
class Fgc(DldAction):
    def __str__(self):
        return "fgc"


@dataclass(frozen=True, slots=True)
class SetSpotPso(DldAction):
    s: str
    mimic_only = True

    def __str__(self):
        return f"{self.s} = !pso"


@dataclass(frozen=True, slots=True)
class SetSpotSso(DldAction):
    s: str
    mimic_only = True

    def __str__(self):
        return f"{self.s} = !sso"


@dataclass(frozen=True, slots=True)
class SetFieldPso(DldAction):
    s: str
    f: str
    mimic_only = True

    def __str__(self):
        return f"{self.s}.{self.f} = !pso"


@dataclass(frozen=True, slots=True)
class SetFieldSso(DldAction):
    s: str
    f: str
    mimic_only = True

    def __str__(self):
        return f"{self.s}.{self.f} = !sso"


# -- surface syntax ----------------------------------------------------------

_N = r"([A-Za-z_][\w']*)"
_PATTERNS = [
    (re.compile(rf"^fgc$"), lambda: Fgc()),
    (re.compile(rf"^clr\s+{_N}\s*\.\s*{_N}$"), ClrField),
    (re.compile(rf"^clr\s+{_N}$"), ClrSpot),
    (re.compile(rf"^undef\s+{_N}$"), UndefTst),
    (re.compile(rf"^{_N}\s*==\s*{_N}$"), EqualTst),
    (re.compile(rf"^{_N}\s*\+\.\s*{_N}$"), AddField),
    (re.compile(rf"^{_N}\s*-\.\s*{_N}$"), RmvField),
    (re.compile(rf"^{_N}\s*\?\.\s*{_N}$"), HasField),
    (re.compile(rf"^{_N}\s*=\s*!pso$"), SetSpotPso),
    (re.compile(rf"^{_N}\s*=\s*!sso$"), SetSpotSso),
    (re.compile(rf"^{_N}\s*\.\s*{_N}\s*=\s*!pso$"), SetFieldPso),
    (re.compile(rf"^{_N}\s*\.\s*{_N}\s*=\s*!sso$"), SetFieldSso),
    (re.compile(rf"^{_N}\s*\.\s*{_N}\s*=\s*{_N}$"), SetField),
    (re.compile(rf"^{_N}\s*=\s*fresh$"), GetFresh),
    (re.compile(rf"^{_N}\s*=\s*{_N}\s*\.\s*{_N}$"), GetField),
    (re.compile(rf"^{_N}\s*=\s*{_N}$"), SetSpot),
]

_KEYWORDS = {"fresh", "clr", "undef", "fgc"}


@lru_cache(maxsize=4096)
def parse_action(text: str) -> DldAction:
    src = text.strip()
    for pattern, ctor in _PATTERNS:
        m = pattern.match(src)
        if m:
            names = m.groups()
            if any(n in _KEYWORDS for n in names):
                continue
            return ctor(*names)
    raise ActionError(f"not a basic action: {text!r}")


def check_action(action: DldAction, universe: Universe) -> None:
    """Raise ActionError unless `action` is a basic action over `universe`."""
    if action.mimic_only and not universe.is_mimic:
        raise ActionError(f"action '{action}' needs the mimicking variant")
    for s in action.spots():
        if not universe.has_spot(s):
            raise ActionError(f"unknown spot {s!r} in action '{action}'")
    for f in action.fields():
        if not universe.has_field(f):
            raise ActionError(f"unknown field {f!r} in action '{action}'")


@lru_cache(maxsize=65536)
def action_for(method: str, universe: Universe) -> DldAction | None:
    """The basic action named by `method` over `universe`, or None."""
    try:
        action = parse_action(method)
        check_action(action, universe)
    except ActionError:
        return None
    return action


# -- semantics ---------------------------------------------------------------

class EffectResult(NamedTuple):
    next: DataLinkage
    reply: bool


def fresh(state: DataLinkage) -> str | None:
    """Least declared atom that occurs nowhere in `state`."""
    used = state.occurring_atoms()
    for a in state.universe.atoms:
        if a not in used:
            return a
    return None


def reachable_atoms(state: DataLinkage) -> set[str]:
    roots = {l.atom for l in state.links if type(l) is SpotLink}
    if state.universe.is_mimic:
        roots.update((PSO, SSO))
    edges: dict[str, list[str]] = {}
    for l in state.links:
        if type(l) is FieldLink:
            edges.setdefault(l.atom, []).append(l.target)
    seen = set(roots)
    todo = list(roots)
    while todo:
        a = todo.pop()
        for b in edges.get(a, ()):
            if b not in seen:
                seen.add(b)
                todo.append(b)
    return seen


def fgc(state: DataLinkage) -> DataLinkage:
    """Drop every field link, partial field link and value association whose
    carrier is unreachable from the spots."""
    live = reachable_atoms(state)
    kept = frozenset(l for l in state.links if type(l) is SpotLink or l.atom in live)
    return state._new(kept)


def _clear_spot(state: DataLinkage, s: str) -> DataLinkage:
    return state.without_key(SpotKey(s))


def effect(action: DldAction, state: DataLinkage) -> EffectResult:
    """State and reply after performing `action` in `state`.

    Spots and fields that are read must be locally deterministic, otherwise
    nothing changes and the reply is False. Targets that are only written
    are overridden whatever their prior multiplicity.
    """
    if action.mimic_only and not state.universe.is_mimic:
        raise ActionError(f"action '{action}' needs the mimicking variant")
    L = state
    unchanged = EffectResult(L, False)
    match action:
        case GetFresh(s):
            a = fresh(L)
            if a is None:
                return unchanged
            return EffectResult(L.override1(SpotLink(s, a)), True)
        case SetSpot(s, t):
            src = L.content_of_spot(t)
            if src.status is Status.UNIQUE:
                return EffectResult(L.override1(SpotLink(s, src.atom)), True)
            if src.status is Status.UNDEFINED:
                return EffectResult(_clear_spot(L, s), True)
            return unchanged
        case ClrSpot(s):
            return EffectResult(_clear_spot(L, s), True)
        case EqualTst(s, t):
            x, y = L.content_of_spot(s), L.content_of_spot(t)
            return EffectResult(L, x.is_unique and y.is_unique and x.atom == y.atom)
        case UndefTst(s):
            return EffectResult(L, L.content_of_spot(s).status is Status.UNDEFINED)
        case AddField(s, f):
            c = L.content_of_spot(s)
            if c.is_unique and L.field_group(c.atom, f).status is Status.ABSENT:
                return EffectResult(L.combine(L._new(frozenset({PartialFieldLink(c.atom, f)}))), True)
            return unchanged
        case RmvField(s, f):
            c = L.content_of_spot(s)
            if c.is_unique and L.field_group(c.atom, f).status is not Status.ABSENT:
                return EffectResult(L.without_key(FieldKey(c.atom, f)), True)
            return unchanged
        case HasField(s, f):
            c = L.content_of_spot(s)
            return EffectResult(
                L, c.is_unique and L.field_group(c.atom, f).status is not Status.ABSENT
            )
        case SetField(s, f, t):
            c = L.content_of_spot(s)
            if not c.is_unique or not _writable_field(L, c.atom, f):
                return unchanged
            src = L.content_of_spot(t)
            if src.status is Status.UNIQUE:
                return EffectResult(L.override1(FieldLink(c.atom, f, src.atom)), True)
            if src.status is Status.UNDEFINED:
                return EffectResult(L.override1(PartialFieldLink(c.atom, f)), True)
            return unchanged
        case ClrField(s, f):
            c = L.content_of_spot(s)
            if c.is_unique and L.field_group(c.atom, f).status is not Status.ABSENT:
                return EffectResult(L.override1(PartialFieldLink(c.atom, f)), True)
            return unchanged
        case GetField(s, t, f):
            c = L.content_of_spot(t)
            if not c.is_unique:
                return unchanged
            g = L.field_group(c.atom, f)
            if g.status is Status.UNIQUE:
                return EffectResult(L.override1(SpotLink(s, g.atom)), True)
            if g.status is Status.UNDEFINED:
                return EffectResult(_clear_spot(L, s), True)
            return unchanged
        case Fgc():
            return EffectResult(fgc(L), True)
        case SetSpotPso(s):
            return EffectResult(L.override1(SpotLink(s, PSO)), True)
        case SetSpotSso(s):
            return EffectResult(L.override1(SpotLink(s, SSO)), True)
        case SetFieldPso(s, f):
            return _set_field_special(L, s, f, PSO)
        case SetFieldSso(s, f):
            return _set_field_special(L, s, f, SSO)
    raise ActionError(f"not a basic action: {action!r}")


def _writable_field(L: DataLinkage, atom: str, f: str) -> bool:
    return L.field_group(atom, f).status in (Status.UNIQUE, Status.UNDEFINED)


def _set_field_special(L: DataLinkage, s: str, f: str, special: str) -> EffectResult:
    c = L.content_of_spot(s)
    if c.is_unique and _writable_field(L, c.atom, f):
        return EffectResult(L.override1(FieldLink(c.atom, f, special)), True)
    return EffectResult(L, False)


CONTENT_CHANGING = (GetFresh, SetSpot, SetField, GetField)
TESTS = (EqualTst, UndefTst, HasField)


def all_actions(universe: Universe, kinds=None) -> list[DldAction]:
    """Every basic action over `universe` (mimic-only ones included for the
    mimicking variant), optionally restricted to the given classes."""
    S, F = universe.spots, universe.fields
    out: list[DldAction] = []
    out += [GetFresh(s) for s in S]
    out += [SetSpot(s, t) for s in S for t in S]
    out += [ClrSpot(s) for s in S]
    out += [EqualTst(s, t) for s in S for t in S]
    out += [UndefTst(s) for s in S]
    out += [AddField(s, f) for s in S for f in F]
    out += [RmvField(s, f) for s in S for f in F]
    out += [HasField(s, f) for s in S for f in F]
    out += [SetField(s, f, t) for s in S for f in F for t in S]
    out += [ClrField(s, f) for s in S for f in F]
    out += [GetField(s, t, f) for s in S for t in S for f in F]
    out.append(Fgc())
    if universe.is_mimic:
        out += [SetSpotPso(s) for s in S] + [SetSpotSso(s) for s in S]
        out += [SetFieldPso(s, f) for s in S for f in F]
        out += [SetFieldSso(s, f) for s in S for f in F]
    if kinds is not None:
        out = [a for a in out if isinstance(a, tuple(kinds))]
    return out


__all__ = [
    "ActionError", "DldAction", "GetFresh", "SetSpot", "ClrSpot", "EqualTst",
    "UndefTst", "AddField", "RmvField", "HasField", "SetField", "ClrField",
    "GetField", "Fgc", "SetSpotPso", "SetSpotSso", "SetFieldPso", "SetFieldSso",
    "parse_action", "check_action", "action_for", "EffectResult", "effect",
    "fresh", "fgc", "reachable_atoms", "all_actions", "CONTENT_CHANGING", "TESTS",
]

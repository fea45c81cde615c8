"""Data linkages: canonical sets of atomic links, the two combination
operators, closed-term normalization and read-only state inspection."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

PSO = "!pso"
SSO = "!sso"
SPECIAL_ATOMS = (PSO, SSO)


class LinkageError(ValueError):
    """Malformed input: unknown names, universe mismatch, bad term syntax."""


class Variant(enum.Enum):
    PLAIN = "plain"
    MIMIC = "mimic"


def _check_names(kind: str, names: tuple[str, ...]) -> None:
    if not names:
        raise LinkageError(f"universe has no {kind}")
    if len(set(names)) != len(names):
        raise LinkageError(f"duplicate {kind} in universe: {names}")
    for n in names:
        if not n or n.startswith("!"):
            raise LinkageError(f"invalid {kind[:-1]} name {n!r}")


@dataclass(frozen=True)
class Universe:
    spots: tuple[str, ...]
    fields: tuple[str, ...]
    atoms: tuple[str, ...]
    values: tuple[str, ...]
    variant: Variant = Variant.PLAIN
    _rank: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        for kind in ("spots", "fields", "atoms", "values"):
            object.__setattr__(self, kind, tuple(getattr(self, kind)))
            _check_names(kind, getattr(self, kind))
        rank = {}
        for kind in ("spots", "fields", "values"):
            rank[kind] = {n: i for i, n in enumerate(getattr(self, kind))}
        rank["atoms"] = {n: i for i, n in enumerate(self.all_atoms)}
        object.__setattr__(self, "_rank", rank)

    @property
    def is_mimic(self) -> bool:
        return self.variant is Variant.MIMIC

    @property
    def all_atoms(self) -> tuple[str, ...]:
        """Declared atoms followed by the reserved mimic atoms, if any."""
        if self.is_mimic:
            return self.atoms + SPECIAL_ATOMS
        return self.atoms

    def mimic(self) -> Universe:
        if self.is_mimic:
            return self
        twin = self._rank.get("twin")
        if twin is None:
            twin = Universe(self.spots, self.fields, self.atoms, self.values, Variant.MIMIC)
            self._rank["twin"] = twin
            twin._rank["twin"] = self
        return twin

    def plain(self) -> Universe:
        if not self.is_mimic:
            return self
        twin = self._rank.get("twin")
        if twin is None:
            twin = Universe(self.spots, self.fields, self.atoms, self.values)
            self._rank["twin"] = twin
            twin._rank["twin"] = self
        return twin

    def has_spot(self, name: str) -> bool:
        return name in self._rank["spots"]

    def has_field(self, name: str) -> bool:
        return name in self._rank["fields"]

    def has_atom(self, name: str) -> bool:
        return name in self._rank["atoms"]

    def has_value(self, name: str) -> bool:
        return name in self._rank["values"]

    def rank(self, kind: str, name: str) -> int:
        return self._rank[kind][name]


# -- atomic links ------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class SpotKey:
    spot: str


@dataclass(frozen=True, slots=True)
class FieldKey:
    atom: str
    field: str


@dataclass(frozen=True, slots=True)
class ValueKey:
    atom: str


LinkKey = Union[SpotKey, FieldKey, ValueKey]


@dataclass(frozen=True, slots=True)
class SpotLink:
    spot: str
    atom: str

    @property
    def key(self) -> SpotKey:
        return SpotKey(self.spot)

    def __str__(self):
        return f"{self.spot} = {self.atom}"


@dataclass(frozen=True, slots=True)
class PartialFieldLink:
    atom: str
    field: str

    @property
    def key(self) -> FieldKey:
        return FieldKey(self.atom, self.field)

    def __str__(self):
        return f"{self.atom} . {self.field}"


@dataclass(frozen=True, slots=True)
class FieldLink:
    atom: str
    field: str
    target: str

    @property
    def key(self) -> FieldKey:
        return FieldKey(self.atom, self.field)

    def __str__(self):
        return f"{self.atom} . {self.field} = {self.target}"


@dataclass(frozen=True, slots=True)
class ValueAssoc:
    atom: str
    value: str

    @property
    def key(self) -> ValueKey:
        return ValueKey(self.atom)

    def __str__(self):
        return f"{self.atom} : {self.value}"


AtomicLink = Union[SpotLink, PartialFieldLink, FieldLink, ValueAssoc]


def check_link(link: AtomicLink, universe: Universe) -> None:
    """Raise LinkageError if `link` mentions a name outside `universe`."""
    bad = None
    if isinstance(link, SpotLink):
        if not universe.has_spot(link.spot):
            bad = ("spot", link.spot)
        elif not universe.has_atom(link.atom):
            bad = ("atom", link.atom)
    elif isinstance(link, (PartialFieldLink, FieldLink)):
        if not universe.has_atom(link.atom):
            bad = ("atom", link.atom)
        elif not universe.has_field(link.field):
            bad = ("field", link.field)
        elif isinstance(link, FieldLink) and not universe.has_atom(link.target):
            bad = ("atom", link.target)
    elif isinstance(link, ValueAssoc):
        if not universe.has_atom(link.atom):
            bad = ("atom", link.atom)
        elif not universe.has_value(link.value):
            bad = ("value", link.value)
    else:
        raise LinkageError(f"not an atomic link: {link!r}")
    if bad:
        raise LinkageError(f"unknown {bad[0]} {bad[1]!r} in link '{link}'")


def link_sort_key(link: AtomicLink, universe: Universe) -> tuple:
    r = universe.rank
    if isinstance(link, SpotLink):
        return (0, r("spots", link.spot), r("atoms", link.atom))
    if isinstance(link, PartialFieldLink):
        return (1, r("atoms", link.atom), r("fields", link.field))
    if isinstance(link, FieldLink):
        return (2, r("atoms", link.atom), r("fields", link.field), r("atoms", link.target))
    return (3, r("atoms", link.atom), r("values", link.value))


# -- inspection results ------------------------------------------------------

class Status(enum.Enum):
    ABSENT = "absent"
    UNDEFINED = "undefined"
    UNIQUE = "unique"
    MULTIPLE = "multiple"


@dataclass(frozen=True, slots=True)
class Content:
    status: Status
    atom: str | None = None

    @property
    def is_unique(self) -> bool:
        return self.status is Status.UNIQUE


ABSENT = Content(Status.ABSENT)
UNDEFINED = Content(Status.UNDEFINED)
MULTIPLE = Content(Status.MULTIPLE)


# -- data linkages -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DataLinkage:
    """An element of the initial algebra: a finite set of atomic links.

    Equality is set equality on the links plus universe equality; links
    sharing a key may coexist (non-deterministic spots and fields).
    """

    links: frozenset
    universe: Universe

    def __post_init__(self):
        links = frozenset(self.links)
        object.__setattr__(self, "links", links)
        for link in links:
            check_link(link, self.universe)

    @classmethod
    def empty(cls, universe: Universe) -> DataLinkage:
        return cls(frozenset(), universe)

    @classmethod
    def of(cls, universe: Universe, *links: AtomicLink) -> DataLinkage:
        return cls(frozenset(links), universe)

    def _new(self, links: frozenset) -> DataLinkage:
        # links built from already-validated parts; skip re-checking
        obj = object.__new__(DataLinkage)
        object.__setattr__(obj, "links", links)
        object.__setattr__(obj, "universe", self.universe)
        return obj

    def __eq__(self, other):
        if not isinstance(other, DataLinkage):
            return NotImplemented
        return self.links == other.links and (
            self.universe is other.universe or self.universe == other.universe
        )

    def __hash__(self):
        return hash(self.links)

    def __iter__(self) -> Iterator[AtomicLink]:
        return iter(self.sorted_links())

    def __len__(self):
        return len(self.links)

    def __contains__(self, link):
        return link in self.links

    def __bool__(self):
        return bool(self.links)

    def __str__(self):
        if not self.links:
            return "empty"
        return ", ".join(str(l) for l in self.sorted_links())

    def __repr__(self):
        return f"DataLinkage({{{self}}})"

    def sorted_links(self) -> list[AtomicLink]:
        return sorted(self.links, key=lambda l: link_sort_key(l, self.universe))

    def _same_universe(self, other: DataLinkage) -> None:
        if not (self.universe is other.universe or self.universe == other.universe):
            raise LinkageError("data linkages over different universes")

    # operators

    def combine(self, other: DataLinkage) -> DataLinkage:
        self._same_universe(other)
        return self._new(self.links | other.links)

    __or__ = combine

    def without_key(self, key: LinkKey) -> DataLinkage:
        return self._new(frozenset(l for l in self.links if l.key != key))

    def override1(self, link: AtomicLink) -> DataLinkage:
        """Override by a single atomic link: drop its key group, then add it."""
        key = link.key
        return self._new(frozenset(l for l in self.links if l.key != key) | {link})

    def override(self, other: DataLinkage) -> DataLinkage:
        # Distributes over the right operand one atomic link at a time, so a
        # link dropped for one right-hand link can come back via another.
        self._same_universe(other)
        if not other.links:
            return self
        out: set = set()
        for r in other.links:
            out |= self.override1(r).links
        return self._new(frozenset(out))

    __rshift__ = override

    def with_universe(self, universe: Universe) -> DataLinkage:
        return DataLinkage(self.links, universe)

    def embed(self) -> DataLinkage:
        """The same links viewed over the mimicking universe."""
        return self._new_universe(self.universe.mimic())

    def _new_universe(self, universe: Universe) -> DataLinkage:
        obj = object.__new__(DataLinkage)
        object.__setattr__(obj, "links", self.links)
        object.__setattr__(obj, "universe", universe)
        return obj

    # inspection

    def spot_targets(self, spot: str) -> list[str]:
        return [l.atom for l in self.links if type(l) is SpotLink and l.spot == spot]

    def content_of_spot(self, spot: str) -> Content:
        targets = self.spot_targets(spot)
        if not targets:
            return UNDEFINED
        if len(targets) == 1:
            return Content(Status.UNIQUE, targets[0])
        return MULTIPLE

    def field_links(self, atom: str, fld: str) -> list[AtomicLink]:
        return [
            l for l in self.links
            if type(l) in (PartialFieldLink, FieldLink) and l.atom == atom and l.field == fld
        ]

    def field_group(self, atom: str, fld: str) -> Content:
        group = self.field_links(atom, fld)
        if not group:
            return ABSENT
        if len(group) > 1:
            return MULTIPLE
        (only,) = group
        if type(only) is PartialFieldLink:
            return UNDEFINED
        return Content(Status.UNIQUE, only.target)

    def is_locally_deterministic(self, target: str | tuple[str, str]) -> bool:
        """`target` is a spot name or an (atom, field) pair."""
        if isinstance(target, tuple):
            return self.field_group(*target).status in (Status.UNIQUE, Status.UNDEFINED)
        return self.content_of_spot(target).is_unique

    def occurring_atoms(self) -> set[str]:
        out = set()
        for l in self.links:
            if type(l) is SpotLink:
                out.add(l.atom)
            elif type(l) is FieldLink:
                out.add(l.atom)
                out.add(l.target)
            else:
                out.add(l.atom)
        return out


# -- closed terms ------------------------------------------------------------

@dataclass(frozen=True)
class Empty:
    def __str__(self):
        return "empty"


@dataclass(frozen=True)
class Atom:
    link: AtomicLink

    def __str__(self):
        return f"({self.link})"


@dataclass(frozen=True)
class Combine:
    left: "DlaTerm"
    right: "DlaTerm"

    def __str__(self):
        return f"({self.left} (+) {self.right})"


@dataclass(frozen=True)
class Override:
    left: "DlaTerm"
    right: "DlaTerm"

    def __str__(self):
        return f"({self.left} (>) {self.right})"


DlaTerm = Union[Empty, Atom, Combine, Override]


def normalize(term: DlaTerm, universe: Universe) -> DataLinkage:
    """Evaluate a closed term to its canonical set of links."""
    stack: list = [(term, False)]
    results: list[DataLinkage] = []
    while stack:
        t, done = stack.pop()
        if isinstance(t, Empty):
            results.append(DataLinkage.empty(universe))
        elif isinstance(t, Atom):
            results.append(DataLinkage.of(universe, t.link))
        elif done:
            right = results.pop()
            left = results.pop()
            if isinstance(t, Combine):
                results.append(left.combine(right))
            else:
                results.append(left.override(right))
        elif isinstance(t, (Combine, Override)):
            stack.append((t, True))
            stack.append((t.right, False))
            stack.append((t.left, False))
        else:
            raise LinkageError(f"not a data linkage term: {t!r}")
    return results[0]


def as_term(linkage: DataLinkage) -> DlaTerm:
    """A basic term (combination of atomic links) denoting `linkage`."""
    links = linkage.sorted_links()
    if not links:
        return Empty()
    term: DlaTerm = Atom(links[0])
    for l in links[1:]:
        term = Combine(term, Atom(l))
    return term


def format_linkage(linkage: DataLinkage) -> str:
    """Canonical text: one link per line in universe order, or `empty`."""
    if not linkage.links:
        return "empty"
    return "\n".join(str(l) for l in linkage.sorted_links())


# -- term syntax -------------------------------------------------------------

_TOKEN = re.compile(r"\s*(\(\+\)|\(>\)|\(|\)|=|\.|:|![A-Za-z_]\w*|[A-Za-z_][\w']*)")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise LinkageError(f"unexpected character {text[pos:].strip()[:1]!r} at column {pos + 1}")
        out.append(m.group(1))
        pos = m.end()
    return out


def _is_name(tok: str | None) -> bool:
    return tok is not None and (tok[0].isalpha() or tok[0] in "_!")


class _TermParser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, ahead: int = 0) -> str | None:
        j = self.i + ahead
        return self.toks[j] if j < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise LinkageError("unexpected end of term")
        if expected is not None and tok != expected:
            raise LinkageError(f"expected {expected!r}, found {tok!r}")
        self.i += 1
        return tok

    def name(self) -> str:
        tok = self.take()
        if not _is_name(tok) or tok == "empty":
            raise LinkageError(f"expected a name, found {tok!r}")
        return tok

    def expr(self) -> DlaTerm:
        term = self.primary()
        while self.peek() in ("(+)", "(>)"):
            op = self.take()
            rhs = self.primary()
            term = Combine(term, rhs) if op == "(+)" else Override(term, rhs)
        return term

    def primary(self) -> DlaTerm:
        tok = self.peek()
        if tok == "empty":
            self.take()
            return Empty()
        if tok == "(":
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        return Atom(self.link())

    def link(self) -> AtomicLink:
        first = self.name()
        op = self.take()
        if op == "=":
            return SpotLink(first, self.name())
        if op == ":":
            return ValueAssoc(first, self.name())
        if op == ".":
            fld = self.name()
            if self.peek() == "=":
                self.take()
                return FieldLink(first, fld, self.name())
            return PartialFieldLink(first, fld)
        raise LinkageError(f"expected '=', '.' or ':' after {first!r}, found {op!r}")


def parse_term(text: str) -> DlaTerm:
    p = _TermParser(text)
    if not p.toks:
        raise LinkageError("empty term text")
    term = p.expr()
    if p.peek() is not None:
        raise LinkageError(f"trailing input at {p.peek()!r}")
    return term


def parse_link(text: str) -> AtomicLink:
    p = _TermParser(text)
    link = p.link()
    if p.peek() is not None:
        raise LinkageError(f"trailing input at {p.peek()!r}")
    return link


def term_links(term: DlaTerm) -> Iterator[AtomicLink]:
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Atom):
            yield t.link
        elif isinstance(t, (Combine, Override)):
            stack.append(t.right)
            stack.append(t.left)


def infer_universe(links: Iterable[AtomicLink]) -> Universe:
    """Smallest universe naming everything in `links`, each set sorted.

    Empty categories get a placeholder name `_` so the universe stays valid.
    """
    spots, fields, atoms, values = set(), set(), set(), set()
    for l in links:
        if isinstance(l, SpotLink):
            spots.add(l.spot)
            atoms.add(l.atom)
        elif isinstance(l, PartialFieldLink):
            atoms.add(l.atom)
            fields.add(l.field)
        elif isinstance(l, FieldLink):
            atoms.update((l.atom, l.target))
            fields.add(l.field)
        else:
            atoms.add(l.atom)
            values.add(l.value)
    mimic = bool(atoms & set(SPECIAL_ATOMS))
    atoms -= set(SPECIAL_ATOMS)
    return Universe(
        tuple(sorted(spots)) or ("_",),
        tuple(sorted(fields)) or ("_",),
        tuple(sorted(atoms)) or ("_",),
        tuple(sorted(values)) or ("_",),
        Variant.MIMIC if mimic else Variant.PLAIN,
    )

"""Regular threads as finite graphs built from guarded recursive
specifications, with residual enumeration, single steps and a canonical
identity for residual threads."""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Union

from .dld import ActionError, parse_action

DLD = "dld"


class ThreadError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


# -- actions -----------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class TauAction:
    def __str__(self):
        return "tau"


Tau = TauAction()


@dataclass(frozen=True, slots=True)
class External:
    focus: str
    method: str

    def __str__(self):
        return f"{self.focus}({self.method})"


ThreadAction = Union[TauAction, External]


def external(focus: str, method: str) -> External:
    """An external action; methods at the `dld` focus are canonicalized when
    they parse as basic actions."""
    if not focus or not method:
        raise ThreadError("focus and method must be non-empty")
    if focus == DLD:
        try:
            method = str(parse_action(method))
        except ActionError:
            pass
    return External(focus, method)


def dld(method: str) -> External:
    return external(DLD, method)


# -- specifications ----------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class StopTerm:
    pass


@dataclass(frozen=True)
class DeadTerm:
    pass


STOP = StopTerm()
DEAD = DeadTerm()


@dataclass(frozen=True)
class PostTerm:
    left: "Term"
    action: ThreadAction
    right: "Term"


Term = Union[Var, StopTerm, DeadTerm, PostTerm]


def post(left: Term, action: ThreadAction, right: Term) -> PostTerm:
    return PostTerm(left, action, right)


def prefix(action: ThreadAction, then: Term) -> PostTerm:
    return PostTerm(then, action, then)


@dataclass
class ThreadSpec:
    """Recursion equations `X = term` plus the start variable."""

    equations: dict[str, Term]
    start: str


# -- graphs ------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Stop:
    def __str__(self):
        return "stop"


@dataclass(frozen=True, slots=True)
class DeadEnd:
    def __str__(self):
        return "dead"


@dataclass(frozen=True, slots=True)
class Post:
    left: int
    action: ThreadAction
    right: int


Node = Union[Stop, DeadEnd, Post]


@dataclass(frozen=True, slots=True)
class Terminated:
    pass


@dataclass(frozen=True, slots=True)
class Deadlocked:
    pass


@dataclass(frozen=True, slots=True)
class Next:
    action: ThreadAction
    node: int


@dataclass
class ThreadGraph:
    nodes: dict[int, Node]
    root: int
    names: dict[int, str] = field(default_factory=dict)
    _classes: dict | None = field(default=None, repr=False, compare=False)
    _tokens: dict | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.root not in self.nodes:
            raise ThreadError(f"root {self.root} is not a node")
        for n, node in self.nodes.items():
            if isinstance(node, Post):
                for succ in (node.left, node.right):
                    if succ not in self.nodes:
                        raise ThreadError(f"node {n} points at missing node {succ}")
                if node.action is Tau and node.left != node.right:
                    self.nodes[n] = Post(node.left, Tau, node.left)

    def __getitem__(self, n: int) -> Node:
        return self.nodes[n]

    def label(self, n: int) -> str:
        return self.names.get(n, f"#{n}")

    def residuals(self, n: int | None = None) -> set[int]:
        start = self.root if n is None else n
        seen = {start}
        todo = [start]
        while todo:
            node = self.nodes[todo.pop()]
            if isinstance(node, Post):
                for succ in (node.left, node.right):
                    if succ not in seen:
                        seen.add(succ)
                        todo.append(succ)
        return seen

    def step(self, n: int, reply: bool):
        node = self.nodes[n]
        if isinstance(node, Stop):
            return Terminated()
        if isinstance(node, DeadEnd):
            return Deadlocked()
        return Next(node.action, node.left if reply else node.right)

    def class_of(self, n: int) -> int:
        """Bisimulation class of node n; equal classes mean equal behaviour."""
        if self._classes is None:
            self._classes = bisimulation_classes(self)
        return self._classes[n]

    def canonical_id(self, n: int) -> tuple:
        """A token for the behaviour of node n that is comparable across graphs."""
        if self._classes is None:
            self._classes = bisimulation_classes(self)
        if self._tokens is None:
            self._tokens = {}
        c = self._classes[n]
        tok = self._tokens.get(c)
        if tok is None:
            tok = self._tokens[c] = _canonical_token(self, self._classes, n)
        return tok

    def with_root(self, n: int) -> ThreadGraph:
        return ThreadGraph(self.nodes, n, self.names)


def _labels(node: Node):
    if isinstance(node, Stop):
        return ("stop",)
    if isinstance(node, DeadEnd):
        return ("dead",)
    return ("post", str(node.action) if node.action is Tau else (node.action.focus, node.action.method))


def bisimulation_classes(g: ThreadGraph) -> dict[int, int]:
    """Coarsest partition of nodes that respects labels and successor
    classes; returns node -> class number, numbered by smallest member.

    Hopcroft-style splitting on the two successor functions. Stop and
    DeadEnd nodes loop on themselves, which their labels make harmless.
    """
    ids = sorted(g.nodes)
    succ = []  # succ[c][n]: successor of n on reply c
    for c in (0, 1):
        row = {}
        for n in ids:
            node = g.nodes[n]
            row[n] = (node.left if c == 0 else node.right) if isinstance(node, Post) else n
        succ.append(row)
    pred = [{n: [] for n in ids} for _ in (0, 1)]
    for c in (0, 1):
        for n in ids:
            pred[c][succ[c][n]].append(n)

    by_label: dict = {}
    for n in ids:
        by_label.setdefault(_labels(g.nodes[n]), []).append(n)
    blocks: list[set[int]] = [set(members) for members in by_label.values()]
    block_of = {n: b for b, members in enumerate(blocks) for n in members}
    work = set(range(len(blocks)))
    while work:
        a = work.pop()
        splitter = set(blocks[a])
        for c in (0, 1):
            hit: dict[int, set[int]] = {}
            for m in splitter:
                for n in pred[c][m]:
                    hit.setdefault(block_of[n], set()).add(n)
            for b, inside in hit.items():
                if len(inside) == len(blocks[b]):
                    continue
                outside = blocks[b] - inside
                blocks[b] = inside if len(inside) >= len(outside) else outside
                moved = outside if blocks[b] is inside else inside
                new = len(blocks)
                blocks.append(moved)
                for n in moved:
                    block_of[n] = new
                # b stays queued if it was; otherwise the smaller half suffices
                work.add(new)
    first: dict[int, int] = {}
    out = {}
    for n in ids:
        out[n] = first.setdefault(block_of[n], len(first))
    return out


def _canonical_token(g: ThreadGraph, cls: dict[int, int], start: int) -> tuple:
    """Breadth-first numbering of the quotient reachable from `start`."""
    rep: dict[int, int] = {}
    for n in sorted(g.nodes):
        rep.setdefault(cls[n], n)
    c = cls[start]
    order = {c: 0}
    queue = deque([c])
    rows = []
    while queue:
        k = queue.popleft()
        node = g.nodes[rep[k]]
        if isinstance(node, Post):
            nums = []
            for s in (node.left, node.right):
                sc = cls[s]
                if sc not in order:
                    order[sc] = len(order)
                    queue.append(sc)
                nums.append(order[sc])
            rows.append((_labels(node), nums[0], nums[1]))
        else:
            rows.append(_labels(node))
    return tuple(rows)


def build(spec: ThreadSpec) -> ThreadGraph:
    """Tie the equations into a graph: one node per syntactic subterm, with
    variable references resolved to the node of that variable's equation."""
    eqs = spec.equations
    if spec.start not in eqs:
        raise ThreadError(f"start variable {spec.start!r} is not defined")
    for name, rhs in eqs.items():
        if isinstance(rhs, Var):
            raise ThreadError(f"equation for {name!r} is unguarded")
    nodes: dict[int, Node] = {}
    names: dict[int, str] = {}
    var_node: dict[str, int] = {}
    stop_id = dead_id = None
    pending: list[tuple[int, PostTerm]] = []

    def alloc(term: Term) -> int:
        nonlocal stop_id, dead_id
        if isinstance(term, Var):
            if term.name not in eqs:
                raise ThreadError(f"undefined variable {term.name!r}")
            return var_node[term.name]
        if isinstance(term, StopTerm):
            if stop_id is None:
                stop_id = len(nodes)
                nodes[stop_id] = Stop()
            return stop_id
        if isinstance(term, DeadTerm):
            if dead_id is None:
                dead_id = len(nodes)
                nodes[dead_id] = DeadEnd()
            return dead_id
        if isinstance(term, PostTerm):
            n = len(nodes)
            nodes[n] = None  # placeholder until successors are known
            pending.append((n, term))
            return n
        raise ThreadError(f"not a thread term: {term!r}")

    for name, rhs in eqs.items():
        if isinstance(rhs, PostTerm):
            n = len(nodes)
            nodes[n] = None
            pending.append((n, rhs))
            var_node[name] = n
        else:
            var_node[name] = alloc(rhs)
        names.setdefault(var_node[name], name)

    while pending:
        n, term = pending.pop(0)
        action = term.action
        if not isinstance(action, (TauAction, External)):
            raise ThreadError(f"not a thread action: {action!r}")
        left = alloc(term.left)
        right = left if action is Tau else alloc(term.right)
        nodes[n] = Post(left, action, right)
    return ThreadGraph(nodes, var_node[spec.start], names)


def single(term: Term) -> ThreadGraph:
    """Graph of a closed term (no recursion)."""
    return build(ThreadSpec({"_": term}, "_"))


# -- text syntax -------------------------------------------------------------

_NAME = r"[A-Za-z_][\w']*"
_DEF = re.compile(rf"^({_NAME})\s*:=\s*(.+)$")
_POST = re.compile(rf"^<\s*({_NAME})\s*>\s*({_NAME})\s*\((.*)\)\s*<\s*({_NAME})\s*>$")
_PREFIX = re.compile(rf"^(?:tau|({_NAME})\s*\((.*)\))\s*;\s*({_NAME})$")
_START = re.compile(rf"^start\s+({_NAME})$")


def _ref(name: str) -> Term:
    if name == "stop":
        return STOP
    if name == "dead":
        return DEAD
    return Var(name)


def iter_spec_lines(lines: list[tuple[int, str]]) -> Iterator[tuple[int, str]]:
    for lineno, raw in lines:
        text = raw.split("#", 1)[0].strip()
        if text:
            yield lineno, text


def parse_thread_lines(lines: list[tuple[int, str]]) -> ThreadSpec:
    """Parse numbered lines of thread syntax:

        X := stop | dead | <Y> f(m) <Z> | tau; Y | f(m); Y
        start X
    """
    eqs: dict[str, Term] = {}
    start = None
    first = None
    for lineno, text in iter_spec_lines(lines):
        m = _START.match(text)
        if m:
            if start is not None:
                raise ThreadError("duplicate start directive", lineno)
            start = m.group(1)
            continue
        m = _DEF.match(text)
        if not m:
            raise ThreadError(f"cannot parse {text!r}", lineno)
        name, rhs = m.group(1), m.group(2).strip()
        if name in ("stop", "dead", "tau", "start"):
            raise ThreadError(f"reserved name {name!r}", lineno)
        if name in eqs:
            raise ThreadError(f"variable {name!r} defined twice", lineno)
        first = first or name
        if rhs == "stop":
            eqs[name] = STOP
        elif rhs == "dead":
            eqs[name] = DEAD
        elif (pm := _POST.match(rhs)):
            y, focus, method, z = pm.groups()
            eqs[name] = PostTerm(_ref(y), _action(focus, method, lineno), _ref(z))
        elif (pm := _PREFIX.match(rhs)):
            focus, method, y = pm.groups()
            act = Tau if focus is None else _action(focus, method, lineno)
            eqs[name] = prefix(act, _ref(y))
        else:
            raise ThreadError(f"cannot parse right-hand side {rhs!r}", lineno)
    if not eqs:
        raise ThreadError("thread has no equations")
    return ThreadSpec(eqs, start or first)


def _action(focus: str, method: str, lineno: int) -> ThreadAction:
    method = method.strip()
    if not method:
        raise ThreadError("empty method", lineno)
    return external(focus, method)


def parse_thread(text: str) -> ThreadSpec:
    return parse_thread_lines(list(enumerate(text.splitlines(), start=1)))


def format_graph(g: ThreadGraph) -> str:
    """Thread syntax for `g`, one equation per reachable node."""
    order = sorted(g.residuals(), key=lambda n: (n != g.root, n))
    name = {n: (g.names.get(n) or f"N{n}") for n in order}
    for n in order:
        if isinstance(g[n], Stop):
            name[n] = "stop"
        elif isinstance(g[n], DeadEnd):
            name[n] = "dead"
    lines = []
    for n in order:
        node = g[n]
        if isinstance(node, Post):
            if node.action is Tau:
                lines.append(f"{name[n]} := tau; {name[node.left]}")
            else:
                lines.append(f"{name[n]} := <{name[node.left]}> {node.action} <{name[node.right]}>")
    if not lines:
        lines.append(f"X := {name[g.root]}")
        lines.append("start X")
    else:
        lines.append(f"start {name[g.root]}")
    return "\n".join(lines)

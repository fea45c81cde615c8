"""Shedding: deciding whether the spot or field about to be overwritten by a
thread's next action can be cleared instead.

The decision mimics the shedding: the candidate's new content becomes the
primary marker atom, later overwrites in the search may be shed with the
secondary marker, and every path through the regular thread is followed
until it stops, deadlocks, revisits a (thread, state) pair, or uses a
marked spot or field. The candidate may be shed unless some path uses the
primary marker before anything else goes wrong.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

from .dla import PSO, SSO, DataLinkage, FieldLink, SpotLink
from .dld import (
    ActionError,
    ClrField,
    ClrSpot,
    DldAction,
    EqualTst,
    GetField,
    GetFresh,
    HasField,
    AddField,
    RmvField,
    SetField,
    SetFieldPso,
    SetFieldSso,
    SetSpot,
    SetSpotPso,
    SetSpotSso,
    UndefTst,
    action_for,
    effect,
)
from .threads import DLD, DeadEnd, Post, Stop, Tau, ThreadGraph

DEFAULT_BOUND = 10**6


class BoundExceeded(RuntimeError):
    """The search visited more (thread, state) pairs than allowed."""

    def __init__(self, bound: int):
        self.bound = bound
        super().__init__(f"shedding search exceeded {bound} explored pairs")


class Mode(enum.IntEnum):
    PLAIN = 0
    PRIMARY = 1
    SECONDARY = 2


def shv(action: DldAction) -> DldAction:
    """The action that clears whatever `action` would overwrite."""
    if action.mimic_only:
        raise ActionError(f"'{action}' is not a plain basic action")
    match action:
        case GetFresh(s) | SetSpot(s, _) | GetField(s, _, _):
            return ClrSpot(s)
        case SetField(s, f, _):
            return ClrField(s, f)
    return action


def mshv(mode: int, action: DldAction) -> DldAction:
    """The action as performed during the search in `mode`."""
    if mode == Mode.PLAIN:
        return action
    primary = mode == Mode.PRIMARY
    match action:
        case GetFresh(s) | SetSpot(s, _) | GetField(s, _, _):
            return SetSpotPso(s) if primary else SetSpotSso(s)
        case SetField(s, f, _):
            return SetFieldPso(s, f) if primary else SetFieldSso(s, f)
    return action


def _real(atom: str) -> bool:
    return atom != PSO and atom != SSO


def _real_spot(L: DataLinkage, s: str) -> bool:
    return any(type(l) is SpotLink and l.spot == s and _real(l.atom) for l in L.links)


def _real_field_via(L: DataLinkage, s: str, f: str) -> bool:
    carriers = {l.atom for l in L.links if type(l) is SpotLink and l.spot == s and _real(l.atom)}
    return any(
        type(l) is FieldLink and l.field == f and l.atom in carriers and _real(l.target)
        for l in L.links
    )


def in_nosherr(action: DldAction, L: DataLinkage) -> bool:
    """Whether using `action` in mimic state L involves no marked content."""
    match action:
        case GetFresh() | ClrSpot():
            return True
        case SetSpot(_, src):
            return _real_spot(L, src)
        case UndefTst(s) | AddField(s, _) | RmvField(s, _) | HasField(s, _):
            return _real_spot(L, s)
        case EqualTst(s, t) | SetField(s, _, t):
            return _real_spot(L, s) and _real_spot(L, t)
        case GetField(_, src, f):
            return _real_field_via(L, src, f)
    return False


def in_secsherr(action: DldAction, L: DataLinkage) -> bool:
    """Whether using `action` in mimic state L reads secondarily shed content."""

    def sso_spot(s: str) -> bool:
        return SpotLink(s, SSO) in L.links

    match action:
        case SetSpot(_, src):
            return sso_spot(src)
        case EqualTst(s, t):
            return sso_spot(s) or sso_spot(t)
        case UndefTst(s) | AddField(s, _) | RmvField(s, _) | HasField(s, _):
            return sso_spot(s)
        case SetField(s, _, t):
            return sso_spot(s) or sso_spot(t)
        case GetField(_, src, f):
            if sso_spot(src):
                return True
            carriers = {l.atom for l in L.links if type(l) is SpotLink and l.spot == src}
            return any(FieldLink(a, f, SSO) in L.links for a in carriers)
    return False


# -- search ------------------------------------------------------------------

class Step(NamedTuple):
    """One edge of a search path, for witness reporting."""

    node: int
    mode: int
    label: str
    state: DataLinkage


@dataclass
class ShedVerdict:
    member: bool
    explored: int
    evidence: list[Step] | None = None
    failure: str | None = None

    def lines(self) -> list[str]:
        out = [f"member: {'true' if self.member else 'false'}", f"explored: {self.explored}"]
        if not self.member and self.evidence is not None:
            out.append("witness:")
            for st in self.evidence:
                out.append(f"  [{st.mode}] {st.label}  {{{', '.join(str(l) for l in st.state.sorted_links())}}}")
            if self.failure:
                out.append(f"  fails: {self.failure}")
        return out


class _Failure(Exception):
    def __init__(self, path: list[Step], reason: str):
        self.path = path
        self.reason = reason


@dataclass
class _Search:
    graph: ThreadGraph
    bound: int | None
    explored: int = 0
    depth_limit: int | None = None
    # (node, state, mode) triples whose every path was found error free
    # without cutting a cycle at a pair above them; such a result holds
    # under any ancestor set
    proven: set = field(default_factory=set)

    def token(self, n: int) -> int:
        # bisimulation class numbers identify threads within one graph
        return self.graph.class_of(n)

    def expand(self, n: int, L: DataLinkage, mode: int):
        """Successor triples of (n, L, mode), None if the pair holds outright,
        or a failure reason string."""
        node = self.graph[n]
        if isinstance(node, (Stop, DeadEnd)):
            return None
        act = node.action
        if act is Tau:
            return [(node.left, L, m, "tau") for m in (Mode.PLAIN, Mode.SECONDARY)]
        if act.focus != DLD:
            out = []
            for reply, succ in ((True, node.left), (False, node.right)):
                for m in (Mode.PLAIN, Mode.SECONDARY):
                    out.append((succ, L, m, f"{act} -> {'true' if reply else 'false'}"))
            return out
        action = action_for(act.method, L.universe.plain())
        if action is None:
            return f"{act.method!r} is not a basic action"
        if in_secsherr(action, L):
            return None
        if not in_nosherr(action, L):
            return f"'{action}' uses shed content"
        performed = mshv(mode, action)
        L2, reply = effect(performed, L)
        succ = node.left if reply else node.right
        label = f"dld({performed}) -> {'true' if reply else 'false'}"
        return [(succ, L2, m, label) for m in (Mode.PLAIN, Mode.SECONDARY)]

    def run(self, n: int, L: DataLinkage, mode: int, ancestors: frozenset) -> bool:
        """Depth-first check of every path; raises _Failure with the path to
        the first failing pair found."""
        # key -> depth on the current path; given ancestors sit above the root
        on_path = {k: -1 for k in ancestors}
        path: list[Step] = []
        root = self._visit(n, L, mode, on_path, 0)
        if not isinstance(root, list):
            return True
        key = (self.token(n), L)
        on_path[key] = 0
        # frame: [key, children, depth, lowest ancestor depth cut below, memo key]
        stack = [[key, iter(root), 0, 0, (n, L, mode)]]
        while stack:
            frame = stack[-1]
            nxt = next(frame[1], None)
            if nxt is None:
                stack.pop()
                del on_path[frame[0]]
                if frame[3] >= frame[2] and self.depth_limit is None:
                    self.proven.add(frame[4])
                if stack:
                    stack[-1][3] = min(stack[-1][3], frame[3])
                if path:
                    path.pop()
                continue
            succ, L2, m, label = nxt
            path.append(Step(succ, m, label, L2))
            depth = frame[2] + 1
            if self.depth_limit is not None and len(path) > self.depth_limit:
                # truncated, so nothing below may be recorded as proven
                frame[3] = -2
                path.pop()
                continue
            try:
                children = self._visit(succ, L2, m, on_path, depth)
            except _Failure as fail:
                fail.path = list(path)
                raise
            if not isinstance(children, list):
                if children is not None:
                    frame[3] = min(frame[3], children)
                path.pop()
                continue
            k2 = (self.token(succ), L2)
            on_path[k2] = depth
            stack.append([k2, iter(children), depth, depth, (succ, L2, m)])
        return True

    def _visit(self, n: int, L: DataLinkage, mode: int, on_path: dict, depth: int):
        """Children to explore, None if the pair holds outright, or the
        depth of the ancestor that closes a cycle."""
        cut = on_path.get((self.token(n), L))
        if cut is not None:
            return cut
        if (n, L, mode) in self.proven:
            return None
        self.explored += 1
        if self.bound is not None and self.explored > self.bound:
            raise BoundExceeded(self.bound)
        res = self.expand(n, L, mode)
        if isinstance(res, str):
            raise _Failure([], res)
        return res


def shok_prime(
    mode: int,
    ancestors: frozenset | set,
    graph: ThreadGraph,
    node: int,
    state: DataLinkage,
    bound: int | None = DEFAULT_BOUND,
) -> bool:
    """Membership of (thread `node`, mimic `state`) in the checked set for
    `mode`, given ancestor pairs of (canonical thread id, state)."""
    search = _Search(graph, bound)
    known = {}
    if ancestors:
        known = {graph.canonical_id(n): graph.class_of(n) for n in graph.nodes}
    # ancestors naming behaviour absent from this graph can never be revisited
    keys = frozenset((known[tok], _as_mimic(L)) for tok, L in ancestors if tok in known)
    try:
        return search.run(node, _as_mimic(state), int(mode), keys)
    except _Failure:
        return False


def _as_mimic(state: DataLinkage) -> DataLinkage:
    return state if state.universe.is_mimic else state.embed()


def shok_member(
    graph: ThreadGraph,
    node: int | None = None,
    state: DataLinkage | None = None,
    bound: int | None = DEFAULT_BOUND,
    witness: bool = True,
) -> ShedVerdict:
    """Whether the next action of thread `node` may shed what it overwrites
    when performed in plain `state`."""
    n = graph.root if node is None else node
    search = _Search(graph, bound)
    L = _as_mimic(state)
    try:
        search.run(n, L, Mode.PRIMARY, frozenset())
    except _Failure as fail:
        verdict = ShedVerdict(False, search.explored, fail.path, fail.reason)
        if witness:
            verdict.evidence, verdict.failure = _shortest_witness(graph, n, L, bound, fail)
        return verdict
    return ShedVerdict(True, search.explored)


def _shortest_witness(graph, n, L, bound, found: _Failure):
    # Iterative deepening; the path found first by depth-first search bounds
    # the depth we need to try.
    for limit in range(len(found.path) + 1):
        search = _Search(graph, bound, depth_limit=limit)
        try:
            search.run(n, L, Mode.PRIMARY, frozenset())
        except _Failure as fail:
            return fail.path, fail.reason
    return found.path, found.reason

"""Brute-force reference for the shedding criterion.

Deliberately shares no logic with the search engine in `shedding`: states
are plain tuples, action semantics and error classification are written
out again, thread identity is computed as a greatest-fixpoint bisimulation,
and the criterion is evaluated by enumerating every maximal path and
looking at how it ends. Only meant for small instances.
"""

from __future__ import annotations

from .dla import DataLinkage, FieldLink, PartialFieldLink, SpotLink, ValueAssoc
from .threads import DLD, DeadEnd, Post, Stop, Tau, ThreadGraph

P, S = "!pso", "!sso"


class OracleRefusal(RuntimeError):
    pass


def _to_tuples(state: DataLinkage) -> frozenset:
    out = set()
    for l in state.links:
        if isinstance(l, SpotLink):
            out.add(("spot", l.spot, l.atom))
        elif isinstance(l, FieldLink):
            out.add(("fld", l.atom, l.field, l.target))
        elif isinstance(l, PartialFieldLink):
            out.add(("fld", l.atom, l.field, None))
        elif isinstance(l, ValueAssoc):
            out.add(("val", l.atom, l.value))
    return frozenset(out)


def _spot(st, s):
    return [x[2] for x in st if x[0] == "spot" and x[1] == s]


def _group(st, a, f):
    return [x[3] for x in st if x[0] == "fld" and x[1] == a and x[2] == f]


def _set_spot(st, s, a):
    rest = {x for x in st if not (x[0] == "spot" and x[1] == s)}
    if a is not None:
        rest.add(("spot", s, a))
    return frozenset(rest)


def _set_group(st, a, f, entries):
    rest = {x for x in st if not (x[0] == "fld" and x[1] == a and x[2] == f)}
    rest.update(("fld", a, f, e) for e in entries)
    return frozenset(rest)


def _perform(kind, args, st, atoms):
    """(new state, reply) for one action; `atoms` are the allocatable atoms."""

    def one(s):
        c = _spot(st, s)
        return c[0] if len(c) == 1 else None

    if kind == "GetFresh":
        used = set()
        for x in st:
            if x[0] == "spot":
                used.add(x[2])
            else:
                used.add(x[1])
                if x[0] == "fld" and x[3] is not None:
                    used.add(x[3])
        for a in atoms:
            if a not in used:
                return _set_spot(st, args[0], a), True
        return st, False
    if kind in ("SetSpotPso", "SetSpotSso"):
        return _set_spot(st, args[0], P if kind == "SetSpotPso" else S), True
    if kind == "ClrSpot":
        return _set_spot(st, args[0], None), True
    if kind == "SetSpot":
        src = _spot(st, args[1])
        if len(src) > 1:
            return st, False
        return _set_spot(st, args[0], src[0] if src else None), True
    if kind == "EqualTst":
        a, b = one(args[0]), one(args[1])
        return st, a is not None and a == b
    if kind == "UndefTst":
        return st, not _spot(st, args[0])
    if kind == "GetField":
        a = one(args[1])
        if a is None:
            return st, False
        g = _group(st, a, args[2])
        if len(g) != 1:
            return st, False
        return _set_spot(st, args[0], g[0]), True
    # remaining actions all start from the object in spot s
    a = one(args[0])
    if a is None:
        return st, False
    g = _group(st, a, args[1])
    if kind == "AddField":
        return (_set_group(st, a, args[1], [None]), True) if not g else (st, False)
    if kind == "RmvField":
        return (_set_group(st, a, args[1], []), True) if g else (st, False)
    if kind == "HasField":
        return st, bool(g)
    if kind == "ClrField":
        return (_set_group(st, a, args[1], [None]), True) if g else (st, False)
    if len(g) != 1:
        return st, False
    if kind == "SetField":
        src = _spot(st, args[2])
        if len(src) > 1:
            return st, False
        return _set_group(st, a, args[1], [src[0] if src else None]), True
    if kind in ("SetFieldPso", "SetFieldSso"):
        return _set_group(st, a, args[1], [P if kind == "SetFieldPso" else S]), True
    raise OracleRefusal(f"no semantics for {kind}")


def _decode(method: str):
    from .dld import parse_action  # syntax only

    try:
        act = parse_action(method)
    except ValueError:
        return None
    kind = type(act).__name__
    order = {
        "GetFresh": ("s",), "SetSpot": ("s", "t"), "ClrSpot": ("s",),
        "EqualTst": ("s", "t"), "UndefTst": ("s",), "AddField": ("s", "f"),
        "RmvField": ("s", "f"), "HasField": ("s", "f"), "SetField": ("s", "f", "t"),
        "ClrField": ("s", "f"), "GetField": ("s", "t", "f"), "Fgc": (),
    }
    if kind not in order:
        return None
    return kind, tuple(getattr(act, n) for n in order[kind])


# spots whose secondarily shed content makes the action a secondary error
_SEC_READS = {
    "SetSpot": (1,), "EqualTst": (0, 1), "UndefTst": (0,), "AddField": (0,),
    "RmvField": (0,), "HasField": (0,), "SetField": (0, 2), "GetField": (1,),
}
# spots that must hold real content for the action to be error free
_OK_READS = {
    "SetSpot": (1,), "UndefTst": (0,), "AddField": (0,), "RmvField": (0,),
    "HasField": (0,), "EqualTst": (0, 1), "SetField": (0, 2),
}


def _classify(kind, args, st):
    if any(S in _spot(st, args[i]) for i in _SEC_READS.get(kind, ())):
        return "secondary"
    if kind == "GetField":
        src = args[1]
        if any(S in _group(st, a, args[2]) for a in _spot(st, src)):
            return "secondary"
        for a in _spot(st, src):
            if a not in (P, S) and any(b not in (P, S, None) for b in _group(st, a, args[2])):
                return "fine"
        return "primary"
    if kind in ("GetFresh", "ClrSpot"):
        return "fine"
    if kind in _OK_READS:
        real = all(any(a not in (P, S) for a in _spot(st, args[i])) for i in _OK_READS[kind])
        return "fine" if real else "primary"
    return "primary"


def _shed_variant(kind, args, mode):
    if mode == 0 or kind not in ("GetFresh", "SetSpot", "SetField", "GetField"):
        return kind, args
    tag = "Pso" if mode == 1 else "Sso"
    if kind == "SetField":
        return "SetField" + tag, (args[0], args[1])
    return "SetSpot" + tag, (args[0],)


def _bisimilar(g: ThreadGraph) -> dict[int, int]:
    nodes = sorted(g.nodes)

    def label(n):
        x = g[n]
        return type(x).__name__ if not isinstance(x, Post) else ("post", str(x.action))

    rel = {(m, n) for m in nodes for n in nodes if label(m) == label(n)}
    changed = True
    while changed:
        changed = False
        for m, n in list(rel):
            x, y = g[m], g[n]
            if isinstance(x, Post) and (
                (x.left, y.left) not in rel or (x.right, y.right) not in rel
            ):
                rel.discard((m, n))
                changed = True
    return {n: min(m for m in nodes if (m, n) in rel) for n in nodes}


def brute_force_criterion(
    g: ThreadGraph, node: int | None, state: DataLinkage, bound: int = 200_000
) -> bool:
    """True iff no path, under any shed/not-shed and reply choices, meets a
    use of the primarily shed content before anything else ends it."""
    rep = _bisimilar(g)
    atoms = state.universe.atoms
    budget = [bound]
    start = g.root if node is None else node

    def ends(n, st, mode, seen):
        budget[0] -= 1
        if budget[0] < 0:
            raise OracleRefusal(f"more than {bound} pairs")
        x = g[n]
        if isinstance(x, Stop):
            yield "stop"
            return
        if isinstance(x, DeadEnd):
            yield "dead"
            return
        if (rep[n], st) in seen:
            yield "cycle"
            return
        seen = seen | {(rep[n], st)}
        if x.action is Tau:
            succs = [(x.left, st)]
        elif x.action.focus != DLD:
            succs = [(x.left, st), (x.right, st)]
        else:
            dec = _decode(x.action.method)
            if dec is None:
                yield "primary"
                return
            kind, args = dec
            verdict = _classify(kind, args, st)
            if verdict != "fine":
                yield verdict
                return
            k2, a2 = _shed_variant(kind, args, mode)
            st2, reply = _perform(k2, a2, st, atoms)
            succs = [(x.left if reply else x.right, st2)]
        for n2, st2 in succs:
            for m in (0, 2):
                yield from ends(n2, st2, m, seen)

    return all(e != "primary" for e in ends(start, _to_tuples(state), 1, frozenset()))

"""The equations of data linkage algebra as executable checks, plus random
generators for states, terms, threads and service requests."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

from .dla import (
    Atom,
    Combine,
    DataLinkage,
    Empty,
    FieldLink,
    Override,
    PartialFieldLink,
    SpotLink,
    Universe,
    ValueAssoc,
)
from .dld import all_actions
from .threads import DLD, External, Post, Stop, DeadEnd, Tau, ThreadGraph

SMALL_UNIVERSE = Universe(("s", "t", "u"), ("f", "g"), ("a", "b", "c"), ("n", "m"))


@dataclass
class Instance:
    """Random ingredients for one check of one equation."""

    X: DataLinkage
    Y: DataLinkage
    Z: DataLinkage
    s: str
    t: str
    f: str
    g: str
    a: str
    b: str
    c: str
    d: str
    n: str
    m: str


@dataclass(frozen=True)
class Equation:
    name: str
    lhs: Callable[[Instance], DataLinkage]
    rhs: Callable[[Instance], DataLinkage]
    side: Callable[[Instance], bool] | None = None

    def applies(self, i: Instance) -> bool:
        return self.side is None or self.side(i)

    def holds(self, i: Instance) -> bool:
        return self.lhs(i) == self.rhs(i)


def _one(i: Instance, link) -> DataLinkage:
    return DataLinkage.of(i.X.universe, link)


def sl(i, s, a):
    return _one(i, SpotLink(s, a))


def pf(i, a, f):
    return _one(i, PartialFieldLink(a, f))


def fl(i, a, f, b):
    return _one(i, FieldLink(a, f, b))


def va(i, a, n):
    return _one(i, ValueAssoc(a, n))


def _e(i):
    return DataLinkage.empty(i.X.universe)


def _swap(name, left_link, right_link, side=None) -> Equation:
    """(X + l) > r = (X > r) + l"""
    return Equation(
        name,
        lambda i: (i.X | left_link(i)) >> right_link(i),
        lambda i: (i.X >> right_link(i)) | left_link(i),
        side,
    )


def _absorb(name, left_link, right_link) -> Equation:
    """(X + l) > r = X > r"""
    return Equation(
        name,
        lambda i: (i.X | left_link(i)) >> right_link(i),
        lambda i: i.X >> right_link(i),
    )


_S_A = lambda i: sl(i, i.s, i.a)
_PF_AF = lambda i: pf(i, i.a, i.f)
_FL_AFB = lambda i: fl(i, i.a, i.f, i.b)
_VA_AN = lambda i: va(i, i.a, i.n)

EQUATIONS: list[Equation] = [
    Equation("combine-commutative", lambda i: i.X | i.Y, lambda i: i.Y | i.X),
    Equation("combine-associative", lambda i: i.X | (i.Y | i.Z), lambda i: (i.X | i.Y) | i.Z),
    Equation("combine-idempotent", lambda i: i.X | i.X, lambda i: i.X),
    Equation("combine-unit", lambda i: i.X | _e(i), lambda i: i.X),
    Equation("override-left-unit", lambda i: _e(i) >> i.X, lambda i: i.X),
    Equation("override-right-unit", lambda i: i.X >> _e(i), lambda i: i.X),
    Equation(
        "override-distributes",
        lambda i: i.X >> (i.Y | i.Z),
        lambda i: (i.X >> i.Y) | (i.X >> i.Z),
    ),
    _absorb("spot-over-spot", _S_A, lambda i: sl(i, i.s, i.b)),
    _absorb("partial-over-partial", _PF_AF, lambda i: pf(i, i.a, i.f)),
    _absorb("field-under-partial", _FL_AFB, lambda i: pf(i, i.a, i.f)),
    _absorb("partial-under-field", _PF_AF, lambda i: fl(i, i.a, i.f, i.b)),
    _absorb("field-over-field", _FL_AFB, lambda i: fl(i, i.a, i.f, i.c)),
    _absorb("value-over-value", _VA_AN, lambda i: va(i, i.a, i.m)),
    _swap("spot-past-spot", _S_A, lambda i: sl(i, i.t, i.b), lambda i: i.s != i.t),
    _swap("partial-past-spot", _PF_AF, lambda i: sl(i, i.s, i.b)),
    _swap("field-past-spot", _FL_AFB, lambda i: sl(i, i.s, i.c)),
    _swap("value-past-spot", _VA_AN, lambda i: sl(i, i.s, i.b)),
    _swap("spot-past-partial", _S_A, lambda i: pf(i, i.b, i.f)),
    _swap("partial-past-partial", _PF_AF, lambda i: pf(i, i.b, i.g),
          lambda i: i.a != i.b or i.f != i.g),
    _swap("field-past-partial", _FL_AFB, lambda i: pf(i, i.c, i.g),
          lambda i: i.a != i.c or i.f != i.g),
    _swap("value-past-partial", _VA_AN, lambda i: pf(i, i.b, i.f)),
    _swap("spot-past-field", _S_A, lambda i: fl(i, i.b, i.f, i.c)),
    _swap("partial-past-field", _PF_AF, lambda i: fl(i, i.b, i.g, i.c),
          lambda i: i.a != i.b or i.f != i.g),
    _swap("field-past-field", _FL_AFB, lambda i: fl(i, i.c, i.g, i.d),
          lambda i: i.a != i.c or i.f != i.g),
    _swap("value-past-field", _VA_AN, lambda i: fl(i, i.b, i.f, i.c)),
    _swap("spot-past-value", _S_A, lambda i: va(i, i.b, i.n)),
    _swap("partial-past-value", _PF_AF, lambda i: va(i, i.b, i.n)),
    _swap("field-past-value", _FL_AFB, lambda i: va(i, i.c, i.n)),
    _swap("value-past-value", _VA_AN, lambda i: va(i, i.b, i.m), lambda i: i.a != i.b),
]


# -- random generation -------------------------------------------------------

def all_links(universe: Universe, atoms=None) -> list:
    atoms = universe.all_atoms if atoms is None else atoms
    out = []
    out += [SpotLink(s, a) for s in universe.spots for a in atoms]
    out += [PartialFieldLink(a, f) for a in atoms for f in universe.fields]
    out += [FieldLink(a, f, b) for a in atoms for f in universe.fields for b in atoms]
    out += [ValueAssoc(a, n) for a in atoms for n in universe.values]
    return out


def random_state(rng: random.Random, universe: Universe, max_links: int = 5) -> DataLinkage:
    pool = all_links(universe)
    k = rng.randint(0, max_links)
    return DataLinkage(frozenset(rng.sample(pool, min(k, len(pool)))), universe)


def random_instance(rng: random.Random, universe: Universe = SMALL_UNIVERSE, max_links: int = 5) -> Instance:
    pick = rng.choice
    return Instance(
        random_state(rng, universe, max_links),
        random_state(rng, universe, max_links),
        random_state(rng, universe, max_links),
        pick(universe.spots), pick(universe.spots),
        pick(universe.fields), pick(universe.fields),
        pick(universe.atoms), pick(universe.atoms), pick(universe.atoms), pick(universe.atoms),
        pick(universe.values), pick(universe.values),
    )


def random_term(rng: random.Random, universe: Universe, depth: int):
    if depth <= 0 or rng.random() < 0.25:
        if rng.random() < 0.1:
            return Empty()
        return Atom(rng.choice(all_links(universe)))
    left = random_term(rng, universe, depth - 1)
    right = random_term(rng, universe, depth - 1)
    return Combine(left, right) if rng.random() < 0.5 else Override(left, right)


def random_graph(
    rng: random.Random,
    universe: Universe,
    posts: int = 3,
    foreign: bool = True,
    methods: list[str] | None = None,
) -> ThreadGraph:
    """Random regular thread: `posts` Post nodes plus Stop and DeadEnd."""
    if methods is None:
        methods = [str(a) for a in all_actions(universe) if not a.mimic_only]
    nodes = {0: Stop(), 1: DeadEnd()}
    ids = list(range(2, 2 + posts))
    for n in ids:
        r = rng.random()
        if r < 0.1:
            nxt = rng.choice(ids + [0, 1])
            nodes[n] = Post(nxt, Tau, nxt)
            continue
        if foreign and r < 0.2:
            act = External("env", rng.choice(["m", "k"]))
        else:
            act = External(DLD, rng.choice(methods))
        nodes[n] = Post(rng.choice(ids + [0, 1]), act, rng.choice(ids + [0, 1]))
    return ThreadGraph(nodes, ids[0] if ids else 0)


def random_request(rng: random.Random, universe: Universe):
    """A (method, state, graph, node) sample for service conformance checks.

    Mostly well-formed requests that match the thread's next action, with a
    share of mismatches, malformed methods, terminal threads and BOTTOM.
    """
    from .services import BOTTOM

    valid = [str(a) for a in all_actions(universe)]
    junk = ["noop", "s = = t", "x = fresh", "fresh = s", "dld.s", "s.f = !xso"]
    methods = valid + junk if rng.random() < 0.2 else valid
    g = random_graph(rng, universe, posts=rng.randint(1, 3), methods=methods)
    posts = sorted(n for n, node in g.nodes.items() if isinstance(node, Post))
    n = rng.choice(posts) if rng.random() < 0.85 else rng.choice(sorted(g.nodes))
    node = g[n]
    pick = rng.random()
    if pick < 0.75 and isinstance(node, Post) and node.action is not Tau:
        method = node.action.method
    elif pick < 0.9:
        method = rng.choice(valid)
    else:
        method = rng.choice(junk + [""])
    state = BOTTOM if rng.random() < 0.05 else random_state(rng, universe, 4)
    return method, state, g, n


def run_axiom_suite(seed: int = 0, instances: int = 1000, universe: Universe = SMALL_UNIVERSE):
    """Check every equation on `instances` random instances where its side
    condition holds. Returns {name: (checked, violations, first_counterexample)}."""
    rng = random.Random(seed)
    results = {}
    for eq in EQUATIONS:
        checked = bad = 0
        example = None
        while checked < instances:
            inst = random_instance(rng, universe)
            if not eq.applies(inst):
                continue
            checked += 1
            if not eq.holds(inst):
                bad += 1
                if example is None:
                    example = inst
        results[eq.name] = (checked, bad, example)
    return results


# -- the family used to compare the shedding search with the oracle ------------

CRITERION_UNIVERSE = Universe(("s", "t"), ("f",), ("a", "b"), ("nil",))
CRITERION_KINDS = ("GetFresh", "SetSpot", "ClrSpot", "GetField", "SetField", "EqualTst", "UndefTst")


def _states_upto(universe: Universe, k: int) -> list[DataLinkage]:
    from itertools import combinations

    links = all_links(universe)
    return [DataLinkage(frozenset(c), universe) for n in range(k + 1) for c in combinations(links, n)]


def _all_wirings(posts: int):
    """Successor assignments for `posts` Post nodes (ids 2..) in which every
    Post node is reachable from node 2."""
    from itertools import product

    targets = range(posts + 2)
    for succ in product(targets, repeat=2 * posts):
        seen, todo = {2}, [2]
        while todo:
            n = todo.pop()
            for m in succ[2 * (n - 2): 2 * (n - 2) + 2]:
                if m >= 2 and m not in seen:
                    seen.add(m)
                    todo.append(m)
        if len(seen) == posts:
            yield succ


def _graph(methods, succ) -> ThreadGraph:
    nodes = {0: Stop(), 1: DeadEnd()}
    for i, m in enumerate(methods):
        nodes[i + 2] = Post(succ[2 * i], External(DLD, m), succ[2 * i + 1])
    return ThreadGraph(nodes, 2)


def criterion_family(samples_per_size: int = 60_000, seed: int = 0):
    """Yield (graph, state) pairs: every reachable 1-Post thread with every
    state of at most 3 links, every reachable 2-Post thread with every state
    of at most 1 link, and a seeded sample of 3- and 4-Post threads with
    states of at most 3 links."""
    from itertools import product

    universe = CRITERION_UNIVERSE
    methods = [str(a) for a in all_actions(universe) if type(a).__name__ in CRITERION_KINDS]
    small, large = _states_upto(universe, 1), _states_upto(universe, 3)
    for succ in _all_wirings(1):
        for m in methods:
            g = _graph([m], succ)
            for st in large:
                yield g, st
    for succ in _all_wirings(2):
        for ms in product(methods, repeat=2):
            g = _graph(ms, succ)
            for st in small:
                yield g, st
    rng = random.Random(seed)
    for posts in (3, 4):
        wirings = list(_all_wirings(posts))
        for _ in range(samples_per_size):
            g = _graph([rng.choice(methods) for _ in range(posts)], rng.choice(wirings))
            yield g, rng.choice(large)

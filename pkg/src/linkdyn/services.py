"""Forecasting services over data linkages and the use operator that lets a
thread drive one of them."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

from .dla import DataLinkage, Universe, format_linkage
from .dld import DldAction, action_for, effect
from .threads import (
    DeadEnd,
    External,
    Post,
    Stop,
    Tau,
    ThreadGraph,
)


class ServiceError(ValueError):
    pass


class Reply(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    BLOCKED = "blocked"

    @classmethod
    def of(cls, b: bool) -> Reply:
        return cls.TRUE if b else cls.FALSE


class _Bottom:
    """The absorbing state a service enters after rejecting a request."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOTTOM"

    def __str__(self):
        return "undef"


BOTTOM = _Bottom()

ServiceState = Union[DataLinkage, _Bottom]


class ServiceKind(enum.Enum):
    PLAIN = "plain"
    MIMIC = "mimic"
    SHEDDING = "shed"


@dataclass(frozen=True)
class ForecastingService:
    """A service whose effect and yield may inspect the requesting thread.

    The thread context is a (graph, node) pair: the whole residual thread
    that issued the request.
    """

    kind: ServiceKind
    universe: Universe
    state: ServiceState
    bound: int | None = field(default=None, compare=False)

    def _action(self, method: str) -> DldAction | None:
        return action_for(method, self.universe)

    def respond(self, method: str, state: ServiceState, g: ThreadGraph, n: int) -> tuple[ServiceState, Reply]:
        """(effect, yield) for `method` requested in `state` by thread n of g."""
        if state is BOTTOM:
            return BOTTOM, Reply.BLOCKED
        node = g[n]
        if not isinstance(node, Post) or node.action is Tau or node.action.method != method:
            return BOTTOM, Reply.BLOCKED
        action = self._action(method)
        if action is None:
            return BOTTOM, Reply.BLOCKED
        if self.kind is ServiceKind.SHEDDING:
            action = _shedding_choice(action, g, n, state, self.bound)
        result = effect(action, state)
        return result.next, Reply.of(result.reply)

    def effect(self, method: str, state: ServiceState, g: ThreadGraph, n: int) -> ServiceState:
        return self.respond(method, state, g, n)[0]

    def yield_(self, method: str, state: ServiceState, g: ThreadGraph, n: int) -> Reply:
        return self.respond(method, state, g, n)[1]

    def reply(self, method: str, g: ThreadGraph, n: int) -> Reply:
        return self.yield_(method, self.state, g, n)

    def derive(self, method: str, g: ThreadGraph, n: int) -> ForecastingService:
        return self.with_state(self.effect(method, self.state, g, n))

    def with_state(self, state: ServiceState) -> ForecastingService:
        return ForecastingService(self.kind, self.universe, state, self.bound)


def _shedding_choice(action: DldAction, g: ThreadGraph, n: int, state: DataLinkage, bound) -> DldAction:
    from .shedding import shok_member, shv

    shed = shv(action)
    if shed == action:
        # shv is the identity here, so membership cannot change the outcome
        return action
    verdict = shok_member(g, n, state, bound=bound, witness=False)
    return shed if verdict.member else action


def _check_state(state: ServiceState, universe: Universe) -> None:
    if state is not BOTTOM and state.universe != universe:
        raise ServiceError("initial state is over a different universe")


def dlds(state: ServiceState, universe: Universe | None = None) -> ForecastingService:
    universe = universe or state.universe
    if universe.is_mimic:
        raise ServiceError("the plain service needs a plain universe")
    _check_state(state, universe)
    return ForecastingService(ServiceKind.PLAIN, universe, state)


def dldsm(state: ServiceState, universe: Universe | None = None) -> ForecastingService:
    universe = universe or state.universe
    if not universe.is_mimic:
        raise ServiceError("the mimicking service needs a mimicking universe")
    _check_state(state, universe)
    return ForecastingService(ServiceKind.MIMIC, universe, state)


def dldss(state: ServiceState, universe: Universe | None = None, bound: int | None = None) -> ForecastingService:
    universe = universe or state.universe
    if universe.is_mimic:
        raise ServiceError("the shedding service needs a plain universe")
    _check_state(state, universe)
    return ForecastingService(ServiceKind.SHEDDING, universe, state, bound)


# -- use operator ------------------------------------------------------------

@dataclass(frozen=True)
class UseTerminated:
    pass


@dataclass(frozen=True)
class UseDeadlocked:
    blocked: bool = False


@dataclass(frozen=True)
class TauStep:
    node: int
    service: ForecastingService
    method: str | None = None
    reply: bool | None = None


@dataclass(frozen=True)
class ExternalPending:
    focus: str
    method: str
    left: int
    right: int


UseOutcome = Union[UseTerminated, UseDeadlocked, TauStep, ExternalPending]


def use_step(g: ThreadGraph, n: int, focus: str, service: ForecastingService) -> UseOutcome:
    """One application of the use axioms to thread n of g at `focus`."""
    node = g[n]
    if isinstance(node, Stop):
        return UseTerminated()
    if isinstance(node, DeadEnd):
        return UseDeadlocked()
    if node.action is Tau:
        return TauStep(node.left, service)
    act: External = node.action
    if act.focus != focus:
        return ExternalPending(act.focus, act.method, node.left, node.right)
    nxt, reply = service.respond(act.method, service.state, g, n)
    if reply is Reply.BLOCKED:
        return UseDeadlocked(blocked=True)
    ok = reply is Reply.TRUE
    return TauStep(node.left if ok else node.right, service.with_state(nxt), act.method, ok)


# -- runs --------------------------------------------------------------------

@dataclass(frozen=True)
class TauProcessed:
    method: str
    reply: bool

    def __str__(self):
        return f"tau {self.method} -> {_b(self.reply)}"


@dataclass(frozen=True)
class TauLiteral:
    def __str__(self):
        return "tau"


@dataclass(frozen=True)
class Foreign:
    focus: str
    method: str
    reply: bool

    def __str__(self):
        return f"foreign {self.focus}({self.method}) -> {_b(self.reply)}"


@dataclass(frozen=True)
class Terminated:
    def __str__(self):
        return "stop"


@dataclass(frozen=True)
class Deadlocked:
    def __str__(self):
        return "dead"


@dataclass(frozen=True)
class FuelExhausted:
    def __str__(self):
        return "fuel"


Event = Union[TauProcessed, TauLiteral, Foreign, Terminated, Deadlocked, FuelExhausted]


def _b(x: bool) -> str:
    return "true" if x else "false"


def format_state(state: ServiceState) -> str:
    if state is BOTTOM:
        return "{undef}"
    if not state.links:
        return "{}"
    return "{" + ", ".join(format_linkage(state).splitlines()) + "}"


@dataclass
class Trace:
    events: list[Event]
    states: list[ServiceState]
    nodes: list[int]

    @property
    def exhausted(self) -> bool:
        return isinstance(self.events[-1], FuelExhausted)

    def lines(self, states: bool = False) -> list[str]:
        if not states:
            return [str(e) for e in self.events]
        return [f"{e}  {format_state(s)}" for e, s in zip(self.events, self.states)]

    def format(self, states: bool = False) -> str:
        return "\n".join(self.lines(states))


def run(
    g: ThreadGraph,
    focus: str,
    service: ForecastingService,
    oracle: Sequence[bool] = (),
    fuel: int = 10_000,
    start: int | None = None,
) -> Trace:
    """Iterate the use operator until the thread stops, deadlocks or runs out
    of fuel. Actions at other foci take their replies from `oracle` in order."""
    if fuel <= 0:
        raise ServiceError("fuel must be positive")
    replies = iter(oracle)
    n = g.root if start is None else start
    events: list[Event] = []
    states: list[ServiceState] = []
    nodes: list[int] = []
    for _ in range(fuel):
        out = use_step(g, n, focus, service)
        if isinstance(out, UseTerminated):
            events.append(Terminated())
        elif isinstance(out, UseDeadlocked):
            events.append(Deadlocked())
        elif isinstance(out, TauStep):
            events.append(TauLiteral() if out.method is None else TauProcessed(out.method, out.reply))
            service, n = out.service, out.node
        else:
            try:
                r = next(replies)
            except StopIteration:
                raise ServiceError(
                    f"oracle exhausted at foreign action {out.focus}({out.method})"
                ) from None
            events.append(Foreign(out.focus, out.method, bool(r)))
            n = out.left if r else out.right
        states.append(service.state)
        nodes.append(n)
        if isinstance(events[-1], (Terminated, Deadlocked)):
            return Trace(events, states, nodes)
    events.append(FuelExhausted())
    states.append(service.state)
    nodes.append(n)
    return Trace(events, states, nodes)


# -- conformance -------------------------------------------------------------

Sample = tuple[str, ServiceState, ThreadGraph, int]


def _probe_graph(method: str) -> tuple[ThreadGraph, dict[str, int]]:
    other = method + "'"
    nodes = {
        0: Stop(),
        1: DeadEnd(),
        2: Post(0, Tau, 0),
        3: Post(0, External("dld", other), 1),
        4: Post(0, External("other", other), 1),
    }
    g = ThreadGraph(nodes, 0)
    return g, {"stop": 0, "dead": 1, "tau": 2, "mismatch": 3, "mismatch-foreign": 4}


def check_service_conditions(service: ForecastingService, samples: Iterable[Sample]) -> list[str]:
    """Check the two well-formedness conditions on sampled requests.

    Returns a list of violation descriptions; empty means conformant.
    """
    violations: list[str] = []
    count = 0
    for method, state, g, n in samples:
        count += 1
        nxt, reply = service.respond(method, state, g, n)
        if reply is Reply.BLOCKED and nxt is not BOTTOM:
            violations.append(f"blocked {method!r} in {state} did not move to undef")
        after, again = service.respond(method, BOTTOM, g, n)
        if again is not Reply.BLOCKED or after is not BOTTOM:
            violations.append(f"undef is not absorbing for {method!r}")
        probe, where = _probe_graph(method)
        for case, pn in where.items():
            nxt, reply = service.respond(method, state, probe, pn)
            if reply is not Reply.BLOCKED:
                violations.append(f"{case}: {method!r} in {state} not blocked")
            elif nxt is not BOTTOM:
                violations.append(f"{case}: {method!r} in {state} blocked without undef")
    if count == 0:
        violations.append("no samples")
    return violations


__all__ = [
    "Reply", "BOTTOM", "ServiceKind", "ForecastingService", "dlds", "dldsm", "dldss",
    "use_step", "UseTerminated", "UseDeadlocked", "TauStep", "ExternalPending",
    "run", "Trace", "TauProcessed", "TauLiteral", "Foreign", "Terminated",
    "Deadlocked", "FuelExhausted", "check_service_conditions", "ServiceError",
    "format_state",
]

"""One test per acceptance criterion, at the stated tolerances. The
terminal summary prints a pass/fail line for each criterion."""

import io
import os
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

from linkdyn.axioms import (
    EQUATIONS,
    SMALL_UNIVERSE,
    criterion_family,
    random_request,
    random_state,
    random_term,
    run_axiom_suite,
)
from linkdyn.cli import main
from linkdyn.dla import DataLinkage, SpotLink, Universe, format_linkage, normalize, parse_term
from linkdyn.dld import Fgc, effect, fgc, reachable_atoms
from linkdyn.oracle import brute_force_criterion
from linkdyn.services import check_service_conditions, dlds, dldsm, dldss
from linkdyn.shedding import shok_member

WS = Path(__file__).resolve().parent.parent / "workspaces"
EX1, EX2 = str(WS / "example1.ws"), str(WS / "example2.ws")


def cli(*argv):
    out = io.StringIO()
    code = main(list(argv), out, io.StringIO())
    return code, out.getvalue()


def trace_events(text):
    return [line for line in text.splitlines()]


@pytest.mark.criterion(1, "Example 1: shed run [tau true, tau true, stop], plain run [tau true, tau false, dead]")
def test_example1_reproduction():
    t0 = time.perf_counter()
    shed = cli("run", EX1, "--service", "shed")
    plain = cli("run", EX1, "--service", "plain")
    elapsed = time.perf_counter() - t0
    assert shed == (0, "tau s = fresh -> true\ntau t = fresh -> true\nstop\n")
    assert plain == (0, "tau s = fresh -> true\ntau t = fresh -> false\ndead\n")
    assert elapsed < 1.0


@pytest.mark.criterion(2, "Example 2: shed-check false, shed and plain traces event-identical")
def test_example2_verdict():
    t0 = time.perf_counter()
    code, out = cli("shed-check", EX2)
    assert time.perf_counter() - t0 < 1.0
    assert code == 0 and out.splitlines()[0] == "member: false"


@pytest.mark.criterion(2, "Example 2: shed-check false, shed and plain traces event-identical")
def test_example2_traces_identical():
    t0 = time.perf_counter()
    shed = cli("run", EX2, "--service", "shed")
    plain = cli("run", EX2, "--service", "plain")
    assert time.perf_counter() - t0 < 1.0
    # Only the first action is refused shedding; later overwrites may still
    # be shed, which changes the second reply. Asserted as stated.
    assert trace_events(shed[1]) == trace_events(plain[1])


@pytest.mark.criterion(3, "algebra equations: >=1000 instances each, zero violations, < 30 s")
def test_axiom_suite():
    t0 = time.perf_counter()
    results = run_axiom_suite(seed=2024, instances=1000, universe=SMALL_UNIVERSE)
    elapsed = time.perf_counter() - t0
    assert len(results) == len(EQUATIONS)
    assert all(checked >= 1000 for checked, _, _ in results.values())
    bad = {name: n for name, (_, n, _) in results.items() if n}
    assert elapsed < 30
    assert bad == {}


@pytest.mark.criterion(4, "10000 random terms of depth <= 6 normalize; idempotent through print/parse")
def test_normal_forms():
    rng = random.Random(4)
    violations = 0
    for _ in range(10_000):
        term = random_term(rng, SMALL_UNIVERSE, rng.randint(0, 6))
        first = normalize(term, SMALL_UNIVERSE)
        text = format_linkage(first)
        again = normalize(parse_term(" (+) ".join(text.splitlines())), SMALL_UNIVERSE)
        reparsed = normalize(parse_term(str(term)), SMALL_UNIVERSE)
        if again != first or reparsed != first or format_linkage(again) != text:
            violations += 1
    assert violations == 0


@pytest.mark.criterion(5, "service conditions for plain, mimicking and shedding services, 5000 samples each")
@pytest.mark.parametrize("kind", ["dlds", "dldsm", "dldss"])
def test_service_conformance(kind):
    U = SMALL_UNIVERSE
    svc = {
        "dlds": lambda: dlds(DataLinkage.empty(U)),
        "dldsm": lambda: dldsm(DataLinkage.empty(U.mimic())),
        "dldss": lambda: dldss(DataLinkage.empty(U)),
    }[kind]()
    rng = random.Random(5)
    samples = [random_request(rng, svc.universe) for _ in range(5000)]
    assert check_service_conditions(svc, samples) == []


@pytest.mark.criterion(6, "shedding search agrees with the brute-force oracle on the whole family, < 5 min")
def test_oracle_equivalence():
    t0 = time.perf_counter()
    instances = disagreements = 0
    first = None
    for g, st in criterion_family():
        instances += 1
        a = shok_member(g, None, st, witness=False).member
        b = brute_force_criterion(g, None, st)
        if a != b:
            disagreements += 1
            first = first or (g, st, a, b)
    elapsed = time.perf_counter() - t0
    print(f"{instances} instances, {disagreements} disagreements, {elapsed:.1f} s")
    assert disagreements == 0, first
    assert elapsed < 300


@pytest.mark.criterion(7, "fgc on 5000 random states: idempotent, keeps spots, no unreachable carriers, replies true")
def test_fgc_properties():
    rng = random.Random(7)
    U = Universe(("s", "t", "u"), ("f", "g"), ("a", "b", "c", "d"), ("n",))
    for universe in (U, U.mimic()):
        for _ in range(2500):
            X = random_state(rng, universe, 8)
            Y, reply = effect(Fgc(), X)
            assert reply is True
            assert fgc(Y) == Y
            assert {l for l in X.links if isinstance(l, SpotLink)} <= Y.links
            live = reachable_atoms(Y)
            assert all(isinstance(l, SpotLink) or l.atom in live for l in Y.links)
            assert Y.links <= X.links


@pytest.mark.criterion(8, "run, shed-check and dot are byte-identical over 10 invocations")
def test_determinism():
    commands = []
    for ws in (EX1, EX2):
        commands += [
            ["run", ws, "--service", "shed", "--states", "--garbage"],
            ["run", ws, "--service", "plain", "--states", "--garbage"],
            ["shed-check", ws],
            ["dot", ws, "--term", "s = a (+) a . f = a"],
        ]
    for argv in commands:
        outputs = set()
        for i in range(10):
            env = dict(os.environ, PYTHONHASHSEED=str(i))
            proc = subprocess.run(
                [sys.executable, "-m", "linkdyn.cli", *argv], capture_output=True, env=env, check=False
            )
            outputs.add((proc.returncode, proc.stdout))
        assert len(outputs) == 1, argv

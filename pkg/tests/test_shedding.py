import random

import pytest

from linkdyn.axioms import CRITERION_UNIVERSE, random_graph, random_state
from linkdyn.dla import PSO, SSO, DataLinkage, FieldLink, SpotLink, Universe
from linkdyn.dld import (
    ClrField,
    ClrSpot,
    EqualTst,
    Fgc,
    GetField,
    GetFresh,
    SetField,
    SetFieldPso,
    SetFieldSso,
    SetSpot,
    SetSpotPso,
    SetSpotSso,
    UndefTst,
)
from linkdyn.oracle import brute_force_criterion
from linkdyn.services import dlds, dldss, run
from linkdyn.shedding import BoundExceeded, Mode, in_nosherr, in_secsherr, mshv, shok_member, shok_prime, shv
from linkdyn.threads import DLD, build, parse_thread

U1 = Universe(("s", "t"), ("f",), ("a",), ("n",))
U3 = Universe(("s", "t", "u"), ("f",), ("a",), ("n",))

EXAMPLE1 = "P := dld(s = fresh); Q\nQ := <stop> dld(t = fresh) <dead>"
EXAMPLE2 = "P := dld(s = fresh); Q\nQ := <R> dld(t = fresh) <stop>\nR := dld(u = s); stop"


def g_of(text):
    return build(parse_thread(text))


def M(*links, universe=U3):
    return DataLinkage.of(universe.mimic(), *links)


class TestTranslations:
    def test_shv(self):
        assert shv(GetFresh("s")) == ClrSpot("s")
        assert shv(SetSpot("s", "t")) == ClrSpot("s")
        assert shv(GetField("s", "t", "f")) == ClrSpot("s")
        assert shv(SetField("s", "f", "t")) == ClrField("s", "f")
        assert shv(EqualTst("s", "t")) == EqualTst("s", "t")

    def test_mshv(self):
        a = SetField("s", "f", "t")
        assert mshv(Mode.PLAIN, a) == a
        assert mshv(Mode.PRIMARY, a) == SetFieldPso("s", "f")
        assert mshv(Mode.SECONDARY, a) == SetFieldSso("s", "f")
        assert mshv(Mode.PRIMARY, GetFresh("s")) == SetSpotPso("s")
        assert mshv(Mode.SECONDARY, SetSpot("s", "t")) == SetSpotSso("s")
        assert mshv(Mode.SECONDARY, UndefTst("s")) == UndefTst("s")


class TestErrorClasses:
    def test_reading_real_content_is_fine(self):
        L = M(SpotLink("s", "a"))
        assert in_nosherr(SetSpot("t", "s"), L)
        assert in_nosherr(GetFresh("t"), L) and in_nosherr(ClrSpot("s"), L)

    def test_reading_undefined_spot_blocks(self):
        L = M()
        assert not in_nosherr(SetSpot("t", "s"), L) and not in_secsherr(SetSpot("t", "s"), L)

    def test_primary_marker_is_a_primary_error(self):
        L = M(SpotLink("s", PSO))
        assert not in_nosherr(UndefTst("s"), L) and not in_secsherr(UndefTst("s"), L)

    def test_secondary_marker(self):
        L = M(SpotLink("s", SSO), SpotLink("t", "a"))
        assert in_secsherr(EqualTst("t", "s"), L)
        assert not in_secsherr(SetSpot("s", "t"), L)

    def test_field_reads(self):
        L = M(SpotLink("s", "a"), FieldLink("a", "f", SSO))
        assert in_secsherr(GetField("t", "s", "f"), L)
        L = M(SpotLink("s", "a"), FieldLink("a", "f", PSO))
        assert not in_nosherr(GetField("t", "s", "f"), L)
        L = M(SpotLink("s", "a"), FieldLink("a", "f", "a"))
        assert in_nosherr(GetField("t", "s", "f"), L)

    def test_clear_field_and_fgc_are_never_error_free(self):
        L = M(SpotLink("s", "a"), FieldLink("a", "f", "a"))
        assert not in_nosherr(ClrField("s", "f"), L)
        assert not in_nosherr(Fgc(), L)


class TestExamples:
    def test_example1(self):
        g = g_of(EXAMPLE1)
        E = DataLinkage.empty(U1)
        assert shok_member(g, None, E).member
        assert run(g, DLD, dldss(E)).lines() == ["tau s = fresh -> true", "tau t = fresh -> true", "stop"]
        assert run(g, DLD, dlds(E)).lines() == ["tau s = fresh -> true", "tau t = fresh -> false", "dead"]

    def test_example2_verdict_and_witness(self):
        g = g_of(EXAMPLE2)
        v = shok_member(g, None, DataLinkage.empty(U3))
        assert not v.member and v.explored == 3
        assert [s.label for s in v.evidence] == ["dld(s = !pso) -> true", "dld(t = fresh) -> true"]
        assert "u = s" in v.failure

    def test_stop_is_always_member(self):
        assert shok_member(g_of("X := stop"), None, DataLinkage.empty(U1)).member
        assert shok_member(g_of("X := dead"), None, DataLinkage.empty(U1)).member

    def test_cycles_are_cut(self):
        g = g_of("X := dld(s = fresh); X")
        assert shok_member(g, None, DataLinkage.empty(U1)).member

    def test_tau_prefix_is_transparent(self):
        g = g_of("X := dld(s = fresh); Y\nY := tau; Z\nZ := dld(t = s); stop")
        assert not shok_member(g, None, DataLinkage.empty(U1)).member

    def test_foreign_branches_are_both_explored(self):
        g = g_of("X := dld(s = fresh); Y\nY := <stop> env(q) <Z>\nZ := dld(t = s); stop")
        assert not shok_member(g, None, DataLinkage.empty(U1)).member
        g = g_of("X := dld(s = fresh); Y\nY := <stop> env(q) <stop>")
        assert shok_member(g, None, DataLinkage.empty(U1)).member

    def test_shok_prime_with_ancestor(self):
        g = g_of(EXAMPLE2)
        L = DataLinkage.empty(U3).embed()
        assert not shok_prime(Mode.PRIMARY, set(), g, g.root, L)
        assert shok_prime(Mode.PRIMARY, {(g.canonical_id(g.root), L)}, g, g.root, L)


def test_bound_is_enforced():
    g = g_of(EXAMPLE2)
    with pytest.raises(BoundExceeded):
        shok_member(g, None, DataLinkage.empty(U3), bound=1)


def test_long_threads_do_not_recurse():
    lines = [f"X{i} := dld(s = fresh); X{i + 1}" for i in range(5000)] + ["X5000 := stop"]
    assert shok_member(g_of("\n".join(lines)), None, DataLinkage.empty(U1)).member


def test_witness_is_shortest():
    rng = random.Random(2)
    for _ in range(300):
        g = random_graph(rng, CRITERION_UNIVERSE, posts=4, foreign=False)
        st = random_state(rng, CRITERION_UNIVERSE, 3)
        v = shok_member(g, None, st)
        if v.member:
            continue
        from linkdyn.shedding import _Search, _Failure

        for limit in range(len(v.evidence)):
            try:
                _Search(g, None, depth_limit=limit).run(g.root, st.embed(), Mode.PRIMARY, frozenset())
            except _Failure:
                pytest.fail("a shorter witness exists")


def test_agrees_with_oracle_on_random_threads():
    rng = random.Random(9)
    for _ in range(2000):
        g = random_graph(rng, CRITERION_UNIVERSE, posts=rng.randint(1, 5))
        st = random_state(rng, CRITERION_UNIVERSE, 3)
        assert shok_member(g, None, st, witness=False).member == brute_force_criterion(g, None, st)


def test_more_shedding_never_needs_more_atoms():
    # occurring atoms under the shedding service never exceed the plain run
    # while both traces agree
    rng = random.Random(4)
    for _ in range(300):
        g = random_graph(rng, CRITERION_UNIVERSE, posts=4, foreign=False)
        st = random_state(rng, CRITERION_UNIVERSE, 3)
        plain = run(g, DLD, dlds(st), fuel=30)
        shed = run(g, DLD, dldss(st), fuel=30)
        for e1, e2, s1, s2 in zip(plain.events, shed.events, plain.states, shed.states):
            if str(e1) != str(e2):
                break
            assert len(s2.occurring_atoms()) <= len(s1.occurring_atoms())

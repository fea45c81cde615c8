import pytest
from hypothesis import given, settings, strategies as st

from linkdyn.axioms import SMALL_UNIVERSE, all_links
from linkdyn.dla import (
    PSO,
    Combine,
    Content,
    DataLinkage,
    Empty,
    FieldLink,
    LinkageError,
    Override,
    PartialFieldLink,
    SpotLink,
    Status,
    Universe,
    ValueAssoc,
    as_term,
    format_linkage,
    infer_universe,
    normalize,
    parse_link,
    parse_term,
)

U = Universe(("s", "t"), ("f", "g"), ("a", "b", "c"), ("n", "m"))


def L(*links):
    return DataLinkage.of(U, *links)


links_st = st.sampled_from(all_links(SMALL_UNIVERSE))
states_st = st.frozensets(links_st, max_size=6).map(lambda s: DataLinkage(s, SMALL_UNIVERSE))


class TestUniverse:
    def test_rejects_duplicates_and_reserved_names(self):
        with pytest.raises(LinkageError):
            Universe(("s", "s"), ("f",), ("a",), ("n",))
        with pytest.raises(LinkageError):
            Universe(("s",), ("f",), ("!pso",), ("n",))

    def test_mimic_adds_the_two_markers(self):
        m = U.mimic()
        assert m.is_mimic and not U.is_mimic
        assert set(m.all_atoms) == set(U.atoms) | {PSO, "!sso"}
        assert m.plain() == U

    def test_links_outside_the_universe_are_rejected(self):
        with pytest.raises(LinkageError):
            L(SpotLink("zz", "a"))
        with pytest.raises(LinkageError):
            L(SpotLink("s", PSO))


class TestCombineOverride:
    def test_combine_is_union(self):
        assert L(SpotLink("s", "a")) | L(SpotLink("s", "b")) == L(SpotLink("s", "a"), SpotLink("s", "b"))

    def test_spot_override(self):
        assert L(SpotLink("s", "a")) >> L(SpotLink("s", "b")) == L(SpotLink("s", "b"))

    def test_override_keeps_other_keys(self):
        got = L(SpotLink("s", "a"), SpotLink("t", "a")) >> L(SpotLink("s", "b"))
        assert got == L(SpotLink("t", "a"), SpotLink("s", "b"))

    def test_field_group_overridden_by_partial(self):
        X = L(FieldLink("a", "f", "b"), FieldLink("a", "f", "c"), FieldLink("a", "g", "b"))
        assert X >> L(PartialFieldLink("a", "f")) == L(PartialFieldLink("a", "f"), FieldLink("a", "g", "b"))

    def test_override_by_set_distributes_over_its_links(self):
        X = L(SpotLink("s", "a"), SpotLink("t", "a"))
        R = L(SpotLink("s", "b"), SpotLink("t", "c"))
        assert X >> R == (X >> L(SpotLink("s", "b"))) | (X >> L(SpotLink("t", "c")))

    def test_value_override(self):
        assert L(ValueAssoc("a", "n")) >> L(ValueAssoc("a", "m")) == L(ValueAssoc("a", "m"))

    def test_override_by_two_links_with_same_key_keeps_both(self):
        got = L(SpotLink("s", "a")) >> L(SpotLink("s", "b"), SpotLink("s", "c"))
        assert got == L(SpotLink("s", "b"), SpotLink("s", "c"))

    def test_mixing_universes_is_an_error(self):
        with pytest.raises(LinkageError):
            L() | DataLinkage.empty(U.mimic())


class TestContent:
    def test_spot_statuses(self):
        X = L(SpotLink("s", "a"), SpotLink("t", "a"), SpotLink("t", "b"))
        assert X.content_of_spot("s") == Content(Status.UNIQUE, "a")
        assert X.content_of_spot("t").status is Status.MULTIPLE
        assert L().content_of_spot("s").status is Status.UNDEFINED

    def test_field_statuses(self):
        X = L(PartialFieldLink("a", "f"), FieldLink("b", "f", "c"))
        assert X.field_group("a", "f").status is Status.UNDEFINED
        assert X.field_group("b", "f") == Content(Status.UNIQUE, "c")
        assert X.field_group("c", "f").status is Status.ABSENT
        assert X.is_locally_deterministic(("b", "f"))

    def test_occurring_atoms(self):
        X = L(SpotLink("s", "a"), FieldLink("b", "f", "c"), ValueAssoc("c", "n"))
        assert X.occurring_atoms() == {"a", "b", "c"}


class TestTermText:
    @pytest.mark.parametrize(
        "text, expected",
        [
            ("empty (+) (s = a)", "s = a"),
            ("(s = a) (>) (s = b)", "s = b"),
            ("s=a(+)t=b", "s = a\nt = b"),
            ("empty", "empty"),
            ("a . f (+) a . f = b", "a . f\na . f = b"),
            ("(a . f = b) (>) (a . f)", "a . f"),
        ],
    )
    def test_normalize_examples(self, text, expected):
        term = parse_term(text)
        assert format_linkage(normalize(term, infer_universe(_links(term)))) == expected

    def test_operators_associate_left_at_equal_precedence(self):
        t = parse_term("s = a (>) s = b (+) s = c")
        assert isinstance(t, Combine) and isinstance(t.left, Override)

    @pytest.mark.parametrize("bad", ["", "s =", "(s = a", "s = a (+)", "a . ", "s = a)", "s == a"])
    def test_syntax_errors(self, bad):
        with pytest.raises(LinkageError):
            parse_term(bad)

    @pytest.mark.parametrize("text", ["s = a", "a . f", "a . f = b", "a : n", "s = !pso"])
    def test_link_round_trip(self, text):
        assert str(parse_link(text)) == text

    def test_as_term_denotes_the_linkage(self):
        X = L(SpotLink("s", "a"), FieldLink("a", "f", "b"), ValueAssoc("b", "n"))
        assert normalize(as_term(X), U) == X
        assert normalize(as_term(L()), U) == L()
        assert isinstance(as_term(L()), Empty)

    def test_deep_terms_do_not_recurse(self):
        text = " (+) ".join(["s = a"] * 5000)
        assert format_linkage(normalize(parse_term(text), U)) == "s = a"


def _links(term):
    from linkdyn.dla import term_links

    return list(term_links(term))


@settings(max_examples=200, deadline=None)
@given(states_st, states_st, states_st)
def test_combine_laws(X, Y, Z):
    assert X | Y == Y | X
    assert X | (Y | Z) == (X | Y) | Z
    assert X | X == X


@settings(max_examples=200, deadline=None)
@given(states_st, states_st)
def test_override_units_and_result_contains_right_operand(X, Y):
    E = DataLinkage.empty(SMALL_UNIVERSE)
    assert E >> X == X and X >> E == X
    assert Y.links <= (X >> Y).links


@settings(max_examples=200, deadline=None)
@given(states_st, st.frozensets(links_st, min_size=1, max_size=3), st.frozensets(links_st, min_size=1, max_size=3))
def test_override_distributes_over_nonempty_combinations(X, ys, zs):
    Y, Z = DataLinkage(ys, SMALL_UNIVERSE), DataLinkage(zs, SMALL_UNIVERSE)
    assert X >> (Y | Z) == (X >> Y) | (X >> Z)


@settings(max_examples=200, deadline=None)
@given(states_st)
def test_print_parse_round_trip(X):
    text = " (+) ".join(format_linkage(X).splitlines())
    assert normalize(parse_term(text), SMALL_UNIVERSE) == X

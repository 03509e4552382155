from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qss import access
from qss.access import AccessStructure
from qss.errors import DomainError, NoCloningError


def test_parse_and_names():
    assert access.parse_set("ABC") == frozenset({1, 2, 3})
    assert access.set_name({4, 1}) == "AD"
    assert access.party_name(27) == "P27"
    with pytest.raises(DomainError):
        access.parse_set("a")


def test_normalize_keeps_minimal_sets():
    s = access.normalize(["ABC", "AD", "ABCD"])
    assert s.minimal_sets == (frozenset({1, 4}), frozenset({1, 2, 3}))
    assert s.parties == (1, 2, 3, 4)
    assert str(s) == "AD OR ABC"


def test_classify():
    s = access.normalize(["ABC", "AD"])
    assert s.classify({1, 2, 3}) == "authorized"
    assert s.classify({1, 2, 4}) == "authorized"
    assert s.classify({2, 3, 4}) == "unauthorized"
    assert s.classify(set()) == "unauthorized"
    with pytest.raises(DomainError):
        s.classify({5})


def test_threshold_structure():
    s = access.threshold_structure(2, 3)
    assert [access.set_name(t) for t in s.minimal_sets] == ["AB", "AC", "BC"]
    assert access.no_cloning_ok(s) and access.is_maximal(s)
    assert not access.no_cloning_ok(access.threshold_structure(1, 2))


def test_no_cloning_message():
    s = access.normalize(["ABC", "AD", "BC"])
    with pytest.raises(NoCloningError, match="complement AD is already authorized"):
        access.require_no_cloning(s)


def test_maximal_completion_example():
    s = access.normalize(["ABC", "AD"])
    assert not access.is_maximal(s)
    done = access.maximal_completion(s)
    assert str(done) == "AD OR BD OR CD OR ABC"
    assert access.is_maximal(done)


def test_restrict_and_importance():
    s = access.normalize(["ABC", "AD", "BD", "CD"])
    r = access.restrict(s, 4)
    assert str(r) == "ABC" and r.parties == (1, 2, 3)
    with pytest.raises(DomainError, match="degenerate"):
        access.restrict(access.normalize(["AD"]), 4)
    five = access.normalize(["ABC", "AD"], 5)
    assert access.is_important(five, 1)
    assert not access.is_important(five, 5)


def test_serialization_roundtrip():
    s = access.normalize(["ABC", "AD"])
    assert AccessStructure.from_json(s.to_json()) == s
    odd = access.normalize([[2, 5]], [2, 5, 7])
    assert AccessStructure.from_dict(odd.to_dict()) == odd


def test_structure_validation():
    with pytest.raises(DomainError):
        AccessStructure((1, 2), (frozenset({1}), frozenset({1, 2})))
    with pytest.raises(DomainError):
        AccessStructure((1, 2), ())
    with pytest.raises(DomainError):
        AccessStructure((1,), (frozenset({2}),))


@st.composite
def structures(draw, n=4):
    sets = draw(st.lists(st.sets(st.integers(1, n), min_size=1), min_size=1, max_size=5))
    return access.normalize(sets, n)


@settings(max_examples=80)
@given(structures())
def test_monotone_and_no_cloning_equivalence(s):
    auth = set(s.authorized_sets())
    for t in auth:
        for x in s.parties:
            assert t | {x} in auth
    disjoint = any(not (a & b) for a, b in itertools.combinations(s.authorized_sets(), 2))
    assert access.no_cloning_ok(s) == (not disjoint)


@settings(max_examples=80)
@given(structures())
def test_completion_is_maximal_superset(s):
    if not access.no_cloning_ok(s):
        with pytest.raises(NoCloningError):
            access.maximal_completion(s)
        return
    done = access.maximal_completion(s)
    assert access.is_maximal(done) and access.no_cloning_ok(done)
    assert all(done.is_authorized(t) for t in s.minimal_sets)
    if access.is_maximal(s):
        assert done == s


@settings(max_examples=60)
@given(structures(5))
def test_maximal_means_complement_rule(s):
    if access.is_maximal(s):
        for t in access.subsets(s.parties):
            assert s.is_authorized(t) == (not s.is_authorized(s.complement(t)))

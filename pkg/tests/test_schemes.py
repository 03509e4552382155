from __future__ import annotations

import json
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from qss import access, oracle, qsim
from qss import schemes as S
from qss.errors import ConstructionError, DomainError, FormatError, NoCloningError, UnauthorizedError
from qss.qsim import StateVector

R3 = 1 / np.sqrt(3)

# logical states of the ((2,3)) qutrit scheme, by hand from f(x) = c + s x at x = 0, 1, 2
QUTRIT_LOGICAL = {
    0: {(0, 0, 0), (1, 1, 1), (2, 2, 2)},
    1: {(0, 1, 2), (1, 2, 0), (2, 0, 1)},
    2: {(0, 2, 1), (1, 0, 2), (2, 1, 0)},
}


def basis(p: int, s: int) -> np.ndarray:
    v = np.zeros(p, dtype=complex)
    v[s] = 1
    return v


def test_qutrit_logical_states():
    for s, support in QUTRIT_LOGICAL.items():
        state = S.logical_state(2, 3, s)
        assert set(state) == support
        assert all(abs(a - R3) < 1e-15 for a in state.values())


def test_encode_matches_logical_states():
    scheme = S.build_threshold(2, 3)
    assert scheme.p == 3 and scheme.is_pure
    for s, support in QUTRIT_LOGICAL.items():
        amps = S.encode(scheme, basis(3, s)).amplitudes
        expected = np.zeros(27)
        for digits in support:
            expected[np.ravel_multi_index(digits, (3, 3, 3))] = R3
        assert np.allclose(amps, expected, atol=1e-15)


def test_encode_is_linear_isometry():
    scheme = S.build_threshold(3, 5, 5)
    iso = S.node_isometry(scheme.root, 5)
    assert np.allclose(iso.conj().T @ iso, np.eye(5), atol=1e-10)
    sup = (basis(5, 0) + basis(5, 1)) / np.sqrt(2)
    both = S.encode(scheme, sup).amplitudes
    parts = (S.encode(scheme, basis(5, 0)).amplitudes + S.encode(scheme, basis(5, 1)).amplitudes) / np.sqrt(2)
    assert np.allclose(both, parts)


def test_dense_and_sparse_encodings_agree():
    scheme = S.build_general(access.normalize(["ABC", "AD", "BD", "CD"]))
    sparse = S.sparse_encoding(scheme)
    dense = S.node_isometry(scheme.root, scheme.p)
    rebuilt = np.zeros_like(dense)
    for s in range(scheme.p):
        np.add.at(rebuilt[:, s], sparse.indices[s], sparse.amps[s])
    assert np.allclose(rebuilt, dense)
    indep = oracle.tree_encoding(scheme).dense()
    assert np.allclose(indep, dense)


def test_threshold_variants():
    mixed = S.build_threshold(3, 3, 5)
    assert mixed.n_leaves == 5 and mixed.environment == (3, 4)
    assert str(mixed.declared_structure) == "ABC"
    trivial = S.build_threshold(1, 1)
    assert isinstance(trivial.root, S.Leaf) and trivial.n_leaves == 1
    for k, n in [(1, 2), (2, 4), (3, 6)]:
        with pytest.raises(NoCloningError, match="violates no-cloning"):
            S.build_threshold(k, n)
    with pytest.raises(ConstructionError, match="need a prime >= 5"):
        S.build_threshold(3, 5, 3)
    with pytest.raises(ConstructionError):
        S.build_threshold(2, 3, 4)


def _authorized_roundtrip(scheme, secrets):
    for t in scheme.declared_structure.authorized_sets():
        for sec in secrets:
            state = S.encode(scheme, sec)
            out = S.decode(scheme, t, state)
            assert qsim.fidelity(StateVector((scheme.p,), sec), out.secret) > 1 - 1e-9
            assert out.register == min(scheme.party_leaves(t))


@pytest.mark.parametrize(
    "scheme",
    [
        S.build_threshold(2, 3),
        S.build_threshold(2, 2, 3),
        S.build_threshold(3, 4, 5),
        S.build_general(access.normalize(["ABC", "AD", "BD", "CD"])),
    ],
    ids=["2of3", "2of2", "3of4", "maximal"],
)
def test_decode_every_authorized_set(scheme):
    rng = np.random.default_rng(11)
    secrets = [basis(scheme.p, s) for s in range(scheme.p)] + [StateVector.random((scheme.p,), rng).amplitudes]
    _authorized_roundtrip(scheme, secrets)


def test_decode_leaves_outside_untouched():
    scheme = S.build_threshold(3, 5, 5)
    rng = np.random.default_rng(3)
    state = S.encode(scheme, StateVector.random((5,), rng))
    out = S.decode(scheme, {1, 2, 3}, state)
    before = qsim.partial_trace(state, [3, 4])
    after = qsim.partial_trace(out.state, [3, 4])
    assert qsim.trace_distance(before, after) < 1e-12


def test_decode_refuses_unauthorized():
    scheme = S.build_threshold(2, 3)
    state = S.encode(scheme, basis(3, 0))
    with pytest.raises(UnauthorizedError):
        S.decode(scheme, {2}, state)
    with pytest.raises(UnauthorizedError):
        S.local_logical_update(scheme, {1}, np.eye(3))


def test_general_trivial_completion_decodes_through_inner_schemes(monkeypatch):
    monkeypatch.setenv("QSS_MAX_DIM", str(5**9))
    scheme = S.build_general(access.normalize(["ABC", "AD"]), completion="trivial")
    assert scheme.p == 5 and scheme.n_leaves == 9
    assert scheme.share_map.count(1) == 3  # A holds three leaves
    rng = np.random.default_rng(5)
    sec = StateVector.random((5,), rng)
    out = S.decode(scheme, {1, 4}, S.encode(scheme, sec))
    assert qsim.fidelity(sec, out.secret) > 1 - 1e-9


def test_concatenation_reproduces_worked_structure():
    outer = S.build_threshold(2, 3, 5)
    abc = S.build_threshold(3, 3, 5)
    ad = S.relabel(S.build_threshold(2, 2, 5), {2: 4})
    a = S.build_threshold(1, 1)
    scheme = S.concatenate(outer, [abc, ad, a])
    assert scheme.declared_structure == access.normalize(["ABC", "AD"])
    assert scheme.p == 5
    rep = oracle.report(scheme)
    assert rep["verdict"] == "PASS" and rep["neither"] == 0


def test_concatenation_with_identity_inners_is_unchanged():
    outer = S.build_threshold(2, 3)
    same = S.concatenate(outer, [S.relabel(S.build_threshold(1, 1), {1: i}) for i in (1, 2, 3)])
    assert same == outer
    assert S.concatenate(outer, [None, None, None]) == outer


def test_concatenation_modulus_mismatch():
    with pytest.raises(DomainError, match="modulus mismatch"):
        S.concatenate(S.build_threshold(2, 3, 3), [S.build_threshold(3, 3, 5), None, None])


def test_purify_examples():
    mixed = S.build_threshold(3, 3, 5)
    pure = S.purify(mixed, 4)
    assert str(pure.declared_structure) == "AD OR BD OR CD OR ABC"
    assert access.is_maximal(pure.declared_structure) and pure.is_pure
    assert S.purify(S.build_threshold(2, 2, 3)).declared_structure == access.threshold_structure(2, 3)
    with pytest.warns(UserWarning, match="already pure"):
        assert S.purify(pure) is pure


def test_purify_then_discard_recovers_structure_and_states():
    mixed = S.build_threshold(3, 3, 5)
    back = S.discard(S.purify(mixed, 4), 4)
    assert back == mixed
    rng = np.random.default_rng(2)
    sec = StateVector.random((5,), rng)
    a = qsim.partial_trace(S.encode(mixed, sec), [0, 1, 2])
    b = qsim.partial_trace(S.encode(back, sec), [0, 1, 2])
    assert qsim.trace_distance(a, b) < 1e-12


def test_build_general_examples():
    maximal = access.normalize(["ABC", "AD", "BD", "CD"])
    scheme = S.build_general(maximal)
    assert scheme.share_map == (1, 2, 3, 4, 4)
    assert scheme == S.purify(S.build_threshold(3, 3, 5), 4)
    odd = S.build_general(access.normalize(["ABCD", "ADE", "BCD"]), completion="trivial")
    assert str(odd.declared_structure) == "ADE OR BCD"
    with pytest.raises(NoCloningError, match="complement AD is already authorized"):
        S.build_general(access.normalize(["ABC", "AD", "BC"]))
    with pytest.raises(ConstructionError, match="trivial completion impossible"):
        S.build_general(access.normalize(["AB", "ACD", "BCD"]), completion="trivial")
    with pytest.raises(ConstructionError, match="too small"):
        S.build_general(maximal, p=3)


def test_build_general_explicit_completion():
    s = access.normalize(["ABC", "AD"])
    given_cover = access.normalize(["A"], 4)
    a = S.build_general(s, completion=given_cover)
    b = S.build_general(s, completion="trivial")
    assert a == b
    with pytest.raises(ConstructionError):
        S.build_general(s, completion=access.normalize(["B"], 4))


@st.composite
def quantum_structures(draw):
    n = draw(st.integers(2, 4))
    sets = draw(st.lists(st.sets(st.integers(1, n), min_size=1), min_size=1, max_size=4))
    s = access.normalize(sets, n)
    return s


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(quantum_structures())
def test_build_general_realizes_any_quantum_structure(s):
    if not access.no_cloning_ok(s):
        with pytest.raises(NoCloningError):
            S.build_general(s)
        return
    scheme = S.build_general(s)
    assert S.tree_structure(scheme.root, scheme.parties) == s
    rep = oracle.report(scheme)
    assert rep["verdict"] == "PASS", rep["warnings"]


def test_local_logical_update_shift():
    scheme = S.build_threshold(2, 3)
    upd = S.local_logical_update(scheme, {1, 2}, S.logical_shift(3))
    assert upd.where == (0, 1)
    for s in range(3):
        state = S.encode(scheme, basis(3, s))
        moved = qsim.apply_on_subset(state, upd.matrix, upd.where)
        target = S.encode(scheme, basis(3, (s + 1) % 3))
        assert qsim.fidelity(target, moved) > 1 - 1e-12
        assert qsim.trace_distance(qsim.partial_trace(state, [2]), qsim.partial_trace(moved, [2])) < 1e-12


def test_local_logical_update_identity():
    scheme = S.build_threshold(3, 5, 5)
    upd = S.local_logical_update(scheme, {2, 4, 5}, np.eye(5))
    rng = np.random.default_rng(9)
    state = S.encode(scheme, StateVector.random((5,), rng))
    after = qsim.apply_on_subset(state, upd.matrix, upd.where)
    assert qsim.fidelity(state, after) > 1 - 1e-12


def test_swap_in_fresh_secret():
    scheme = S.build_threshold(2, 3)
    rng = np.random.default_rng(4)
    old = StateVector.random((3,), rng)
    new = StateVector.random((3,), rng)
    upd = S.local_logical_update(scheme, {1, 3}, S.swap_unitary(3), ancilla_dims=(3,))
    joint = S.encode(scheme, old).kron(new)
    after = qsim.apply_on_subset(joint, upd.matrix, upd.where)
    expected = S.encode(scheme, new).kron(old)
    assert qsim.fidelity(expected, after) > 1 - 1e-12


def test_descriptor_roundtrip_and_shape_checks():
    scheme = S.build_general(access.normalize(["ABC", "AD"]), completion="trivial")
    text = scheme.to_json()
    back = S.Scheme.from_json(text)
    assert back == scheme and back.to_json() == text
    data = json.loads(text)
    assert data["format"] == "qss/1" and data["kind"] == "scheme"
    assert data["environment"] == list(scheme.environment)
    bad = json.loads(text)
    bad["tree"]["children"].pop()
    with pytest.raises(FormatError):
        S.Scheme.from_dict(bad)
    bad = json.loads(text)
    bad["share_map"].append(1)
    with pytest.raises(FormatError):
        S.Scheme.from_dict(bad)
    with pytest.raises(FormatError):
        S.Scheme.from_json("{not json")
    with pytest.raises(FormatError):
        S.Scheme.from_dict({"format": "qss/0"})


def test_loader_accepts_semantically_broken_tree():
    data = S.build_threshold(2, 3).to_dict()
    data["tree"]["alphas"] = [0, 1, 1]
    broken = S.Scheme.from_dict(data)
    with pytest.raises(DomainError, match="not distinct"):
        S.decode(broken, {2, 3}, StateVector.basis((3, 3, 3), 0))


def test_relabel_rejects_merges():
    with pytest.raises(DomainError):
        S.relabel(S.build_threshold(2, 3), {1: 2})

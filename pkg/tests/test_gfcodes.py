from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qss import gfcodes as gf
from qss.errors import CapExceeded, DomainError, FormatError, NotFoundError

PRIMES = [2, 3, 5, 7, 11, 13]


def test_primality_and_next_prime():
    assert [x for x in range(20) if gf.is_prime(x)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert gf.next_prime(4) == 5
    assert gf.next_prime(7) == 7
    assert gf.next_prime(0) == 2
    with pytest.raises(DomainError):
        gf.check_modulus(9)


def test_field_ops():
    assert gf.inv(3, 7) == 5
    assert gf.mul(4, 5, 7) == 6
    assert gf.power(3, 4, 5) == 1
    with pytest.raises(DomainError):
        gf.inv(0, 5)


@given(st.sampled_from(PRIMES), st.data())
def test_inverse_is_inverse(p, data):
    a = data.draw(st.integers(1, p - 1))
    assert a * gf.inv(a, p) % p == 1


def test_rref_and_nullspace():
    mat, piv = gf.rref([[2, 4, 1], [1, 2, 4]], 5)
    assert piv == [0, 2]
    assert mat.tolist() == [[1, 2, 0], [0, 0, 1]]
    ns = gf.nullspace([[1, 1, 1, 1], [0, 1, 2, 3]], 5)
    assert ns.shape == (2, 4)
    assert not ((np.array([[1, 1, 1, 1], [0, 1, 2, 3]]) @ ns.T) % 5).any()


@settings(max_examples=50)
@given(st.sampled_from([3, 5, 7]), st.integers(1, 4), st.integers(1, 5), st.data())
def test_nullspace_rank_nullity(p, rows, cols, data):
    mat = np.array(data.draw(st.lists(st.lists(st.integers(0, p - 1), min_size=cols, max_size=cols), min_size=rows, max_size=rows)))
    ns = gf.nullspace(mat, p)
    assert gf.rank(mat, p) + ns.shape[0] == cols
    assert not ((mat @ ns.T) % p).any()


def test_solve_and_inverse():
    m = [[1, 2], [3, 4]]
    inv = gf.inverse_matrix(m, 7)
    assert ((np.array(m) @ inv) % 7).tolist() == [[1, 0], [0, 1]]
    with pytest.raises(DomainError):
        gf.solve([[1, 2], [2, 4]], [1, 1], 7)


def test_interpolation_roundtrip():
    coeffs = [3, 0, 4]
    pts = [(a, gf.evaluate(coeffs, a, 5)) for a in (0, 2, 4)]
    assert gf.interpolate(pts, 5).tolist() == coeffs
    with pytest.raises(DomainError):
        gf.interpolate([(1, 0), (1, 2)], 5)


@settings(max_examples=40)
@given(st.sampled_from([5, 7, 11]), st.data())
def test_interpolation_property(p, data):
    deg = data.draw(st.integers(0, 3))
    coeffs = data.draw(st.lists(st.integers(0, p - 1), min_size=deg + 1, max_size=deg + 1))
    alphas = data.draw(st.lists(st.integers(0, p - 1), min_size=deg + 1, max_size=deg + 1, unique=True))
    got = gf.interpolate([(a, gf.evaluate(coeffs, a, p)) for a in alphas], p)
    assert got.tolist() == coeffs


def test_poly_code_examples():
    d1 = gf.build_poly_code(4, 1, 5)
    assert d1.generator.tolist() == [[1, 1, 1, 1], [0, 1, 2, 3]]
    assert gf.min_distance(d1) == 3
    # weight-3 codeword of D_1 vanishing at coordinate 2
    assert gf.support_codeword(d1, [0, 1, 3]).tolist() == [3, 4, 0, 1]
    zero = gf.build_poly_code(4, -1, 5)
    assert zero.dimension == 0
    assert gf.min_distance(zero) == 5
    assert gf.dual_code(zero).dimension == 4


def test_poly_code_errors():
    with pytest.raises(DomainError):
        gf.build_poly_code(6, 1, 5)
    with pytest.raises(DomainError):
        gf.build_poly_code(3, 1, 5, alphas=[0, 1, 1])
    with pytest.raises(NotFoundError):
        gf.support_codeword(gf.build_poly_code(4, 1, 5), [0])


def test_dual_of_d1_matches_worked_parity_matrix():
    g_prime = [[2, 4, 1, 3], [3, 0, 1, 1]]
    dual = gf.dual_code(gf.build_poly_code(4, 1, 5))
    assert gf.same_row_space(dual.generator, g_prime, 5)


@pytest.mark.parametrize("p", [5, 7])
def test_mds_distances(p):
    for n in range(1, min(6, p) + 1):
        for r in range(n):
            code = gf.build_poly_code(n, r, p)
            assert gf.min_distance(code) == n - r
            assert gf.min_distance(gf.dual_code(code)) == r + 2


def test_lemma_rows_worked_example():
    rows = gf.lemma_rows(4, 2, 1, 5)
    assert rows.R.tolist() == [3, 0, 1, 1]
    assert rows.S.tolist() == [0, 1, 2, 3]
    assert rows.x_basis.tolist() == [[1, 2, 3, 4], [3, 0, 1, 1]]
    assert rows.z_basis.tolist() == [[1, 1, 1, 1], [0, 1, 2, 3]]
    assert rows.r_index == 1 and rows.s_index == 1


def _lemma_cases():
    for p in (5, 7):
        for n in range(2, min(6, p) + 1):
            for r in range(1, n):
                if 2 * r >= n:
                    yield n, r, p


@pytest.mark.parametrize("n,r,p", list(_lemma_cases()))
def test_lemma_postconditions(n, r, p):
    s = n - r - 1
    rows = gf.lemma_rows(n, r, s, p)
    big = gf.dual_code(gf.build_poly_code(n, r - 1, p))
    small = gf.dual_code(gf.build_poly_code(n, r, p))
    assert big.contains(rows.R) and not small.contains(rows.R)
    d_s = gf.build_poly_code(n, s, p)
    assert d_s.contains(rows.S)
    if s >= 1:
        assert not gf.build_poly_code(n, s - 1, p).contains(rows.S)
    assert gf.same_row_space(rows.x_basis, big.generator, p)
    # every weight-(r+1) word of D_{r-1}^perp carries a nonzero R component
    lead = rows.x_basis[:-1]
    for word in big.codewords():
        if np.count_nonzero(word) == r + 1:
            assert not gf.in_row_space(word, lead, p) if lead.size else True
    # any r+1 coordinates support a combination using R; any n-s use S
    for t in itertools.combinations(range(n), r + 1):
        lam, vec = gf.combination_supported_in(rows.x_basis, t, rows.r_index, p)
        assert lam[rows.r_index] == 1
        assert all(vec[j] == 0 for j in range(n) if j not in t)
    for t in itertools.combinations(range(n), n - s):
        lam, vec = gf.combination_supported_in(rows.z_basis, t, rows.s_index, p)
        assert all(vec[j] == 0 for j in range(n) if j not in t)


def test_lemma_rejects_bad_parameters():
    with pytest.raises(DomainError):
        gf.lemma_rows(4, 1, 2, 5)  # 2r < n
    with pytest.raises(DomainError):
        gf.lemma_rows(4, 2, 0, 5)  # s != n - r - 1


def test_code_serialization_roundtrip():
    code = gf.build_poly_code(4, 2, 5)
    back = gf.LinearCode.from_json(code.to_json())
    assert back.generator.tolist() == code.generator.tolist()
    assert back.label == "D_2"
    assert '"format": "qss/1"' in code.to_json()
    with pytest.raises(FormatError):
        gf.LinearCode.from_dict({"p": 5})


def test_codeword_cap():
    big = gf.build_poly_code(13, 7, 13)
    with pytest.raises(CapExceeded):
        big.codewords()

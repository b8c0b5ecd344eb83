import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import brute_inverse, oracle_rank, poly_mul
from qpir.finite_field import (
    ALPHA,
    ALPHA2,
    FieldElement,
    FieldMismatchError,
    field,
    inverse,
    min_extension,
    nullspace,
    phi,
    phi_inv,
    rank,
)

F4, F16 = field(1), field(2)


def el(spec, v):
    return FieldElement(spec, v)


def elements(L):
    return st.integers(0, 4**L - 1)


# -- GF(4) rules --------------------------------------------------------------


def test_alpha_plus_alpha_is_zero():
    assert (el(F4, ALPHA) + el(F4, ALPHA)).value == 0


def test_alpha_plus_one_is_alpha_squared():
    assert (el(F4, ALPHA) + el(F4, 1)).value == ALPHA2


def test_alpha_times_alpha_is_alpha_plus_one():
    assert (el(F4, ALPHA) * el(F4, ALPHA)).value == (el(F4, ALPHA) + el(F4, 1)).value


def test_inverse_of_alpha_is_alpha_squared():
    assert (el(F4, ALPHA) ** -1).value == ALPHA2
    assert (el(F4, ALPHA) * el(F4, ALPHA2)).value == 1


def test_inverse_of_one():
    assert (el(F16, 1) ** -1).value == 1


def test_x_times_one():
    x = el(F16, 4)
    assert (x * el(F16, 1)).value == 4


# -- oracle comparisons -------------------------------------------------------


@pytest.mark.parametrize("L", [1, 2, 3])
def test_multiplication_table_matches_schoolbook(L):
    spec = field(L)
    q = spec.q
    for a in range(q):
        for b in range(q):
            assert spec.mul_table[a, b] == poly_mul(a, b, L), (a, b)


def test_gf256_products_sample_match_schoolbook():
    spec = field(4)
    rng = np.random.default_rng(0)
    for a, b in rng.integers(0, 256, size=(2000, 2)):
        assert spec.mul_table[a, b] == poly_mul(int(a), int(b), 4)


@pytest.mark.parametrize("L", [1, 2])
def test_inverse_matches_exhaustive_search(L):
    spec = field(L)
    for a in range(1, spec.q):
        assert spec.inv_table[a] == brute_inverse(a, L)


def test_zero_has_no_inverse():
    with pytest.raises(ZeroDivisionError):
        el(F16, 0) ** -1
    with pytest.raises(ZeroDivisionError):
        F16.inv(0)


@pytest.mark.parametrize("L", [1, 2, 3, 4])
def test_primitive_element_generates_group(L):
    spec = field(L)
    seen, v = set(), 1
    for _ in range(spec.q - 1):
        seen.add(v)
        v = poly_mul(v, spec.primitive, L)
    assert v == 1 and len(seen) == spec.q - 1


# -- field axioms, exhaustive on GF(4) and GF(16) -----------------------------


@pytest.mark.parametrize("L", [1, 2])
def test_field_axioms_exhaustive(L):
    spec = field(L)
    M = spec.mul_table
    q = spec.q
    a, b, c = np.meshgrid(np.arange(q), np.arange(q), np.arange(q), indexing="ij")
    assert np.array_equal(M[M[a, b], c], M[a, M[b, c]])
    assert np.array_equal(M[a, b], M[b, a])
    assert np.array_equal(M[a, b ^ c], M[a, b] ^ M[a, c])
    assert np.all(M[np.arange(1, q), spec.inv_table[1:]] == 1)
    assert np.all(np.arange(q) ^ np.arange(q) == 0)


def test_mismatched_fields_raise():
    with pytest.raises(FieldMismatchError):
        el(F4, 1) + el(F16, 1)
    with pytest.raises(FieldMismatchError):
        el(F4, 1) * el(F16, 1)


def test_element_range_checked():
    with pytest.raises(ValueError):
        el(F4, 4)


def test_unsupported_degree():
    with pytest.raises(ValueError):
        field(5)


def test_min_extension():
    assert [min_extension(n) for n in (1, 4, 5, 16, 17, 64, 65, 256)] == [1, 1, 2, 2, 3, 3, 4, 4]


# -- phi ----------------------------------------------------------------------


def test_phi_zero():
    assert phi(el(field(3), 0)) == ((0, 0),) * 3


def test_phi_of_alpha_single_symbol():
    assert phi(el(F4, ALPHA)) == ((0, 1),)


@pytest.mark.parametrize("L", [1, 2])
def test_phi_round_trip_exhaustive(L):
    spec = field(L)
    for v in range(spec.q):
        assert phi_inv(phi(el(spec, v)), spec).value == v


def test_phi_inv_wrong_length():
    with pytest.raises(ValueError):
        phi_inv([(0, 1)], F16)


@given(elements(3), elements(3))
def test_phi_is_additive(a, b):
    spec = field(3)
    lhs = phi(el(spec, a) + el(spec, b))
    rhs = tuple((x[0] ^ y[0], x[1] ^ y[1]) for x, y in zip(phi(el(spec, a)), phi(el(spec, b))))
    assert lhs == rhs


@given(st.integers(1, 4), st.data())
def test_distributive_property(L, data):
    spec = field(L)
    a, b, c = (el(spec, data.draw(elements(L))) for _ in range(3))
    assert a * (b + c) == a * b + a * c


@given(st.integers(1, 4), st.data())
def test_division_undoes_multiplication(L, data):
    spec = field(L)
    a = el(spec, data.draw(elements(L)))
    b = el(spec, data.draw(st.integers(1, spec.q - 1)))
    assert (a * b) / b == a


# -- linear algebra -----------------------------------------------------------


@given(st.integers(1, 2), st.integers(1, 4), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_rank_matches_oracle(L, rows, cols, seed):
    spec = field(L)
    M = spec.random(np.random.default_rng(seed), (rows, cols))
    assert rank(spec, M) == oracle_rank(M, L)


@given(st.integers(1, 3), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_inverse_round_trip(L, n, seed):
    spec = field(L)
    M = spec.random(np.random.default_rng(seed), (n, n))
    if rank(spec, M) < n:
        with pytest.raises(np.linalg.LinAlgError):
            inverse(spec, M)
        return
    assert np.array_equal(spec.matmul(M, inverse(spec, M)), np.eye(n, dtype=np.int64))


@given(st.integers(1, 2), st.integers(1, 4), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_nullspace_is_orthogonal_and_complete(L, rows, cols, seed):
    spec = field(L)
    M = spec.random(np.random.default_rng(seed), (rows, cols))
    N = nullspace(spec, M)
    assert N.shape[0] == cols - rank(spec, M)
    if N.size:
        assert not spec.matmul(M, N.T).any()


def test_dot_and_matmul_agree():
    spec = field(2)
    rng = np.random.default_rng(3)
    u, v = spec.random(rng, 7), spec.random(rng, 7)
    assert spec.dot(u, v) == spec.matmul(u[None, :], v[:, None])[0, 0]


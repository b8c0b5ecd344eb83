from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import brute_min_distance, mat_mul, oracle_rank
from qpir.codes import (
    EnumerationBudgetError,
    LinearCode,
    dual,
    encode,
    from_rows,
    grs_generator,
    invert_on_information_set,
    is_information_set,
    lrc_generator,
    min_distance,
    restrict,
    rs_4_2_self_dual,
    singleton_like_bound,
    spc_3_2,
)
from qpir.finite_field import field

F4, F16 = field(1), field(2)
A, A2 = 2, 3


def test_self_dual_rs_code_is_a_grs_instance():
    assert grs_generator(F4, 4, 2).same_code(rs_4_2_self_dual())


def test_self_dual_code_generator_rows():
    assert rs_4_2_self_dual().G.tolist() == [[1, 0, A2, A], [0, 1, A, A2]]


def test_self_dual_rs_code_is_orthogonal_to_itself():
    G = rs_4_2_self_dual().G
    assert not F4.matmul(G, G.T).any()
    assert dual(rs_4_2_self_dual()).same_code(rs_4_2_self_dual())


def test_self_dual_encoding_formula():
    code = rs_4_2_self_dual()
    for x1 in range(4):
        for x2 in range(4):
            expect = [x1, x2, F4.mul(A2, x1) ^ F4.mul(A, x2), F4.mul(A, x1) ^ F4.mul(A2, x2)]
            assert encode([x1, x2], code).tolist() == expect


def test_parity_check_code():
    code = spc_3_2()
    assert encode([1, 2], code).tolist() == [1, 2, 3]
    assert min_distance(code) == 2


def test_full_code_has_distance_one_and_zero_dual():
    code = grs_generator(F16, 5, 5)
    assert min_distance(code) == 1
    assert dual(code).k == 0


def test_repetition_code_distance():
    assert min_distance(from_rows(F16, [[1] * 6])) == 6


def test_rs42_distance():
    assert min_distance(rs_4_2_self_dual()) == 3


def test_grs_5_2_over_gf16():
    code = grs_generator(F16, 5, 2)
    assert min_distance(code) == 4 == brute_min_distance(code.G, 2)


def test_grs_7_3_over_gf16():
    assert min_distance(grs_generator(F16, 7, 3)) == 5


def test_dual_of_5_2_is_exhaustively_orthogonal():
    code = grs_generator(F16, 5, 2)
    D = dual(code)
    assert D.k == 3
    primal = encode(np.array(np.meshgrid(*[np.arange(16)] * 2)).reshape(2, -1).T, code)
    duals = encode(np.array(np.meshgrid(*[np.arange(16)] * 3)).reshape(3, -1).T, D)
    prods = F16.matmul(primal, duals.T)
    assert not prods.any()
    assert min_distance(D) == 3


def test_grs_validation():
    with pytest.raises(ValueError):
        grs_generator(F4, 3, 4)
    with pytest.raises(ValueError):
        grs_generator(F4, 5, 2)
    with pytest.raises(ValueError):
        grs_generator(F4, 3, 2, eval_points=[0, 1, 1])
    with pytest.raises(ValueError):
        grs_generator(F4, 3, 2, col_multipliers=[1, 0, 1])


def test_dependent_rows_rejected():
    with pytest.raises(ValueError):
        from_rows(F4, [[1, 1], [1, 1]])


def test_encode_length_mismatch():
    with pytest.raises(ValueError):
        encode([1, 2, 3], spc_3_2())


def test_distance_budget():
    with pytest.raises(EnumerationBudgetError):
        min_distance(grs_generator(field(3), 20, 5))


@pytest.mark.parametrize("n,k", [(4, 2), (5, 3), (6, 3), (8, 4), (7, 2)])
def test_every_k_subset_is_an_information_set(n, k):
    code = grs_generator(field(2), n, k)
    for I in combinations(range(n), k):
        assert is_information_set(code, I)


def test_information_set_size_checked():
    with pytest.raises(ValueError):
        is_information_set(spc_3_2(), [0])


def test_restrict_mds_stays_mds():
    code = grs_generator(F16, 6, 3)
    for pos in combinations(range(6), 4):
        sub = restrict(code, pos)
        assert (sub.n, sub.k) == (4, 3)
        assert min_distance(sub) == 2


def test_restrict_to_everything_is_identity():
    code = grs_generator(F16, 6, 3)
    assert restrict(code, range(6)).same_code(code)


def test_restrict_out_of_range():
    with pytest.raises(IndexError):
        restrict(spc_3_2(), [0, 3])


@given(st.integers(1, 2), st.integers(2, 7), st.data())
def test_invert_on_information_set_round_trip(L, n, data):
    spec = field(L)
    n = min(n, spec.q)
    k = data.draw(st.integers(1, n))
    code = grs_generator(spec, n, k)
    I = sorted(data.draw(st.permutations(range(n)))[:k])
    x = spec.random(np.random.default_rng(data.draw(st.integers(0, 2**32 - 1))), (3, k))
    y = encode(x, code)
    M = invert_on_information_set(code, I)
    assert np.array_equal(spec.matmul(y[:, I], M), x)
    assert np.array_equal(mat_mul(code.G[:, I], M, L), np.eye(k, dtype=np.int64))


def test_systematic_inverse_is_identity():
    assert np.array_equal(invert_on_information_set(rs_4_2_self_dual(), [0, 1]), np.eye(2, dtype=np.int64))


@given(st.integers(1, 2), st.integers(2, 8), st.data())
def test_dual_orthogonality_and_dimension(L, n, data):
    spec = field(L)
    n = min(n, spec.q)
    k = data.draw(st.integers(1, n - 1))
    code = grs_generator(spec, n, k)
    D = dual(code)
    assert D.k == n - k
    assert not spec.matmul(code.G, D.G.T).any()
    assert oracle_rank(D.G, L) == n - k


def test_text_round_trip():
    code = grs_generator(field(3), 7, 3)
    again = LinearCode.from_text(code.to_text())
    assert np.array_equal(again.G, code.G) and again.spec == code.spec
    with pytest.raises(ValueError):
        LinearCode.from_text("nonsense")


# -- locally repairable codes -------------------------------------------------

LRC_CASES = [
    (2, 8, 4, 2, 3),
    (2, 12, 4, 2, 3),
    (2, 9, 4, 2, 2),
    (2, 15, 6, 3, 3),
    (1, 4, 2, 1, 2),
    (2, 6, 2, 2, 2),
]


@pytest.mark.parametrize("L,n,k,r,rho", LRC_CASES)
def test_lrc_meets_singleton_like_bound(L, n, k, r, rho):
    code, profile = lrc_generator(field(L), n, k, r, rho)
    assert (code.n, code.k) == (n, k)
    assert min_distance(code) == singleton_like_bound(n, k, r, rho)


@pytest.mark.parametrize("L,n,k,r,rho", LRC_CASES)
def test_lrc_local_groups_are_mds(L, n, k, r, rho):
    code, profile = lrc_generator(field(L), n, k, r, rho)
    covered = sorted(p for grp in profile.partition for p in grp)
    assert covered == list(range(n))
    for grp in profile.partition:
        local = restrict(code, grp)
        assert (local.n, local.k) == (r + rho - 1, r)
        assert min_distance(local) == rho


def test_lrc_8_4_bound_value():
    assert singleton_like_bound(8, 4, 2, 3) == 3


def test_lrc_trivial_locality():
    code, profile = lrc_generator(F16, 6, 4, 2, 1)
    assert profile.group_size == 2
    assert min_distance(code) == singleton_like_bound(6, 4, 2, 1)


def test_lrc_puncturing_leaves_information_set():
    code, profile = lrc_generator(F16, 8, 4, 2, 3)
    # drop rho-1 = 2 positions from each group
    for a in combinations(profile.partition[0], 2):
        for b in combinations(profile.partition[1], 2):
            keep = [p for p in range(8) if p not in a + b]
            assert is_information_set(code, keep)


def test_lrc_overfull_group_is_not_an_information_set():
    code, _ = lrc_generator(F16, 8, 4, 2, 3)
    # r+1 = 3 positions inside one local [4,2] group have rank 2
    assert not is_information_set(code, [0, 1, 2, 4])


def test_lrc_parameter_checks():
    with pytest.raises(ValueError):
        lrc_generator(F16, 8, 3, 2, 3)
    with pytest.raises(ValueError):
        lrc_generator(F16, 9, 4, 2, 3)
    with pytest.raises(ValueError):
        lrc_generator(F16, 4, 4, 2, 3)

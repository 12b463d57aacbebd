import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lattice_pvss.shamir import (
    ThresholdError,
    eval_poly,
    interpolates,
    is_valid_share_vector,
    lagrange_at_zero,
    parity_matrix,
    sss_combine,
    sss_share,
    syndrome,
)

DESK_P = 4280433918413770177


def test_constant_polynomial(rng):
    sv, _ = sss_share(9, 5, 0, 11, rng)
    assert sv.shares == (9,) * 5


def test_forced_polynomial(rng):
    sv, poly = sss_share(3, 2, 1, 7, rng, poly=[3, 2])
    assert sv.shares == (5, 0)
    assert poly == [3, 2]


def test_hand_lagrange():
    assert lagrange_at_zero([1, 2], 7) == [2, 6]
    assert sss_combine([1, 2], [5, 0], 2, 1, 7) == 3


def test_too_few_shares_refused():
    with pytest.raises(ThresholdError):
        sss_combine([1, 2], [5, 0], 5, 2, 11)


def test_bad_indices():
    with pytest.raises(ValueError):
        sss_combine([1, 1, 2], [1, 1, 1], 5, 1, 11)
    with pytest.raises(ValueError):
        sss_combine([0, 1], [1, 1], 5, 1, 11)


def test_share_preconditions(rng):
    with pytest.raises(ThresholdError):
        sss_share(1, 11, 2, 11, rng)
    with pytest.raises(ThresholdError):
        sss_share(1, 3, 3, 11, rng)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, DESK_P - 1), st.integers(2, 20), st.data())
def test_subsets_agree(secret, n, data):
    t = data.draw(st.integers(0, n - 1))
    seed = data.draw(st.integers(0, 2**32 - 1))
    sv, _ = sss_share(secret, n, t, DESK_P, np.random.default_rng(seed))
    for _ in range(2):
        idx = sorted(data.draw(st.lists(st.integers(1, n), min_size=t + 1, max_size=n, unique=True)))
        assert sss_combine(idx, [sv.shares[i - 1] for i in idx], n, t, DESK_P) == secret


def test_hand_parity_column():
    pm = parity_matrix(3, 1, 7)
    assert [int(x) for x in pm.H[:, 0]] == [4, 6, 4]
    for a, b in itertools.product(range(7), repeat=2):
        vec = [(a + b * i) % 7 for i in (1, 2, 3)]
        assert is_valid_share_vector(vec, pm)


def test_vacuous_parity():
    pm = parity_matrix(4, 3, 11)
    assert pm.H.shape == (4, 0) and pm.is_vacuous
    assert is_valid_share_vector([1, 2, 3, 4], pm)


def test_codewords_valid_and_perturbations_invalid(rng):
    n, t, p = 5, 2, 11
    pm = parity_matrix(n, t, p)
    for coeffs in itertools.product(range(p), repeat=t + 1):
        vec = [eval_poly(coeffs, i, p) for i in range(1, n + 1)]
        assert is_valid_share_vector(vec, pm)
        j = int(rng.integers(0, n))
        vec[j] = (vec[j] + 1) % p
        assert not is_valid_share_vector(vec, pm)


def test_random_vectors_mostly_invalid(rng):
    pm = parity_matrix(5, 2, 11)
    bad = sum(not is_valid_share_vector(list(rng.integers(0, 11, 5)), pm) for _ in range(1000))
    # 11^3 of 11^5 vectors are codewords: about 8 in 1000 expected
    assert bad >= 970


def test_zero_and_sharing_are_valid(rng):
    pm = parity_matrix(8, 3, DESK_P)
    assert is_valid_share_vector([0] * 8, pm)
    sv, _ = sss_share(123, 8, 3, DESK_P, rng)
    assert is_valid_share_vector(sv, pm)
    shares = list(sv.shares)
    shares[5] += 1
    assert not is_valid_share_vector(shares, pm)


def test_syndrome_batches_rows(rng):
    pm = parity_matrix(8, 3, DESK_P)
    rows = [list(sss_share(int(s), 8, 3, DESK_P, rng)[0].shares) for s in range(4)]
    rows[2][0] += 1
    syn = syndrome(np.array(rows, dtype=object), pm)
    assert syn.shape == (4, 4)
    assert [bool(r.any()) for r in syn] == [False, False, True, False]
    with pytest.raises(ValueError):
        syndrome([1, 2, 3], pm)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 12), min_size=6, max_size=6), st.integers(0, 2))
def test_interpolation_matches_parity(vec, t):
    assert interpolates(vec, t, 13) == is_valid_share_vector(vec, parity_matrix(6, t, 13))

import numpy as np
import pytest

from lattice_pvss.harness import forged_key, off_code_sharing, wrong_reveal
from lattice_pvss.modmath import uniform_residues
from lattice_pvss.params import validate_params
from lattice_pvss.pke import Ciphertext
from lattice_pvss.pvss import (
    pvss_combine,
    pvss_dec,
    pvss_dec_ver,
    pvss_keygen,
    pvss_keyver,
    pvss_setup,
    pvss_setup_from_seed,
    pvss_share,
    pvss_share_ver,
)
from lattice_pvss.shamir import ThresholdError

from conftest import DESK


@pytest.fixture(scope="module")
def pp(desk):
    return pvss_setup_from_seed(desk, b"pvss-tests")


@pytest.fixture(scope="module")
def parties(pp):
    rng = np.random.default_rng(31)
    return [pvss_keygen(pp, rng) for _ in range(pp.params.n)]


@pytest.fixture(scope="module")
def dealt(pp, parties):
    rng = np.random.default_rng(32)
    secret = 1234567890123456789
    pks = [kp.pk for kp, _ in parties]
    cts, proof = pvss_share(pp, pks, secret, rng)
    return secret, pks, cts, proof


def test_setup_from_seed(desk, pp):
    again = pvss_setup_from_seed(desk, b"pvss-tests")
    assert again.A == pp.A
    assert pvss_setup_from_seed(desk, b"other").A != pp.A
    assert pp.crs_key.A is pp.crs_enc.A is pp.crs_dec.A
    assert validate_params(pp.params) == []


def test_setup_from_request():
    a = pvss_setup(DESK, np.random.default_rng(1))
    b = pvss_setup(DESK, np.random.default_rng(1))
    assert a.A == b.A and a.crs_dec.A == a.crs_key.A


def test_keys_verify(pp, parties):
    for kp, proof in parties:
        assert pvss_keyver(pp, kp.pk, proof)


def test_key_proofs_are_bound_to_keys(pp, parties):
    (kp0, proof0), (kp1, proof1) = parties[:2]
    assert not pvss_keyver(pp, kp0.pk, proof1)
    assert not pvss_keyver(pp, kp1.pk, proof0)


def test_forged_keys_rejected(pp, rng):
    # each forgery guesses 16 challenge bits; acceptance probability 2^-16
    assert not any(pvss_keyver(pp, *forged_key(pp, rng)) for _ in range(10))


def test_malformed_key_rejected(pp, parties):
    kp, proof = parties[0]
    assert not pvss_keyver(pp, kp.pk[:-1], proof)
    bad = kp.pk.copy()
    bad[0] = pp.params.q
    assert not pvss_keyver(pp, bad, proof)


def test_sharing_verifies_and_reconstructs(pp, parties, dealt):
    secret, pks, cts, proof = dealt
    assert pvss_share_ver(pp, pks, cts, proof)
    rng = np.random.default_rng(5)
    shares = [pvss_dec(pp, kp, ct, rng)[0] for (kp, _), ct in zip(parties, cts)]
    assert pvss_combine(pp, [1, 2, 3, 4], shares[:4], 8) == secret
    assert pvss_combine(pp, [5, 6, 7, 8], shares[4:], 8) == secret
    assert pvss_combine(pp, [2, 4, 6], [shares[1], shares[3], shares[5]], 8) is None


def test_tampered_ciphertext_rejected(pp, dealt, rng):
    _, pks, cts, proof = dealt
    for _ in range(3):
        i = int(rng.integers(0, len(cts)))
        bit = 1 << int(rng.integers(0, 120))
        changed = list(cts)
        if rng.integers(0, 2):
            c1 = cts[i].c1.copy()
            c1[0] = (int(c1[0]) ^ bit) % pp.params.q
            changed[i] = Ciphertext(c1, cts[i].c2)
        else:
            changed[i] = Ciphertext(cts[i].c1, (int(cts[i].c2) ^ bit) % pp.params.q)
        assert not pvss_share_ver(pp, pks, changed, proof)


def test_sharing_checks_shapes(pp, dealt):
    _, pks, cts, proof = dealt
    assert not pvss_share_ver(pp, pks[:-1], cts, proof)
    assert not pvss_share_ver(pp, list(reversed(pks)), cts, proof)


def test_off_code_dealer_rejected(pp, dealt, rng):
    _, pks, _, _ = dealt
    cts, proof = off_code_sharing(pp, pks, 77, rng)
    assert not pvss_share_ver(pp, pks, cts, proof)


def test_sharing_needs_more_than_t_parties(pp, dealt, rng):
    _, pks, _, _ = dealt
    with pytest.raises(ThresholdError):
        pvss_share(pp, pks[: pp.params.t], 1, rng)
    with pytest.raises(ValueError):
        pvss_share(pp, pks, pp.params.p, rng)


def test_smaller_qualified_set(pp, parties, rng):
    pks = [kp.pk for kp, _ in parties[:5]]
    cts, proof = pvss_share(pp, pks, 99, rng)
    assert pvss_share_ver(pp, pks, cts, proof)


def test_reveals(pp, parties, dealt, rng):
    _, _, cts, _ = dealt
    (kp0, _), (kp1, _) = parties[:2]
    share, proof = pvss_dec(pp, kp0, cts[0], rng)
    assert pvss_dec_ver(pp, kp0.pk, cts[0], share, proof)
    assert not pvss_dec_ver(pp, kp0.pk, cts[0], (share + 1) % pp.params.p, proof)
    # replayed for another participant
    assert not pvss_dec_ver(pp, kp1.pk, cts[1], share, proof)
    assert not pvss_dec_ver(pp, kp0.pk, cts[0], pp.params.p + share, proof)


def test_wrong_reveal_with_honest_prover_rejected(pp, parties, dealt, rng):
    _, _, cts, _ = dealt
    kp, _ = parties[2]
    claimed, proof = wrong_reveal(pp, kp, cts[2], rng)
    assert not pvss_dec_ver(pp, kp.pk, cts[2], claimed, proof)


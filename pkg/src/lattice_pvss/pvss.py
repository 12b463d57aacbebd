"""Publicly verifiable secret sharing built from LWE encryption and the three proofs.

Flow: setup, per-party key generation with a key proof, a dealer that
encrypts Shamir shares to the qualified parties with one sharing proof, per-party
decryption with a decryption proof, and reconstruction from verified shares.
Proofs travel in their wire encoding (bytes).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .crs import Crs, Language, Mode, crs_gen
from .modmath import ConfigurationError, ZqMatrix, uniform_residues
from .nizk import nizk_prove, nizk_verify, proof_to_bytes
from .params import ParamRequest, ParamSet, derive_params, validate_params
from .pke import Ciphertext, KeyPair, PkeParams, pke_dec, pke_enc, pke_keygen
from .shamir import ParityMatrix, ThresholdError, parity_matrix, sss_combine, sss_share
from .sigma_dec import DecStatement, DecWitness
from .sigma_key import KeyStatement, KeyWitness
from .sigma_share import ShareStatement, ShareWitness


@dataclass(frozen=True, eq=False)
class PvssPublicParams:
    params: ParamSet
    crs_key: Crs
    crs_enc: Crs
    crs_dec: Crs
    _parity: dict = field(default_factory=dict, repr=False)

    @property
    def A(self) -> ZqMatrix:
        return self.crs_key.A

    @cached_property
    def pke(self) -> PkeParams:
        return PkeParams.from_params(self.params)

    def parity(self, n: int) -> ParityMatrix:
        if n not in self._parity:
            self._parity[n] = parity_matrix(n, self.params.t, self.params.p)
        return self._parity[n]


def _with_matrix(ps: ParamSet, a: ZqMatrix) -> PvssPublicParams:
    crs = Crs(a, ps, Mode.REAL, Language.KEY)
    return PvssPublicParams(ps, crs, crs.for_language(Language.ENC), crs.for_language(Language.DEC))


def pvss_setup(req: ParamRequest | ParamSet, rng: np.random.Generator) -> PvssPublicParams:
    """Derive (or accept) parameters and sample one uniform matrix shared by every CRS."""
    ps = derive_params(req) if isinstance(req, ParamRequest) else req
    crs = crs_gen(ps, Mode.REAL, rng)
    return _with_matrix(ps, crs.A)


def pvss_setup_from_seed(ps: ParamSet, seed: bytes) -> PvssPublicParams:
    """Transparent setup: anyone holding the seed recomputes the same matrix."""
    problems = validate_params(ps)
    if problems:
        raise ConfigurationError(f"invalid parameters: {problems}")
    expand = np.random.default_rng(int.from_bytes(hashlib.sha256(b"lattice-pvss/setup" + seed).digest(), "big"))
    a = ZqMatrix(uniform_residues((ps.v, ps.u), ps.q, expand), ps.q)
    return _with_matrix(ps, a)


# ---------------------------------------------------------------- keys


def pvss_keygen(pp: PvssPublicParams, rng: np.random.Generator) -> tuple[KeyPair, bytes]:
    kp = pke_keygen(pp.A, pp.pke, rng)
    proof = nizk_prove(pp.crs_key, KeyStatement(kp.pk), KeyWitness(kp.sk, kp.e), Language.KEY, rng)
    return kp, proof_to_bytes(pp.crs_key, proof)


def pvss_keyver(pp: PvssPublicParams, pk, proof: bytes) -> bool:
    pk = np.asarray(pk, dtype=object)
    if pk.shape != (pp.params.u,) or np.any(pk < 0) or np.any(pk >= pp.params.q):
        return False
    return nizk_verify(pp.crs_key, KeyStatement(pk), proof, Language.KEY)


# ---------------------------------------------------------------- sharing


def share_statement(pp: PvssPublicParams, pks, cts: list[Ciphertext]) -> ShareStatement:
    return ShareStatement(
        pp.params.t,
        np.stack([np.asarray(b, dtype=object) for b in pks]),
        np.stack([np.asarray(c.c1, dtype=object) for c in cts]),
        np.array([int(c.c2) for c in cts], dtype=object),
    )


def encrypt_shares(pp: PvssPublicParams, pks, shares, rng: np.random.Generator):
    """Encrypt share i under key i; returns the ciphertexts and the prover witness."""
    pairs = [pke_enc(pp.A, b, int(m), pp.pke, rng) for b, m in zip(pks, shares)]
    cts = [ct for ct, _ in pairs]
    wit = ShareWitness(np.stack([w.r for _, w in pairs]), np.array([w.e for _, w in pairs], dtype=np.int64),
                       np.array([int(m) for m in shares], dtype=object))
    return cts, wit


def pvss_share(pp: PvssPublicParams, pks, secret: int, rng: np.random.Generator) -> tuple[list[Ciphertext], bytes]:
    """Share `secret` among the qualified keys (re-enumerated 1..n')."""
    ps = pp.params
    n = len(pks)
    if n <= ps.t:
        raise ThresholdError(f"{n} qualified parties cannot hold a threshold-{ps.t} sharing")
    if not 0 <= secret < ps.p:
        raise ValueError("secret must lie in [0, p)")
    sv, _ = sss_share(secret, n, ps.t, ps.p, rng)
    cts, wit = encrypt_shares(pp, pks, sv.shares, rng)
    proof = nizk_prove(pp.crs_enc, share_statement(pp, pks, cts), wit, Language.ENC, rng)
    # the encryption randomness is not needed after the proof
    wit.r.fill(0)
    wit.e.fill(0)
    return cts, proof_to_bytes(pp.crs_enc, proof)


def pvss_share_ver(pp: PvssPublicParams, pks, cts: list[Ciphertext], proof: bytes) -> bool:
    ps = pp.params
    if len(pks) != len(cts) or len(cts) <= ps.t:
        return False
    for c in cts:
        c1 = np.asarray(c.c1, dtype=object)
        if c1.shape != (ps.v,) or np.any(c1 < 0) or np.any(c1 >= ps.q) or not 0 <= int(c.c2) < ps.q:
            return False
    return nizk_verify(pp.crs_enc, share_statement(pp, pks, cts), proof, Language.ENC)


# ---------------------------------------------------------------- decryption


def pvss_dec(pp: PvssPublicParams, kp: KeyPair, ct: Ciphertext, rng: np.random.Generator) -> tuple[int, bytes]:
    res = pke_dec(pp.A, kp.pk, kp.sk, ct, pp.pke)
    stmt = DecStatement(kp.pk, ct.c1, ct.c2, res.m)
    proof = nizk_prove(pp.crs_dec, stmt, DecWitness(kp.sk, kp.e, res.f), Language.DEC, rng)
    return int(res.m), proof_to_bytes(pp.crs_dec, proof)


def pvss_dec_ver(pp: PvssPublicParams, pk, ct: Ciphertext, share: int, proof: bytes) -> bool:
    if not 0 <= int(share) < pp.params.p:
        return False
    stmt = DecStatement(np.asarray(pk, dtype=object), np.asarray(ct.c1, dtype=object), int(ct.c2), int(share))
    return nizk_verify(pp.crs_dec, stmt, proof, Language.DEC)


def pvss_combine(pp: PvssPublicParams, indices, shares, n: int) -> int | None:
    """Secret from shares at qualified indices (1..n'), or None when too few are given."""
    if len(indices) <= pp.params.t:
        return None
    return sss_combine(indices, shares, n, pp.params.t, pp.params.p)


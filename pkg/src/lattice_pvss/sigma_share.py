"""Proof that n ciphertexts encrypt a valid Shamir sharing.

Statement: public keys b_i and ciphertexts (c1_i, c2_i) for i = 1..n.
Witness: encryption randomness r_i, scalar noise e_i and the shares m_i.
The masked shares are the evaluations of a fresh degree-t polynomial, so the
revealed t-vector lies in the code for both challenges.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .crs import Crs
from .gadget import invert_lwe_batch
from .modmath import (
    center_lift,
    decode_residues,
    decode_signed,
    int_matmul,
    l2_norm_sq,
    residues_to_bytes,
    shrink,
    signed_to_bytes,
    stack_ints,
    to_obj,
)
from .sampler import RejectionConfig, rejection_filter, sample_matrix
from .shamir import ParityMatrix, eval_poly, parity_matrix, random_poly, syndrome


class StatementError(ValueError):
    """A statement key could not be inverted, so the statement precondition fails."""


@dataclass(frozen=True)
class ShareStatement:
    t: int
    pks: np.ndarray   # (n, u) residues
    c1: np.ndarray    # (n, v) residues
    c2: np.ndarray    # (n,) residues

    @property
    def n(self) -> int:
        return self.pks.shape[0]


@dataclass(frozen=True)
class ShareWitness:
    r: np.ndarray  # (n, u)
    e: np.ndarray  # (n,)
    m: np.ndarray  # (n,) shares mod p


@dataclass(frozen=True)
class ShareState:
    v: np.ndarray  # (reps, n, u)
    k: np.ndarray  # (reps, n)
    w: np.ndarray  # (reps, n) code vector mod p


@dataclass(frozen=True)
class ShareFirst:
    a1: np.ndarray  # (reps, n, v)
    a2: np.ndarray  # (reps, n)

    def rep(self, j: int) -> "ShareFirst":
        return ShareFirst(self.a1[j : j + 1], self.a2[j : j + 1])


@dataclass(frozen=True)
class ShareResponse:
    z: np.ndarray  # (reps, n, u)
    h: np.ndarray  # (reps, n)
    t: np.ndarray  # (reps, n) mod p

    def gaussian_part(self) -> np.ndarray:
        return np.concatenate([self.z, self.h[:, :, None]], axis=2).ravel()

    def rep(self, j: int) -> "ShareResponse":
        return ShareResponse(self.z[j : j + 1], self.h[j : j + 1], self.t[j : j + 1])


@lru_cache(maxsize=64)
def _parity(n: int, t: int, p: int) -> ParityMatrix:
    return parity_matrix(n, t, p)


def rejection_config(crs: Crs, reps: int, n: int) -> RejectionConfig:
    ps = crs.params
    return RejectionConfig.for_dim(ps.sigma_enc, reps * n * (ps.u + 1))


def gate_sq(crs: Crs) -> int:
    ps = crs.params
    return (ps.u + 1) * ps.sigma_enc**2


def _code_vectors(reps: int, n: int, t: int, p: int, rng: np.random.Generator) -> np.ndarray:
    out = np.empty((reps, n), dtype=object)
    for j in range(reps):
        poly = random_poly(int(rng.integers(0, 2**62)) % p, t, p, rng)
        out[j] = [eval_poly(poly, i, p) for i in range(1, n + 1)]
    return out


def _pk_products(pks: np.ndarray, z: np.ndarray) -> np.ndarray:
    """(reps, n): b_i . z_{j,i} over the integers."""
    reps, n, _ = z.shape
    out = np.empty((reps, n), dtype=object)
    for i in range(n):
        out[:, i] = int_matmul(z[:, i, :], to_obj(pks[i]))
    return out


def _a_products(crs: Crs, z: np.ndarray) -> np.ndarray:
    """(reps, n, v): A z_{j,i} mod q."""
    reps, n, u = z.shape
    flat = crs.A.mul_right(z.reshape(reps * n, u).T)  # (v, reps*n)
    return flat.T.reshape(reps, n, -1)


def check_witness(crs: Crs, stmt: ShareStatement, wit: ShareWitness) -> bool:
    ps = crs.params
    q, p = ps.q, ps.p
    for i in range(stmt.n):
        if l2_norm_sq(wit.r[i]) > ps.enc_r_sq or int(wit.e[i]) ** 2 > ps.enc_e_sq:
            return False
    c1 = crs.A.mul_right(np.asarray(wit.r).T).T
    if np.any(c1 != to_obj(stmt.c1) % q):
        return False
    c2 = (_pk_products(stmt.pks, np.asarray(wit.r)[None])[0] + to_obj(wit.e) + p * to_obj(wit.m)) % q
    if np.any(c2 != to_obj(stmt.c2) % q):
        return False
    return not np.any(syndrome(wit.m, _parity(stmt.n, stmt.t, p)))


def share_commit(crs: Crs, stmt: ShareStatement, rng: np.random.Generator,
                 reps: int = 1) -> tuple[ShareState, ShareFirst]:
    ps = crs.params
    n, q, p = stmt.n, ps.q, ps.p
    mask = sample_matrix(ps.sigma_enc, (reps, n, ps.u + 1), rng)
    v, k = mask[:, :, : ps.u], mask[:, :, ps.u]
    w = _code_vectors(reps, n, stmt.t, p, rng)
    a1 = _a_products(crs, v)
    a2 = (_pk_products(stmt.pks, v) + to_obj(k) + p * w) % q
    return ShareState(v, k, w), ShareFirst(a1, a2)


def share_response(state: ShareState, c, wit: ShareWitness, p: int) -> ShareResponse:
    c = np.asarray(c, dtype=np.int64).reshape(-1)
    z = state.v + c[:, None, None] * np.asarray(wit.r)[None]
    h = state.k + c[:, None] * np.asarray(wit.e)[None]
    t = (state.w + np.outer(c, to_obj(wit.m))) % p
    return ShareResponse(z, h, t)


def share_shift(c, wit: ShareWitness) -> np.ndarray:
    c = np.asarray(c, dtype=np.int64).reshape(-1)
    re = np.concatenate([np.asarray(wit.r), np.asarray(wit.e).reshape(-1, 1)], axis=1)
    return (c[:, None, None] * re[None]).ravel()


def share_respond(state: ShareState, c, wit: ShareWitness, cfg: RejectionConfig,
                  rng: np.random.Generator, p: int) -> ShareResponse | None:
    resp = share_response(state, c, wit, p)
    kept = rejection_filter(resp.gaussian_part(), share_shift(c, wit), cfg, rng)
    return None if kept is None else resp


def verify_linear(crs: Crs, stmt: ShareStatement, first: ShareFirst, c, resp: ShareResponse) -> bool:
    """Shape, range, norm and modular identities; no parity check."""
    ps = crs.params
    q, p, n = ps.q, ps.p, stmt.n
    c = np.asarray(c, dtype=np.int64).reshape(-1)
    reps = c.shape[0]
    if (first.a1.shape != (reps, n, ps.v) or first.a2.shape != (reps, n)
            or resp.z.shape != (reps, n, ps.u) or resp.h.shape != (reps, n) or resp.t.shape != (reps, n)):
        return False
    if np.any((c != 0) & (c != 1)):
        return False
    tt = to_obj(resp.t)
    if np.any(tt < 0) or np.any(tt >= p):
        return False
    gate = gate_sq(crs)
    h_obj = to_obj(resp.h)
    for j in range(reps):
        for i in range(n):
            if l2_norm_sq(resp.z[j, i]) + int(h_obj[j, i]) ** 2 > gate:
                return False
    lhs1 = _a_products(crs, resp.z)
    rhs1 = (to_obj(first.a1) + c[:, None, None] * to_obj(stmt.c1)[None]) % q
    if np.any(lhs1 != rhs1):
        return False
    lhs2 = (_pk_products(stmt.pks, resp.z) + h_obj + p * tt) % q
    rhs2 = (to_obj(first.a2) + np.outer(c, to_obj(stmt.c2))) % q
    return bool(np.all(lhs2 == rhs2))


def verify_parity(stmt: ShareStatement, resp: ShareResponse, p: int) -> bool:
    pm = _parity(stmt.n, stmt.t, p)
    return not np.any(syndrome(resp.t, pm))


def share_verify(crs: Crs, stmt: ShareStatement, first: ShareFirst, c, resp: ShareResponse) -> bool:
    return verify_linear(crs, stmt, first, c, resp) and verify_parity(stmt, resp, crs.p)


def _statement_keys(crs: Crs, stmt: ShareStatement) -> np.ndarray:
    tm = crs.trapdoor
    if tm is None:
        raise ValueError("BadChallenge needs a trapdoored CRS")
    inv = invert_lwe_batch(tm, stmt.pks)
    if any(x is None for x in inv):
        raise StatementError("a statement key is outside the relaxed key language")
    return np.stack([x[0] for x in inv])


def split_plaintexts(crs: Crs, keys: np.ndarray, a1: np.ndarray, a2: np.ndarray):
    """Per-party (f, t) with a2 - s.a1 = p*t + f, f centered mod p."""
    q, p = crs.q, crs.p
    n = keys.shape[0]
    x = np.empty(n, dtype=object)
    for i in range(n):
        x[i] = (int(a2[i]) - int(np.dot(to_obj(keys[i]), to_obj(a1[i])))) % q
    f = center_lift(x % p, p)
    t = ((x - f) // p) % p
    return f, t


def share_bad_challenge(crs: Crs, stmt: ShareStatement, first: ShareFirst) -> int | None:
    ps = crs.params
    keys = _statement_keys(crs, stmt)
    pm = _parity(stmt.n, stmt.t, ps.p)
    a1 = to_obj(first.a1.reshape(stmt.n, ps.v))
    a2 = to_obj(first.a2.reshape(stmt.n))
    for c in (0, 1):
        f, t = split_plaintexts(crs, keys, a1 + c * to_obj(stmt.c1), a2 + c * to_obj(stmt.c2))
        if any(2 * abs(int(x)) > ps.enc_star_f for x in f) or np.any(syndrome(t, pm)):
            return 1 - c
    return None


def share_simulate(crs: Crs, stmt: ShareStatement, c, rng: np.random.Generator):
    ps = crs.params
    q, p, n = ps.q, ps.p, stmt.n
    c = np.asarray(c, dtype=np.int64).reshape(-1)
    reps = c.shape[0]
    cfg = rejection_config(crs, reps, n)
    mask = sample_matrix(ps.sigma_enc, (reps, n, ps.u + 1), rng)
    if rejection_filter(mask.ravel(), np.zeros(mask.size, dtype=np.int64), cfg, rng) is None:
        return None
    z, h = mask[:, :, : ps.u], mask[:, :, ps.u]
    t = _code_vectors(reps, n, stmt.t, p, rng)
    resp = ShareResponse(z, h, t)
    a1 = (_a_products(crs, z) - c[:, None, None] * to_obj(stmt.c1)[None]) % q
    a2 = (_pk_products(stmt.pks, z) + to_obj(h) + p * t - np.outer(c, to_obj(stmt.c2))) % q
    return ShareFirst(a1, a2), c, resp


def share_extract(crs: Crs, stmt: ShareStatement, first: ShareFirst,
                  resp0: ShareResponse, resp1: ShareResponse):
    """(dz, dh, dt) from accepting answers to both challenges.

    A dz = c1_i, b_i.dz + dh + p*dt = c2_i (mod q), and dt lies in the code.
    """
    if not (share_verify(crs, stmt, first, [0], resp0) and share_verify(crs, stmt, first, [1], resp1)):
        raise ValueError("extraction needs two accepting transcripts")
    dz = to_obj(resp1.z[0]) - to_obj(resp0.z[0])
    dh = to_obj(resp1.h[0]) - to_obj(resp0.h[0])
    dt = (to_obj(resp1.t[0]) - to_obj(resp0.t[0])) % crs.p
    return dz, dh, dt


def in_sound_language(crs: Crs, stmt: ShareStatement, key_noise: np.ndarray, dz, dh, dt) -> bool:
    """Check the extracted instance: each plaintext noise f'_i = dh_i + e_i.dz_i is
    within the relaxed bound and the shares dt form a codeword."""
    ps = crs.params
    q, p = ps.q, ps.p
    for i in range(stmt.n):
        if (crs.A.mul_right(shrink(dz[i])) != to_obj(stmt.c1[i]) % q).any():
            return False
        lhs = (int(np.dot(to_obj(stmt.pks[i]), to_obj(dz[i]))) + int(dh[i]) + p * int(dt[i])) % q
        if lhs != int(stmt.c2[i]) % q:
            return False
        f = int(dh[i]) + int(np.dot(to_obj(key_noise[i]), to_obj(dz[i])))
        if abs(f) > ps.enc_star_f:
            return False
    return not np.any(syndrome(dt, _parity(stmt.n, stmt.t, p)))


# ---------------------------------------------------------------- encoding


def statement_bytes(crs: Crs, stmt: ShareStatement) -> bytes:
    w, q = crs.modulus.width, crs.q
    head = stmt.n.to_bytes(4, "big") + stmt.t.to_bytes(4, "big")
    return head + b"".join(residues_to_bytes(to_obj(x) % q, w) for x in (stmt.pks, stmt.c1, stmt.c2))


def first_bytes(crs: Crs, first: ShareFirst, j: int) -> bytes:
    w = crs.modulus.width
    return residues_to_bytes(first.a1[j], w) + residues_to_bytes(first.a2[j], w)


def response_bytes(crs: Crs, resp: ShareResponse, j: int) -> bytes:
    w, q = crs.modulus.width, crs.q
    zh = np.concatenate([resp.z[j], resp.h[j][:, None]], axis=1)
    return signed_to_bytes(zh, q, w) + residues_to_bytes(to_obj(resp.t[j]) % q, w)


def first_from_bytes(crs: Crs, chunks: list[bytes], n: int) -> ShareFirst:
    v = crs.params.v
    rows = [decode_residues(c, crs.modulus.width, crs.q) for c in chunks]
    if any(r.shape != (n * v + n,) for r in rows):
        raise ValueError("first message has the wrong length")
    a1 = np.stack([r[: n * v].reshape(n, v) for r in rows])
    a2 = np.stack([r[n * v :] for r in rows])
    return ShareFirst(a1, a2)


def response_from_bytes(crs: Crs, chunks: list[bytes], n: int) -> ShareResponse:
    u, q, w = crs.params.u, crs.q, crs.modulus.width
    split = n * (u + 1) * w
    if any(len(c) != split + n * w for c in chunks):
        raise ValueError("response has the wrong length")
    zh = stack_ints([decode_signed(c[:split], w, q).reshape(n, u + 1) for c in chunks])
    t = np.stack([decode_residues(c[split:], w, q) for c in chunks])
    return ShareResponse(zh[:, :, :u], zh[:, :, u], t)

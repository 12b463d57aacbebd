"""Proof of correct decryption under a registered key.

Statement: public key b, ciphertext (c1, c2) and the claimed plaintext m.
Witness: short (s, e, f) with b = s^T A + e^T and s.c1 + f = c2 - p*m (mod q).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crs import Crs
from .gadget import invert_lwe_batch
from .modmath import (
    center_lift,
    decode_residues,
    decode_signed,
    l2_norm_sq,
    residues_to_bytes,
    shrink,
    signed_to_bytes,
    stack_ints,
    to_obj,
)
from .sampler import RejectionConfig, rejection_filter, sample_matrix


@dataclass(frozen=True)
class DecStatement:
    b: np.ndarray
    c1: np.ndarray
    c2: int
    m: int

    def target(self, p: int, q: int) -> int:
        """c2 - p*m mod q, the value s.c1 + f must hit."""
        return (int(self.c2) - p * int(self.m)) % q


@dataclass(frozen=True)
class DecWitness:
    s: np.ndarray
    e: np.ndarray
    f: int


@dataclass(frozen=True)
class DecState:
    r: np.ndarray   # (reps, v)
    k: np.ndarray   # (reps, u)
    g: np.ndarray   # (reps,)


@dataclass(frozen=True)
class DecFirst:
    d: np.ndarray  # (reps, u)
    h: np.ndarray  # (reps,)

    def rep(self, j: int) -> "DecFirst":
        return DecFirst(self.d[j : j + 1], self.h[j : j + 1])


@dataclass(frozen=True)
class DecResponse:
    z: np.ndarray   # (reps, v)
    t: np.ndarray   # (reps, u)
    ts: np.ndarray  # (reps,)

    def gaussian_part(self) -> np.ndarray:
        return np.concatenate([self.z, self.t, self.ts.reshape(-1, 1)], axis=1).ravel()

    def rep(self, j: int) -> "DecResponse":
        return DecResponse(self.z[j : j + 1], self.t[j : j + 1], self.ts[j : j + 1])


def rejection_config(crs: Crs, reps: int) -> RejectionConfig:
    ps = crs.params
    return RejectionConfig.for_dim(ps.sigma_dec, reps * (ps.u + ps.v + 1))


def gate_sq(crs: Crs) -> int:
    ps = crs.params
    return (ps.u + ps.v + 1) * ps.sigma_dec**2


def _c1_products(z, c1) -> np.ndarray:
    return to_obj(z).dot(to_obj(c1))


def check_witness(crs: Crs, stmt: DecStatement, wit: DecWitness) -> bool:
    ps = crs.params
    q = ps.q
    if (l2_norm_sq(wit.s) > ps.dec_s**2 or l2_norm_sq(wit.e) > ps.dec_e**2
            or abs(int(wit.f)) > ps.dec_f):
        return False
    if np.any((crs.A.mul_left(wit.s) + to_obj(wit.e)) % q != to_obj(stmt.b) % q):
        return False
    return (int(_c1_products(wit.s, stmt.c1)) + int(wit.f)) % q == stmt.target(ps.p, q)


def dec_commit(crs: Crs, stmt: DecStatement, rng: np.random.Generator,
               reps: int = 1) -> tuple[DecState, DecFirst]:
    ps = crs.params
    mask = sample_matrix(ps.sigma_dec, (reps, ps.v + ps.u + 1), rng)
    r, k, g = mask[:, : ps.v], mask[:, ps.v : ps.v + ps.u], mask[:, -1]
    d = (crs.A.mul_left(r) + to_obj(k)) % ps.q
    h = (_c1_products(r, stmt.c1) + to_obj(g)) % ps.q
    return DecState(r, k, g), DecFirst(d, h)


def dec_response(state: DecState, c, wit: DecWitness) -> DecResponse:
    c = np.asarray(c, dtype=np.int64).reshape(-1)
    return DecResponse(state.r + c[:, None] * np.asarray(wit.s),
                       state.k + c[:, None] * np.asarray(wit.e),
                       state.g + c * int(wit.f))


def dec_shift(c, wit: DecWitness) -> np.ndarray:
    c = np.asarray(c, dtype=np.int64).reshape(-1, 1)
    sef = np.concatenate([np.asarray(wit.s), np.asarray(wit.e), [int(wit.f)]]).astype(np.int64)
    return (c * sef).ravel()


def dec_respond(state: DecState, c, wit: DecWitness, cfg: RejectionConfig,
                rng: np.random.Generator) -> DecResponse | None:
    resp = dec_response(state, c, wit)
    kept = rejection_filter(resp.gaussian_part(), dec_shift(c, wit), cfg, rng)
    return None if kept is None else resp


def dec_verify(crs: Crs, stmt: DecStatement, first: DecFirst, c, resp: DecResponse) -> bool:
    ps = crs.params
    q = ps.q
    c = np.asarray(c, dtype=np.int64).reshape(-1)
    reps = c.shape[0]
    if (first.d.shape != (reps, ps.u) or first.h.shape != (reps,) or resp.z.shape != (reps, ps.v)
            or resp.t.shape != (reps, ps.u) or resp.ts.shape != (reps,)):
        return False
    if np.any((c != 0) & (c != 1)):
        return False
    gate = gate_sq(crs)
    ts = to_obj(resp.ts)
    for j in range(reps):
        if l2_norm_sq(resp.z[j]) + l2_norm_sq(resp.t[j]) + int(ts[j]) ** 2 > gate:
            return False
    lhs = (crs.A.mul_left(resp.z) + to_obj(resp.t)) % q
    if np.any(lhs != (to_obj(first.d) + np.outer(c, to_obj(stmt.b))) % q):
        return False
    lhs2 = (_c1_products(resp.z, stmt.c1) + ts) % q
    rhs2 = (to_obj(first.h) + to_obj(c) * stmt.target(ps.p, q)) % q
    return bool(np.all(lhs2 == rhs2))


def dec_bad_challenge(crs: Crs, stmt: DecStatement, first: DecFirst) -> int | None:
    """Like the key version, with the scalar remainder centered mod q.

    Centering mod q keeps the p*(m - m') term of a wrong claim visible, so a
    false plaintext shows up as a huge scalar.
    """
    tm = crs.trapdoor
    if tm is None:
        raise ValueError("BadChallenge needs a trapdoored CRS")
    ps = crs.params
    q, bound = ps.q, ps.dec_star
    b = to_obj(stmt.b)
    d = to_obj(np.asarray(first.d).reshape(-1))
    h = int(np.asarray(first.h).reshape(-1)[0])
    target = stmt.target(ps.p, q)
    inv = invert_lwe_batch(tm, np.stack([d % q, (d + b) % q]))
    for c, sol in enumerate(inv):
        if sol is None:
            return 1 - c
        z, t = sol
        ts = center_lift((h + c * target - int(_c1_products(z, stmt.c1))) % q, q)
        if 4 * l2_norm_sq(z) > bound**2 or 4 * l2_norm_sq(t) > bound**2 or 2 * abs(int(ts)) > bound:
            return 1 - c
    return None


def dec_simulate(crs: Crs, stmt: DecStatement, c, rng: np.random.Generator):
    ps = crs.params
    q = ps.q
    c = np.asarray(c, dtype=np.int64).reshape(-1)
    reps = c.shape[0]
    cfg = rejection_config(crs, reps)
    mask = sample_matrix(ps.sigma_dec, (reps, ps.v + ps.u + 1), rng)
    if rejection_filter(mask.ravel(), np.zeros(mask.size, dtype=np.int64), cfg, rng) is None:
        return None
    resp = DecResponse(mask[:, : ps.v], mask[:, ps.v : ps.v + ps.u], mask[:, -1])
    d = (crs.A.mul_left(resp.z) + to_obj(resp.t) - np.outer(c, to_obj(stmt.b))) % q
    h = (_c1_products(resp.z, stmt.c1) + to_obj(resp.ts) - to_obj(c) * stmt.target(ps.p, q)) % q
    return DecFirst(d, h), c, resp


def dec_extract(crs: Crs, stmt: DecStatement, first: DecFirst, resp0: DecResponse, resp1: DecResponse):
    if not (dec_verify(crs, stmt, first, [0], resp0) and dec_verify(crs, stmt, first, [1], resp1)):
        raise ValueError("extraction needs two accepting transcripts")
    s = to_obj(resp1.z[0]) - to_obj(resp0.z[0])
    e = to_obj(resp1.t[0]) - to_obj(resp0.t[0])
    f = int(resp1.ts[0]) - int(resp0.ts[0])
    return s, e, f


def in_sound_language(crs: Crs, stmt: DecStatement, s, e, f) -> bool:
    ps = crs.params
    q, bound = ps.q, ps.dec_star
    if l2_norm_sq(s) > bound**2 or l2_norm_sq(e) > bound**2 or abs(int(f)) > bound:
        return False
    if np.any((crs.A.mul_left(shrink(s)) + to_obj(e)) % q != to_obj(stmt.b) % q):
        return False
    return (int(_c1_products(s, stmt.c1)) + int(f)) % q == stmt.target(ps.p, q)


# ---------------------------------------------------------------- encoding


def statement_bytes(crs: Crs, stmt: DecStatement) -> bytes:
    w, q = crs.modulus.width, crs.q
    scalars = np.array([int(stmt.c2) % q, int(stmt.m) % q], dtype=object)
    return b"".join(residues_to_bytes(to_obj(x) % q, w) for x in (stmt.b, stmt.c1, scalars))


def first_bytes(crs: Crs, first: DecFirst, j: int) -> bytes:
    w = crs.modulus.width
    return residues_to_bytes(first.d[j], w) + residues_to_bytes(first.h[j : j + 1], w)


def response_bytes(crs: Crs, resp: DecResponse, j: int) -> bytes:
    vec = np.concatenate([resp.z[j], resp.t[j], resp.ts[j : j + 1]])
    return signed_to_bytes(vec, crs.q, crs.modulus.width)


def first_from_bytes(crs: Crs, chunks: list[bytes]) -> DecFirst:
    u = crs.params.u
    rows = [decode_residues(c, crs.modulus.width, crs.q) for c in chunks]
    if any(r.shape != (u + 1,) for r in rows):
        raise ValueError("first message has the wrong length")
    stacked = np.stack(rows)
    return DecFirst(stacked[:, :u], stacked[:, u])


def response_from_bytes(crs: Crs, chunks: list[bytes]) -> DecResponse:
    ps = crs.params
    rows = [decode_signed(c, crs.modulus.width, ps.q) for c in chunks]
    if any(r.shape != (ps.v + ps.u + 1,) for r in rows):
        raise ValueError("response has the wrong length")
    vec = stack_ints(rows)
    return DecResponse(vec[:, : ps.v], vec[:, ps.v : ps.v + ps.u], vec[:, -1])

"""Proof of a well-formed public key: knowledge of short (s, e) with b = s^T A + e^T.

All functions work on a batch of parallel repetitions; arrays carry the
repetition index on their first axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crs import Crs
from .gadget import invert_lwe_batch
from .modmath import decode_residues, decode_signed, l2_norm_sq, residues_to_bytes, signed_to_bytes, stack_ints, to_obj
from .sampler import RejectionConfig, rejection_filter, sample_matrix


@dataclass(frozen=True)
class KeyStatement:
    b: np.ndarray


@dataclass(frozen=True)
class KeyWitness:
    s: np.ndarray
    e: np.ndarray


@dataclass(frozen=True)
class KeyState:
    r: np.ndarray  # (reps, v)
    f: np.ndarray  # (reps, u)


@dataclass(frozen=True)
class KeyResponse:
    z: np.ndarray  # (reps, v)
    t: np.ndarray  # (reps, u)

    def gaussian_part(self) -> np.ndarray:
        return np.concatenate([self.z, self.t], axis=1).ravel()

    def rep(self, j: int) -> "KeyResponse":
        return KeyResponse(self.z[j : j + 1], self.t[j : j + 1])


def rejection_config(crs: Crs, reps: int) -> RejectionConfig:
    ps = crs.params
    return RejectionConfig.for_dim(ps.sigma_key, reps * (ps.u + ps.v))


def gate_sq(crs: Crs) -> int:
    ps = crs.params
    return (ps.u + ps.v) * ps.sigma_key**2


def check_witness(crs: Crs, stmt: KeyStatement, wit: KeyWitness) -> bool:
    ps = crs.params
    if l2_norm_sq(wit.s) > ps.key_s_sq or l2_norm_sq(wit.e) > ps.key_e_sq:
        return False
    b = (crs.A.mul_left(wit.s) + to_obj(wit.e)) % ps.q
    return bool(np.all(b == to_obj(stmt.b) % ps.q))


def key_commit(crs: Crs, rng: np.random.Generator, reps: int = 1) -> tuple[KeyState, np.ndarray]:
    ps = crs.params
    mask = sample_matrix(ps.sigma_key, (reps, ps.v + ps.u), rng)
    r, f = mask[:, : ps.v], mask[:, ps.v :]
    d = (crs.A.mul_left(r) + to_obj(f)) % ps.q
    return KeyState(r, f), d


def key_response(state: KeyState, c, wit: KeyWitness) -> KeyResponse:
    c = np.asarray(c, dtype=np.int64).reshape(-1, 1)
    return KeyResponse(state.r + c * wit.s, state.f + c * wit.e)


def key_shift(c, wit: KeyWitness) -> np.ndarray:
    c = np.asarray(c, dtype=np.int64).reshape(-1, 1)
    se = np.concatenate([wit.s, wit.e])
    return (c * se).ravel()


def key_respond(state: KeyState, c, wit: KeyWitness, cfg: RejectionConfig,
                rng: np.random.Generator) -> KeyResponse | None:
    resp = key_response(state, c, wit)
    kept = rejection_filter(resp.gaussian_part(), key_shift(c, wit), cfg, rng)
    return None if kept is None else resp


def key_verify(crs: Crs, stmt: KeyStatement, d, c, resp: KeyResponse) -> bool:
    ps = crs.params
    c = np.asarray(c, dtype=np.int64).reshape(-1)
    d = np.atleast_2d(np.asarray(d, dtype=object))
    reps = c.shape[0]
    if d.shape != (reps, ps.u) or resp.z.shape != (reps, ps.v) or resp.t.shape != (reps, ps.u):
        return False
    if np.any((c != 0) & (c != 1)):
        return False
    gate = gate_sq(crs)
    for j in range(reps):
        if l2_norm_sq(resp.z[j]) + l2_norm_sq(resp.t[j]) > gate:
            return False
    lhs = (crs.A.mul_left(resp.z) + to_obj(resp.t)) % ps.q
    rhs = (d + np.outer(c, to_obj(stmt.b))) % ps.q
    return bool(np.all(lhs == rhs))


def key_bad_challenge(crs: Crs, b, d) -> int | None:
    """The only challenge that could still be answered, or None when both could.

    Inversion failure counts as a norm violation for that challenge.
    """
    tm = crs.trapdoor
    if tm is None:
        raise ValueError("BadChallenge needs a trapdoored CRS")
    q = crs.q
    b = to_obj(b)
    d = to_obj(np.asarray(d).reshape(-1))
    targets = np.stack([d % q, (d + b) % q])
    gate = gate_sq(crs)
    for c, inv in enumerate(invert_lwe_batch(tm, targets)):
        if inv is None or l2_norm_sq(inv[0]) + l2_norm_sq(inv[1]) > gate:
            return 1 - c
    return None


def key_simulate(crs: Crs, stmt: KeyStatement, c, rng: np.random.Generator):
    """Transcript (d, c, response) for the given challenges, or None with probability 1 - 1/M."""
    ps = crs.params
    c = np.asarray(c, dtype=np.int64).reshape(-1)
    reps = c.shape[0]
    cfg = rejection_config(crs, reps)
    mask = sample_matrix(ps.sigma_key, (reps, ps.v + ps.u), rng)
    # released with probability exactly 1/M
    if rejection_filter(mask.ravel(), np.zeros(mask.size, dtype=np.int64), cfg, rng) is None:
        return None
    resp = KeyResponse(mask[:, : ps.v], mask[:, ps.v :])
    d = (crs.A.mul_left(resp.z) + to_obj(resp.t) - np.outer(c, to_obj(stmt.b))) % ps.q
    return d, c, resp


def key_extract(crs: Crs, stmt: KeyStatement, d, resp0: KeyResponse, resp1: KeyResponse):
    """Witness from accepting answers to both challenges on one first message.

    Returns (s, e) with b = s^T A + e^T and both norms within the relaxed bound.
    """
    if not (key_verify(crs, stmt, d, [0], resp0) and key_verify(crs, stmt, d, [1], resp1)):
        raise ValueError("extraction needs two accepting transcripts")
    s = to_obj(resp1.z[0]) - to_obj(resp0.z[0])
    e = to_obj(resp1.t[0]) - to_obj(resp0.t[0])
    return s, e


def in_sound_language(crs: Crs, stmt: KeyStatement, s, e) -> bool:
    ps = crs.params
    bound = ps.key_star**2
    if l2_norm_sq(s) > bound or l2_norm_sq(e) > bound:
        return False
    return bool(np.all((crs.A.mul_left(s) + to_obj(e)) % ps.q == to_obj(stmt.b) % ps.q))


# ---------------------------------------------------------------- encoding


def statement_bytes(crs: Crs, stmt: KeyStatement) -> bytes:
    return residues_to_bytes(to_obj(stmt.b) % crs.q, crs.modulus.width)


def first_bytes(crs: Crs, d, j: int) -> bytes:
    return residues_to_bytes(np.asarray(d)[j], crs.modulus.width)


def response_bytes(crs: Crs, resp: KeyResponse, j: int) -> bytes:
    vec = np.concatenate([resp.z[j], resp.t[j]])
    return signed_to_bytes(vec, crs.q, crs.modulus.width)


def first_from_bytes(crs: Crs, chunks: list[bytes]) -> np.ndarray:
    ps = crs.params
    rows = [decode_residues(c, crs.modulus.width, ps.q) for c in chunks]
    if any(r.shape != (ps.u,) for r in rows):
        raise ValueError("first message has the wrong length")
    return np.stack(rows)


def response_from_bytes(crs: Crs, chunks: list[bytes]) -> KeyResponse:
    ps = crs.params
    rows = [decode_signed(c, crs.modulus.width, ps.q) for c in chunks]
    if any(r.shape != (ps.v + ps.u,) for r in rows):
        raise ValueError("response has the wrong length")
    vec = stack_ints(rows)
    return KeyResponse(vec[:, : ps.v], vec[:, ps.v :])


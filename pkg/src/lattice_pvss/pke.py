"""LWE encryption with modulus q = p^2 and a scalar decryption witness.

A message m in Z_p is carried as p*m inside c2, so decryption recovers both
m and the leftover noise f with c2 - s^T c1 = p*m + f (mod q).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modmath import (
    ConfigurationError,
    Modulus,
    ZqMatrix,
    center_lift,
    dot_mod,
    l2_norm_sq,
    to_obj,
    uniform_residues,
)
from .params import ParamSet
from .sampler import GaussianParams, sample_bounded


@dataclass(frozen=True)
class PkeParams:
    modulus: Modulus
    u: int
    v: int
    alpha_q: int
    beta_q: int
    r: int
    key_s_sq: int
    key_e_sq: int
    enc_r_sq: int
    enc_e_sq: int
    key_star_s: int
    key_star_e: int

    @classmethod
    def from_params(cls, ps: ParamSet) -> "PkeParams":
        return cls(Modulus(ps.p), ps.u, ps.v, ps.alpha_q, ps.beta_q, ps.r, ps.key_s_sq,
                   ps.key_e_sq, ps.enc_r_sq, ps.enc_e_sq, ps.key_star, ps.key_star)

    @property
    def p(self) -> int:
        return self.modulus.p

    @property
    def q(self) -> int:
        return self.modulus.q


@dataclass(frozen=True)
class KeyPair:
    pk: np.ndarray  # b, residues mod q
    sk: np.ndarray  # s, short
    e: np.ndarray   # key noise, kept as a proof witness


@dataclass(frozen=True)
class Ciphertext:
    c1: np.ndarray
    c2: int


@dataclass(frozen=True)
class EncWitness:
    r: np.ndarray
    e: int


@dataclass(frozen=True)
class DecResult:
    m: int
    f: int


def pke_setup(pp: PkeParams, rng: np.random.Generator) -> ZqMatrix:
    """Uniform public matrix A in Z_q^{v x u}."""
    return ZqMatrix(uniform_residues((pp.v, pp.u), pp.q, rng), pp.q)


def _check_matrix(a: ZqMatrix, pp: PkeParams) -> None:
    if a.shape != (pp.v, pp.u) or a.q != pp.q:
        raise ConfigurationError(f"matrix shape {a.shape} does not match v={pp.v}, u={pp.u}")


def pke_keygen(a: ZqMatrix, pp: PkeParams, rng: np.random.Generator) -> KeyPair:
    _check_matrix(a, pp)
    s = sample_bounded(GaussianParams(pp.alpha_q, pp.v), pp.key_s_sq, rng)
    e = sample_bounded(GaussianParams(pp.alpha_q, pp.u), pp.key_e_sq, rng)
    b = (a.mul_left(s) + to_obj(e)) % pp.q
    return KeyPair(b, s, e)


def pke_keyver(a: ZqMatrix, b, s, pp: PkeParams) -> bool:
    """||center(b - s^T A)|| <= B*_e and ||s|| <= B*_s."""
    s = np.asarray(s)
    if s.shape != (pp.v,):
        return False
    e = center_lift(to_obj(b) - a.mul_left(s), pp.q)
    return l2_norm_sq(e) <= pp.key_star_e**2 and l2_norm_sq(s) <= pp.key_star_s**2


def pke_enc(a: ZqMatrix, b, m: int, pp: PkeParams, rng: np.random.Generator) -> tuple[Ciphertext, EncWitness]:
    if not 0 <= m < pp.p:
        raise ValueError(f"message {m} outside [0, p)")
    r = sample_bounded(GaussianParams(pp.r, pp.u), pp.enc_r_sq, rng)
    e = int(sample_bounded(GaussianParams(pp.beta_q, 1), pp.enc_e_sq, rng)[0])
    return encrypt_with(a, b, m, r, e, pp), EncWitness(r, e)


def encrypt_with(a: ZqMatrix, b, m: int, r, e: int, pp: PkeParams) -> Ciphertext:
    """Deterministic encryption under explicit randomness (r, e)."""
    c1 = a.mul_right(np.asarray(r))
    c2 = (dot_mod(b, r, pp.q) + int(e) + pp.p * int(m)) % pp.q
    return Ciphertext(c1, c2)


def pke_dec(a: ZqMatrix, b, s, ct: Ciphertext, pp: PkeParams) -> DecResult:
    """Total decryption: returns (m, f) with c2 - s^T c1 = p*m + f (mod q)."""
    p, q = pp.p, pp.q
    x = (int(ct.c2) - dot_mod(s, ct.c1, q)) % q
    f = center_lift(x % p, p)
    m = ((x - f) // p) % p
    assert (p * m + f - x) % q == 0
    return DecResult(m, f)

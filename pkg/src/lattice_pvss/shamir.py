"""Shamir sharing over Z_p at evaluation points 1..n, plus the dual-code check.

A vector of n values is a valid sharing of some degree-<=t polynomial iff it
is orthogonal to every column of the parity matrix H, whose column c (from 1)
holds v_i * i^(c-1) with v_i = prod_{j != i} 1/(j - i).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ThresholdError(ValueError):
    """Too few shares (or too many parties) for the requested threshold."""


@dataclass(frozen=True)
class ShareVector:
    shares: tuple[int, ...]
    n: int
    t: int
    p: int

    def __post_init__(self) -> None:
        if len(self.shares) != self.n:
            raise ValueError("share count must equal n")
        if self.t + 1 > self.n:
            raise ValueError("need t + 1 <= n")


@dataclass(frozen=True)
class ParityMatrix:
    H: np.ndarray          # n x (n - t - 1), object entries mod p
    v_coeffs: tuple[int, ...]
    n: int
    t: int
    p: int

    @property
    def is_vacuous(self) -> bool:
        """n = t + 1: the dual code is trivial and every vector is valid."""
        return self.H.shape[1] == 0


def eval_poly(coeffs, x: int, p: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + int(c)) % p
    return acc


def random_poly(secret: int, t: int, p: int, rng: np.random.Generator) -> list[int]:
    return [int(secret) % p] + [int(rng.integers(0, p)) if p < 2**63 else _big_uniform(p, rng)
                                for _ in range(t)]


def _big_uniform(p: int, rng: np.random.Generator) -> int:
    width = (p.bit_length() + 7) // 8 + 8
    return int.from_bytes(rng.bytes(width), "little") % p


def sss_share(secret: int, n: int, t: int, p: int, rng: np.random.Generator,
              poly: list[int] | None = None) -> tuple[ShareVector, list[int]]:
    if n >= p:
        raise ThresholdError(f"n={n} must be below p={p}")
    if t >= n:
        raise ThresholdError("t must be below n")
    coeffs = poly if poly is not None else random_poly(secret, t, p, rng)
    shares = tuple(eval_poly(coeffs, i, p) for i in range(1, n + 1))
    return ShareVector(shares, n, t, p), list(coeffs)


def lagrange_at_zero(indices, p: int) -> list[int]:
    """lambda_{i,S} = prod_{j in S, j != i} j / (j - i) mod p."""
    idx = [int(i) for i in indices]
    out = []
    for i in idx:
        num, den = 1, 1
        for j in idx:
            if j != i:
                num = num * j % p
                den = den * (j - i) % p
        out.append(num * pow(den, -1, p) % p)
    return out


def sss_combine(indices, shares, n: int, t: int, p: int) -> int:
    idx = [int(i) for i in indices]
    if len(idx) <= t:
        raise ThresholdError(f"{len(idx)} shares cannot reconstruct a threshold-{t} secret")
    if len(set(idx)) != len(idx) or any(not 1 <= i <= n for i in idx):
        raise ValueError("indices must be distinct and in 1..n")
    lam = lagrange_at_zero(idx, p)
    return sum(l * int(s) for l, s in zip(lam, shares)) % p


def parity_matrix(n: int, t: int, p: int) -> ParityMatrix:
    if n >= p:
        raise ThresholdError(f"n={n} must be below p={p}")
    if t + 1 > n:
        raise ThresholdError("need t + 1 <= n")
    v = []
    for i in range(1, n + 1):
        den = 1
        for j in range(1, n + 1):
            if j != i:
                den = den * (j - i) % p
        v.append(pow(den, -1, p))
    cols = n - t - 1
    h = np.empty((n, cols), dtype=object)
    for i in range(1, n + 1):
        power = v[i - 1]
        for c in range(cols):
            h[i - 1, c] = power
            power = power * i % p
    return ParityMatrix(h, tuple(v), n, t, p)


def syndrome(values, pm: ParityMatrix) -> np.ndarray:
    """values @ H mod p; a 2-D input gives one syndrome row per vector."""
    vec = np.asarray(values)
    if vec.dtype != object:
        vec = vec.astype(object)
    if vec.ndim not in (1, 2) or vec.shape[-1] != pm.n:
        raise ValueError("vector length does not match the parity matrix")
    if pm.is_vacuous:
        return np.zeros(vec.shape[:-1] + (0,), dtype=object)
    return (vec % pm.p).dot(pm.H) % pm.p


def is_valid_share_vector(values, pm: ParityMatrix) -> bool:
    if isinstance(values, ShareVector):
        values = values.shares
    return not np.any(syndrome(values, pm))


def interpolates(values, t: int, p: int) -> bool:
    """Membership by interpolation: the degree-<=t fit through points 1..t+1 hits every value."""
    vals = [int(x) % p for x in values]
    n = len(vals)
    base = list(range(1, t + 2))
    for x in range(t + 2, n + 1):
        acc = 0
        for i in base:
            num, den = 1, 1
            for j in base:
                if j != i:
                    num = num * (x - j) % p
                    den = den * (i - j) % p
            acc += vals[i - 1] * num * pow(den, -1, p)
        if acc % p != vals[x - 1]:
            return False
    return True

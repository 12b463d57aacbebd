"""Gadget-based LWE trapdoor: generation and deterministic inversion.

The public matrix is A = [A_bar | G - A_bar R] with a short R and the gadget
G = I_v (x) (1, 2, ..., 2^(k-1)).  Given b = s^T A + e^T, the product
b^T [R; I] equals s^T G + e_hat^T with e_hat = R^T e_bar + e_right, and each
length-k block is decoded exactly through the basis S of the lattice
{x : <g, x> = 0 mod q}:

    columns 2*e_j - e_(j+1) for j < k-1, last column the binary digits of q.

S^T c = S^T e_hat (mod q), so whenever every |<S_col, e_hat>| < q/2 the
centered residues equal S^T e_hat over the integers and the triangular
system is solved directly.  Columns have norm at most sqrt(k), hence the
per-block radius q / (2 sqrt(k)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modmath import (
    ConfigurationError,
    Modulus,
    ZqMatrix,
    ceil_sqrt,
    center_lift,
    int_matmul,
    l2_norm_sq,
    to_obj,
    uniform_residues,
)
from .sampler import sample_matrix

# wide enough that G - A_bar R looks uniform even for tiny moduli such as 25
SIGMA_TRAP = 4


class InversionFailure(ValueError):
    """The target is not within the decoding radius of any LWE sample."""


@dataclass(frozen=True)
class TrapdoorMatrix:
    A: ZqMatrix
    R: np.ndarray
    modulus: Modulus
    u0: int
    k: int
    radius: int  # l2 bound on e under which inversion is guaranteed
    s1: float

    @property
    def v(self) -> int:
        return self.A.shape[0]

    @property
    def u(self) -> int:
        return self.A.shape[1]

    @property
    def r_max(self) -> int:
        return int(np.max(np.abs(self.R)))


def gadget_matrix(v: int, k: int) -> np.ndarray:
    g = np.zeros((v, v * k), dtype=object)
    for i in range(v):
        for j in range(k):
            g[i, i * k + j] = 1 << j
    return g


def trap_gen(v: int, u: int, m: Modulus, rng: np.random.Generator) -> TrapdoorMatrix:
    k = m.k
    u0 = u - v * k
    if u0 < v:
        raise ConfigurationError(f"u={u} leaves a uniform block of {u0} < v={v} columns")
    q = m.q
    a_bar = uniform_residues((v, u0), q, rng)
    r = sample_matrix(SIGMA_TRAP, (u0, v * k), rng)
    right = (gadget_matrix(v, k) - int_matmul(a_bar, r)) % q
    a = ZqMatrix(np.concatenate([a_bar, right], axis=1), q)
    s1 = float(np.linalg.svd(r.astype(np.float64), compute_uv=False)[0]) if r.size else 0.0
    # e_hat = R^T e_bar + e_right has norm <= (s1 + 1) ||e||; per block we need < q / (2 sqrt k)
    factor = 2 * ceil_sqrt(k) * (int(np.ceil(s1 * 1.01)) + 1)
    radius = (q - 1) // factor
    return TrapdoorMatrix(a, r, m, u0, k, radius, s1)


def _q_bits(q: int, k: int) -> list[int]:
    return [(q >> j) & 1 for j in range(k)]


def _decode_blocks(c: np.ndarray, q: int, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decode rows of c (N x k, reduced mod q) as s*g + err.

    Returns (s mod q, err, ok) where ok flags rows whose triangular solve was
    consistent.
    """
    c = to_obj(c)
    n = c.shape[0]
    qb = _q_bits(q, k)
    y = np.empty((n, k), dtype=object)
    if k > 1:
        y[:, : k - 1] = center_lift(2 * c[:, : k - 1] - c[:, 1:], q)
    last = c[:, [j for j in range(k) if qb[j]]].sum(axis=1)
    y[:, k - 1] = center_lift(last, q)
    # partial sums P_j = sum_{i<j} 2^(j-1-i) y_i
    partial = np.empty((n, k), dtype=object)
    partial[:, 0] = 0
    for j in range(1, k):
        partial[:, j] = 2 * partial[:, j - 1] + y[:, j - 1]
    num = y[:, k - 1] + partial[:, [j for j in range(k) if qb[j]]].sum(axis=1)
    ok = (num % q) == 0
    e0 = num // q
    pow2 = np.array([1 << j for j in range(k)], dtype=object)
    err = np.outer(e0, pow2) - partial
    s = (c[:, 0] - e0) % q
    return s, err, ok.astype(bool)


def gadget_decode(c, m: Modulus | int) -> tuple[int, np.ndarray]:
    """Recover s from c = s*g + err (mod q) for one gadget block."""
    q = m.q if isinstance(m, Modulus) else int(m)
    c = np.asarray(c, dtype=object).reshape(1, -1)
    k = c.shape[1]
    if k != q.bit_length():
        raise ConfigurationError("block length must equal ceil(log2 q)")
    s, err, ok = _decode_blocks(c, q, k)
    g = np.array([1 << j for j in range(k)], dtype=object)
    if not ok[0] or np.any((c[0] - s[0] * g - err[0]) % q != 0):
        raise InversionFailure("gadget block outside the decoding radius")
    # every c has a coset decoding; only ||err|| < q / (2 sqrt k) is guaranteed to be the right one
    if 4 * k * l2_norm_sq(err[0]) >= q * q:
        raise InversionFailure("gadget block outside the decoding radius")
    return int(s[0]), err[0]


def invert_lwe_batch(tm: TrapdoorMatrix, targets) -> list[tuple[np.ndarray, np.ndarray] | None]:
    """Invert each row of targets; None marks a row with no short preimage in range."""
    q, k, v, u0 = tm.modulus.q, tm.k, tm.v, tm.u0
    b = to_obj(np.atleast_2d(np.asarray(targets))) % q
    if b.shape[1] != tm.u:
        raise ConfigurationError("target length must equal u")
    rows = b.shape[0]
    c = (int_matmul(b[:, :u0], tm.R) + b[:, u0:]) % q
    s_flat, err, ok = _decode_blocks(c.reshape(rows * v, k), q, k)
    s_c = center_lift(s_flat.reshape(rows, v), q)
    ok_rows = ok.reshape(rows, v).all(axis=1)
    # b - s^T A without the full-width product: the left block directly, the
    # gadget block from the decoded error, err - e_left R = b_right - s^T A_right (mod q)
    e_left = center_lift(b[:, :u0] - int_matmul(s_c, tm.A.data[:, :u0]), q)
    e_right = err.reshape(rows, v * k) - int_matmul(e_left, tm.R)
    half = (q - 1) // 2
    wide = (e_right > half) | (e_right < -half)
    if wide.any():
        e_right = center_lift(e_right, q)
    e_all = np.concatenate([e_left, e_right], axis=1)
    out: list[tuple[np.ndarray, np.ndarray] | None] = []
    bound = tm.radius * tm.radius
    for i in range(rows):
        if not ok_rows[i] or l2_norm_sq(e_all[i]) > bound:
            out.append(None)
        else:
            out.append((s_c[i], e_all[i]))
    return out


def invert_lwe(tm: TrapdoorMatrix, b) -> tuple[np.ndarray, np.ndarray]:
    """Recover (s, e) with b = s^T A + e^T; s is returned centered mod q."""
    res = invert_lwe_batch(tm, np.asarray(b).reshape(1, -1))[0]
    if res is None:
        raise InversionFailure("re-encoding check failed: no short e within the stored radius")
    return res

"""Exact modular arithmetic over Z_q for moduli up to 2^128.

Residue vectors are numpy object arrays of Python ints reduced into [0, q).
Short signed vectors are int64 arrays whenever they fit and object arrays
otherwise.  Matrix products never go through floating point: both operands
are split into signed limbs small enough that every int64 accumulation is
exact, and the limb products are recombined with Python integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import math
from math import isqrt

import numpy as np
from sympy import isprime

MAX_MODULUS_BITS = 128

# int64 headroom used when choosing limb widths: products plus accumulation
# must stay strictly below 2^63.
_WORD_BITS = 62


class ConfigurationError(ValueError):
    """Raised for invalid moduli, dimensions or parameter combinations."""


@dataclass(frozen=True)
class Modulus:
    """Prime p and q = p^2 as used by the encryption scheme."""

    p: int
    q: int = field(init=False)

    def __post_init__(self) -> None:
        if self.p < 3 or not isprime(self.p):
            raise ConfigurationError(f"p={self.p} is not an odd prime")
        q = self.p * self.p
        if q.bit_length() > MAX_MODULUS_BITS:
            raise ConfigurationError(f"q has {q.bit_length()} bits, cap is {MAX_MODULUS_BITS}")
        object.__setattr__(self, "q", q)

    @property
    def k(self) -> int:
        """ceil(log2 q); q is an odd square so never a power of two."""
        return self.q.bit_length()

    @property
    def width(self) -> int:
        """Bytes per serialized residue."""
        return (self.q.bit_length() + 7) // 8


# ---------------------------------------------------------------- scalars


def center_lift(x, m: int):
    """Centered representative of x mod m in [-(m-1)/2, (m-1)/2].

    Works on Python ints and on integer numpy arrays (returned as object
    arrays when the modulus does not fit comfortably in int64).
    """
    if m % 2 == 0:
        raise ConfigurationError("center_lift needs an odd modulus")
    half = (m - 1) // 2
    if isinstance(x, np.ndarray):
        y = to_obj(x) % m
        return np.where(y > half, y - m, y)
    y = int(x) % m
    return y - m if y > half else y


def ceil_sqrt(n: int) -> int:
    if n < 0:
        raise ValueError("negative radicand")
    r = isqrt(n)
    return r if r * r == n else r + 1


# ---------------------------------------------------------------- arrays


def to_obj(x) -> np.ndarray:
    """Object array of Python ints (a copy only when a conversion is needed)."""
    a = np.asarray(x)
    if a.dtype == object:
        return a
    return a.astype(object)


def residues(x, q: int) -> np.ndarray:
    """Reduce an integer array into [0, q) as an object array."""
    return to_obj(x) % q


def shrink(x) -> np.ndarray:
    """Return an int64 copy when every entry fits, else the object array."""
    a = np.asarray(x)
    if a.dtype != object:
        return a.astype(np.int64)
    if a.size == 0:
        return np.zeros(a.shape, dtype=np.int64)
    if max_bits(a) <= 62:
        return a.astype(np.int64)
    return a


def stack_ints(rows) -> np.ndarray:
    """np.stack that promotes to object when any row holds big integers."""
    if any(np.asarray(r).dtype == object for r in rows):
        return np.stack([to_obj(r) for r in rows])
    return np.stack(rows)


def max_bits(x) -> int:
    a = np.asarray(x)
    if a.size == 0:
        return 0
    if a.dtype != object:
        return int(np.max(np.abs(a.astype(np.int64)))).bit_length()
    return max(int(a.max()), -int(a.min())).bit_length()


def l2_norm_sq(x) -> int:
    """Exact squared Euclidean norm."""
    a = np.asarray(x).ravel()
    if a.size == 0:
        return 0
    if a.dtype != object and max_bits(a) <= 20 and a.size < (1 << 20):
        a64 = a.astype(np.int64)
        return int(np.dot(a64, a64))
    o = to_obj(a)
    return int(np.dot(o, o))


def l2_norm(x) -> float:
    """Euclidean norm as a float, for reporting only; bound checks use l2_norm_sq."""
    return math.sqrt(l2_norm_sq(x))


def norm_at_most(x, bound_sq) -> bool:
    """||x||^2 <= bound_sq in exact arithmetic (bound_sq may be a Fraction)."""
    return l2_norm_sq(x) <= bound_sq


# ---------------------------------------------------------------- limbs


def _split(x: np.ndarray, width: int, count: int) -> np.ndarray:
    """Signed limbs: x = sum_j limbs[j] * 2^(width*j), each |limb| < 2^width."""
    mask = (1 << width) - 1
    if x.dtype != object:
        x64 = x.astype(np.int64)
        sign = np.sign(x64)
        mag = np.abs(x64)
        out = np.empty((count,) + x.shape, dtype=np.int64)
        for j in range(count):
            out[j] = sign * ((mag >> (width * j)) & mask) if width * j < 63 else 0
        return out
    sign = np.sign(x).astype(np.int64)
    mag = np.abs(x)
    out = np.empty((count,) + x.shape, dtype=np.int64)
    for j in range(count):
        out[j] = sign * ((mag >> (width * j)) & mask).astype(np.int64)
    return out


def _plan(bx: int, by: int, inner: int) -> tuple[int, int, int, int]:
    """Choose limb widths (wx, nx, wy, ny) so every accumulation fits in int64."""
    ib = max(1, inner).bit_length()
    if bx + by + ib <= _WORD_BITS:
        return max(bx, 1), 1, max(by, 1), 1
    # keep the narrow operand whole when possible
    small, large = (bx, by) if bx <= by else (by, bx)
    room = _WORD_BITS - ib - small
    if small <= 31 and room >= 16:
        nl = -(-large // room)
        if bx <= by:
            return max(bx, 1), 1, room, nl
        return room, nl, max(by, 1), 1
    for w in range((_WORD_BITS - ib) // 2, 0, -1):
        nx, ny = -(-bx // w), -(-by // w)
        gb = min(nx, ny).bit_length()
        if 2 * w + ib + gb <= _WORD_BITS:
            return w, nx, w, ny
    raise ConfigurationError("operands too large for limb arithmetic")


def int_matmul(x, y, limbs_x=None, limbs_y=None, plan=None) -> np.ndarray:
    """Exact integer product x @ y as an object array.

    Inputs are 1-D or 2-D integer arrays of any magnitude.  Precomputed limb
    splits may be supplied for either side, together with the plan that
    produced them.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    inner = x.shape[-1]
    if inner != y.shape[0]:
        raise ConfigurationError(f"dimension mismatch {x.shape} @ {y.shape}")
    if plan is None:
        bx, by = max_bits(x), max_bits(y)
        if bx == 0 or by == 0:
            return np.zeros(np.empty(x.shape[:-1] + y.shape[1:]).shape, dtype=object)
        plan = _plan(bx, by, inner)
    wx, nx, wy, ny = plan
    if nx == 1 and ny == 1:
        return to_obj(x.astype(np.int64) @ _columns(y.astype(np.int64)))
    lx = limbs_x if limbs_x is not None else _split(x, wx, nx)
    ly = limbs_y if limbs_y is not None else _split(y, wy, ny)
    ly = [_columns(limb) for limb in ly]
    # every product lands on a multiple of one digit width
    if nx == 1:
        width, digits = wy, [lx[0] @ ly[b] for b in range(ny)]
    elif ny == 1:
        width, digits = wx, [lx[a] @ ly[0] for a in range(nx)]
    else:
        width, digits = wx, [None] * (nx + ny - 1)
        for a in range(nx):
            for b in range(ny):
                prod = lx[a] @ ly[b]
                g = a + b
                digits[g] = prod if digits[g] is None else digits[g] + prod
    return _recombine(digits, width)


def _columns(y: np.ndarray) -> np.ndarray:
    # numpy's integer matmul walks the right operand by column; keep columns contiguous
    return np.asfortranarray(y) if y.ndim == 2 and y.shape[1] > 1 else y


def _recombine(digits: list[np.ndarray], width: int) -> np.ndarray:
    """sum_g digits[g] * 2^(width*g) as an object array.

    One carry pass in int64 leaves every digit but the top one in
    [0, 2^width).  The digits are then packed into little-endian
    two's-complement words and each entry is read back with int.from_bytes,
    which is far cheaper than chained object-array arithmetic.
    """
    d = [np.array(x, dtype=np.int64) for x in digits]
    shape = d[0].shape
    top = len(d) - 1
    w = np.int64(width)
    for g in range(top):
        carry = d[g] >> w
        d[g] -= carry << w
        d[g + 1] += carry
    low_bits = width * top
    wi, off = divmod(low_bits, 64)
    count = d[0].size
    words = np.zeros((count, wi + 2), dtype=np.uint64)
    for g in range(top):
        word, bit = divmod(width * g, 64)
        val = d[g].ravel().astype(np.uint64)
        words[:, word] |= val << np.uint64(bit)
        if bit + width > 64:
            words[:, word + 1] |= val >> np.uint64(64 - bit)
    hi = d[top].ravel()
    words[:, wi] |= hi.astype(np.uint64) << np.uint64(off)
    words[:, wi + 1] = (hi >> np.int64(63 if off == 0 else 64 - off)).astype(np.uint64)
    raw = words.astype("<u8", copy=False).tobytes()
    step = 8 * (wi + 2)
    fb = int.from_bytes
    out = np.empty(count, dtype=object)
    out[:] = [fb(raw[i : i + step], "little", signed=True) for i in range(0, count * step, step)]
    return out.reshape(shape)


class ZqMatrix:
    """Immutable matrix over Z_q with cached limb decompositions."""

    def __init__(self, entries, q: int):
        data = residues(np.array(entries, dtype=object), q)
        if data.ndim != 2:
            raise ConfigurationError("ZqMatrix needs a 2-D array")
        data.setflags(write=False)
        self._data = data
        self.q = q
        self._limb_cache: dict[tuple[int, int, str], np.ndarray] = {}

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def shape(self) -> tuple[int, int]:
        return self._data.shape

    @cached_property
    def T(self) -> "ZqMatrix":
        return ZqMatrix(self._data.T, self.q)

    def __eq__(self, other) -> bool:
        return isinstance(other, ZqMatrix) and self.q == other.q and np.array_equal(self._data, other._data)

    def __hash__(self) -> int:
        return hash((self.q, self.shape))

    def _limbs(self, width: int, count: int) -> np.ndarray:
        key = (width, count, "m")
        if key not in self._limb_cache:
            self._limb_cache[key] = _split(self._data, width, count)
        return self._limb_cache[key]

    def mul_right(self, x) -> np.ndarray:
        """self @ x mod q, x a vector or matrix of integers."""
        x = np.asarray(x)
        bx = max_bits(x)
        if bx == 0:
            return np.zeros((self.shape[0],) + x.shape[1:], dtype=object)
        plan = _plan(self.q.bit_length(), bx, self.shape[1])
        lim = self._limbs(plan[0], plan[1]) if plan[1] > 1 else None
        return int_matmul(self._data, x, limbs_x=lim, plan=plan) % self.q

    def mul_left(self, x) -> np.ndarray:
        """x @ self mod q (row vector(s) times matrix)."""
        x = np.asarray(x)
        bx = max_bits(x)
        if bx == 0:
            return np.zeros(x.shape[:-1] + (self.shape[1],), dtype=object)
        plan = _plan(bx, self.q.bit_length(), self.shape[0])
        lim = self._limbs(plan[2], plan[3]) if plan[3] > 1 else None
        return int_matmul(x, self._data, limbs_y=lim, plan=plan) % self.q


def mat_vec_mul(a: ZqMatrix, x, m: Modulus | int | None = None) -> np.ndarray:
    """A @ x mod q with exact accumulation."""
    q = a.q if m is None else (m.q if isinstance(m, Modulus) else int(m))
    if q != a.q:
        raise ConfigurationError("modulus mismatch")
    x = np.asarray(x)
    if x.shape[0] != a.shape[1]:
        raise ConfigurationError(f"dimension mismatch: {a.shape} @ {x.shape}")
    return a.mul_right(x)


def vec_mat_mul(x, a: ZqMatrix) -> np.ndarray:
    """x^T A mod q."""
    x = np.asarray(x)
    if x.shape[-1] != a.shape[0]:
        raise ConfigurationError(f"dimension mismatch: {x.shape} @ {a.shape}")
    return a.mul_left(x)


def dot_mod(x, y, q: int) -> int:
    """Exact inner product reduced mod q."""
    return int(int_matmul(np.asarray(x).reshape(1, -1), np.asarray(y).reshape(-1, 1))[0, 0]) % q


def rows_dot_mod(x, y, q: int) -> np.ndarray:
    """Row-wise inner products <x[i], y[i]> mod q for equally shaped 2-D arrays."""
    x = np.asarray(x)
    y = np.asarray(y)
    out = np.empty(x.shape[0], dtype=object)
    for i in range(x.shape[0]):
        out[i] = dot_mod(x[i], y[i], q)
    return out


# ---------------------------------------------------------------- bytes


def residues_to_bytes(x, width: int) -> bytes:
    """Fixed-width little-endian encoding of residues in [0, 2^(8*width))."""
    a = np.asarray(x).ravel()
    if a.size == 0:
        return b""
    if a.dtype == object:
        tb = int.to_bytes
        return b"".join([tb(int(v), width, "little") for v in a.tolist()])
    nwords = -(-width // 8)
    words = np.zeros((a.size, nwords), dtype=np.uint64)
    words[:, 0] = a.astype(np.uint64)
    raw = words.astype("<u8").view(np.uint8).reshape(a.size, 8 * nwords)
    return raw[:, :width].tobytes()


def bytes_to_residues(data: bytes, width: int) -> np.ndarray:
    words = _byte_words(data, width)
    out = words[:, 0].astype(object)
    for j in range(1, words.shape[1]):
        out = out + (words[:, j].astype(object) << (64 * j))
    return out


_WORD_MASK = (1 << 64) - 1
_SMALL = 1 << 62


def _byte_words(data: bytes, width: int) -> np.ndarray:
    """(count, nwords) little-endian uint64 words of fixed-width integers."""
    if width <= 0 or len(data) % width:
        raise ValueError("byte string length is not a multiple of the residue width")
    count = len(data) // width
    nwords = -(-width // 8)
    padded = np.zeros((count, 8 * nwords), dtype=np.uint8)
    padded[:, :width] = np.frombuffer(data, dtype=np.uint8).reshape(count, width)
    return padded.view("<u8").reshape(count, nwords)


def _q_words(q: int, nwords: int) -> list[np.uint64]:
    return [np.uint64((q >> (64 * j)) & _WORD_MASK) for j in range(nwords)]


def _sub_from_q(qw: list[np.uint64], words: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """q - words row-wise with borrow; returns (difference, final borrow)."""
    out = np.empty_like(words)
    borrow = np.zeros(words.shape[0], dtype=bool)
    for j, qj in enumerate(qw):
        w = words[:, j]
        sub = w + borrow.astype(np.uint64)
        wrapped = borrow & (sub == 0)
        out[:, j] = qj - sub
        borrow = wrapped | (sub > qj)
    return out, borrow


def signed_to_bytes(x, q: int, width: int) -> bytes:
    """Encode signed integers as their residues mod q (same layout as residues_to_bytes)."""
    a = np.asarray(x).ravel()
    if a.size == 0:
        return b""
    if a.dtype == object or max_bits(a) >= min(q.bit_length(), 63):
        return residues_to_bytes(to_obj(a) % q, width)
    a = a.astype(np.int64)
    nwords = -(-width // 8)
    neg = a < 0
    words = np.zeros((a.size, nwords), dtype=np.uint64)
    words[:, 0] = np.abs(a).astype(np.uint64)
    if neg.any():
        diff, _ = _sub_from_q(_q_words(q, nwords), words[neg])
        words[neg] = diff
    raw = words.astype("<u8").view(np.uint8).reshape(a.size, 8 * nwords)
    return raw[:, :width].tobytes()


def decode_residues(data: bytes, width: int, q: int) -> np.ndarray:
    """Residues in [0, q); raises ValueError on a non-canonical entry."""
    out = bytes_to_residues(data, width)
    if out.size and (out >= q).any():
        raise ValueError("non-canonical residue")
    return out


def decode_signed(data: bytes, width: int, q: int) -> np.ndarray:
    """Centered lifts of canonical residues; int64 when every entry is small."""
    words = _byte_words(data, width)
    if words.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    nwords = words.shape[1]
    high_zero = ~words[:, 1:].any(axis=1) if nwords > 1 else np.ones(words.shape[0], dtype=bool)
    limit = np.uint64(min((q - 1) // 2 + 1, _SMALL))
    pos = high_zero & (words[:, 0] < limit)
    if not pos.all():
        diff, borrow = _sub_from_q(_q_words(q, nwords), words)
        dz = ~diff[:, 1:].any(axis=1) if nwords > 1 else np.ones(words.shape[0], dtype=bool)
        negok = ~borrow & dz & (diff[:, 0] < limit) & (diff[:, 0] > 0)
    else:
        diff, negok = words, np.zeros(words.shape[0], dtype=bool)
    if (pos | negok).all():
        out = words[:, 0].astype(np.int64)
        out[negok] = -diff[negok, 0].astype(np.int64)
        return out
    return shrink(center_lift(decode_residues(data, width, q), q))


def residue_hex(x: int, width: int) -> str:
    return int(x).to_bytes(width, "little").hex()


def uniform_residues(shape, q: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform entries of Z_q; 64 extra random bits per entry make the modular bias negligible."""
    count = int(np.prod(shape))
    width = (q.bit_length() + 7) // 8 + 8
    raw = bytes_to_residues(rng.bytes(width * count), width) if count else np.zeros(0, dtype=object)
    return (raw % q).reshape(shape)

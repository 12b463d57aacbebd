"""Parameter derivation and validation.

Every bound is an integer.  Quadratic bounds that are not perfect squares
(sqrt(v) * alpha_q and friends) are kept squared so norm checks stay exact.
Gaussian widths are integers strictly above their lower bounds.

Derivation works on a fixpoint: the width u of the public matrix depends on
the bit length k of q, every bound depends on u, and the smallest admissible
prime p depends on the bounds.  Starting from a small k the sequence of k
values is non-decreasing, so it stops at the least fixpoint.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

import mpmath
from sympy import isprime, nextprime

from .modmath import MAX_MODULUS_BITS, ConfigurationError, ceil_sqrt
from .sampler import log_m

DEFAULT_MAX_Q_BITS = 128
MAX_FIXPOINT_ITERATIONS = 8
# the uniform block of the trapdoored matrix is this many multiples of v wide
UNIFORM_BLOCK_FACTOR = 2
# floor on sigma_key / (shift norm): keeps the key-proof rejection step in the
# regime where its acceptance rate sits at 1/M (shift well under the slack)
KEY_SLACK_NUMERATOR = 2


class InfeasibleParameters(ConfigurationError):
    """No prime below the q-bit cap satisfies every constraint."""


@dataclass(frozen=True)
class ParamRequest:
    n: int
    t: int
    v: int
    reps: int
    max_q_bits: int = DEFAULT_MAX_Q_BITS

    def __post_init__(self) -> None:
        if self.n < 2 or self.v < 1 or self.reps < 1 or self.t < 0:
            raise ConfigurationError("n >= 2, t >= 0, v >= 1 and reps >= 1 are required")
        if 2 * self.t >= self.n:
            raise ConfigurationError(f"threshold t={self.t} must be below n/2 (n={self.n})")
        if not 2 <= self.max_q_bits <= MAX_MODULUS_BITS:
            raise ConfigurationError(f"max_q_bits must lie in [2, {MAX_MODULUS_BITS}]")


@dataclass(frozen=True)
class ParamSet:
    n: int
    t: int
    v: int
    reps: int
    p: int
    q: int
    k: int
    u: int
    u0: int
    alpha_q: int
    beta_q: int
    r: int
    # squared zk-side bounds
    key_s_sq: int
    key_e_sq: int
    enc_r_sq: int
    enc_e_sq: int
    # relaxed (soundness-side) bounds, plain integers
    key_star: int
    enc_star_f: int
    dec_star: int
    # Gaussian widths
    sigma_key: int
    sigma_enc: int
    sigma_dec: int
    max_q_bits: int = DEFAULT_MAX_Q_BITS

    # decryption-proof witness bounds are the soundness bounds of the first two proofs
    @property
    def dec_s(self) -> int:
        return self.key_star

    @property
    def dec_e(self) -> int:
        return self.key_star

    @property
    def dec_f(self) -> int:
        return self.enc_star_f

    @property
    def key_dim(self) -> int:
        return self.u + self.v

    @property
    def enc_dim(self) -> int:
        return self.n * (self.u + 1)

    @property
    def dec_dim(self) -> int:
        return self.u + self.v + 1

    def enc_dim_for(self, n: int) -> int:
        return n * (self.u + 1)

    def M(self, language: str, n: int | None = None) -> float:
        dim = {"key": self.key_dim, "enc": self.enc_dim_for(n or self.n), "dec": self.dec_dim}[language]
        return float(mpmath.exp(log_m(self.reps * dim)))

    def to_text(self) -> str:
        lines = [f"{f.name} = {getattr(self, f.name)}" for f in fields(self)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ParamSet":
        values: dict[str, int] = {}
        names = {f.name for f in fields(cls)}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ValueError(f"malformed line: {raw!r}")
            key = key.strip()
            if key not in names:
                raise ValueError(f"unknown key {key!r}")
            values[key] = int(val.strip())
        missing = names - values.keys() - {"max_q_bits"}
        if missing:
            raise ValueError(f"missing keys: {sorted(missing)}")
        return cls(**values)

    def as_dict(self) -> dict[str, int]:
        return asdict(self)


# ---------------------------------------------------------------- helpers


def sqrt_log_factor(dim: int) -> int:
    """ceil(sqrt(ln dim)), the fixed constant standing in for sqrt(log dim)."""
    return max(1, math.ceil(math.sqrt(math.log(dim))))


def key_factor(dim: int) -> int:
    ln_m = float(log_m(dim))
    return max(sqrt_log_factor(dim), math.ceil(KEY_SLACK_NUMERATOR / ln_m))


def width_above(factor: int, shift_sq: int) -> int:
    """Smallest integer sigma with sigma > factor * sqrt(shift_sq)."""
    return math.isqrt(factor * factor * shift_sq) + 1


def _log2_ceil(x: int) -> int:
    return (x - 1).bit_length()


@dataclass(frozen=True)
class _Bounds:
    u: int
    u0: int
    alpha_q: int
    beta_q: int
    r: int
    key_s_sq: int
    key_e_sq: int
    enc_r_sq: int
    enc_e_sq: int
    key_star: int
    enc_star_f: int
    dec_star: int
    sigma_key: int
    sigma_enc: int
    sigma_dec: int


def _bounds_for(n: int, v: int, reps: int, k: int) -> _Bounds:
    u0 = UNIFORM_BLOCK_FACTOR * v
    u = u0 + v * k
    alpha_q = math.isqrt(v - 1) + 1 if v > 1 else 1  # ceil(sqrt(v))
    log_u = _log2_ceil(u)
    r = log_u + 1
    # beta*q = sqrt(u) * log u * (alpha*q + 1/2), rounded up
    beta_q = ceil_sqrt(-(-u * log_u * log_u * (2 * alpha_q + 1) ** 2 // 4))
    key_s_sq = v * alpha_q**2
    key_e_sq = u * alpha_q**2
    enc_r_sq = u * r * r
    enc_e_sq = v * beta_q**2

    key_dim = reps * (u + v)
    sigma_key = width_above(key_factor(key_dim), reps * (key_s_sq + key_e_sq))
    key_star = ceil_sqrt(4 * (u + v) * sigma_key**2)

    enc_dim = reps * n * (u + 1)
    sigma_enc = width_above(sqrt_log_factor(enc_dim), reps * n * (enc_e_sq + enc_r_sq))
    enc_star_f = ceil_sqrt(4 * sigma_enc**2 * (u + 1) * (key_star + 1) ** 2)

    dec_dim = reps * (u + v + 1)
    sigma_dec = width_above(sqrt_log_factor(dec_dim), reps * (2 * key_star**2 + enc_star_f**2))
    dec_star = ceil_sqrt(4 * (u + v + 1) * sigma_dec**2)
    return _Bounds(u, u0, alpha_q, beta_q, r, key_s_sq, key_e_sq, enc_r_sq, enc_e_sq,
                   key_star, enc_star_f, dec_star, sigma_key, sigma_enc, sigma_dec)


def _injective(bound: int, p: int, v: int) -> bool:
    # bound <= p / (4 sqrt(v log2 p)), with log2 p rounded up to the bit length
    return 16 * bound * bound * v * p.bit_length() <= p * p


def _p_constraints(b: _Bounds, v: int, p: int) -> list[str]:
    bad = []
    if not _injective(b.key_star, p, v):
        bad.append("key_star_injective")
    if not 2 * b.enc_star_f < p:
        bad.append("enc_star_f_below_half_p")
    if not 2 * b.dec_star < p:
        bad.append("dec_star_below_half_p")
    if not _injective(b.dec_star, p, v):
        bad.append("dec_star_injective")
    # decryption noise of a relaxed key: B*_e * sqrt(u) * r + sqrt(v) * beta_q < p / 2
    noise = b.key_star * ceil_sqrt(b.u) * b.r + ceil_sqrt(b.enc_e_sq)
    if not 2 * noise < p:
        bad.append("pke_correctness")
    return bad


def _smallest_p(b: _Bounds, v: int, n: int) -> int:
    def ok(x: int) -> bool:
        return x > n and not _p_constraints(b, v, x)

    hi = 3
    while not ok(hi):
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    p = hi if isprime(hi) else nextprime(hi)
    return p


def derive_params(req: ParamRequest) -> ParamSet:
    """Smallest prime p (and matching dimensions) meeting every constraint."""
    k = 2 * max(8, req.v.bit_length() + req.n.bit_length())
    seen: set[int] = set()
    for _ in range(MAX_FIXPOINT_ITERATIONS):
        b = _bounds_for(req.n, req.v, req.reps, k)
        p = _smallest_p(b, req.v, req.n)
        k_next = (p * p).bit_length()
        if k_next > req.max_q_bits:
            raise InfeasibleParameters(
                f"parameters infeasible at requested cap: q needs {k_next} bits > {req.max_q_bits}"
            )
        if k_next == k:
            return _assemble(req, p, k, b)
        if k_next in seen:
            # two-cycle: settle on the larger k, which is self-consistent from above
            k = max(k, k_next)
        else:
            seen.add(k)
            k = k_next
    raise InfeasibleParameters("parameter fixpoint did not converge")


def _assemble(req: ParamRequest, p: int, k: int, b: _Bounds) -> ParamSet:
    ps = ParamSet(
        n=req.n, t=req.t, v=req.v, reps=req.reps, p=p, q=p * p, k=k,
        u=b.u, u0=b.u0, alpha_q=b.alpha_q, beta_q=b.beta_q, r=b.r,
        key_s_sq=b.key_s_sq, key_e_sq=b.key_e_sq, enc_r_sq=b.enc_r_sq, enc_e_sq=b.enc_e_sq,
        key_star=b.key_star, enc_star_f=b.enc_star_f, dec_star=b.dec_star,
        sigma_key=b.sigma_key, sigma_enc=b.sigma_enc, sigma_dec=b.sigma_dec,
        max_q_bits=req.max_q_bits,
    )
    return ps


def validate_params(ps: ParamSet) -> list[str]:
    """Names of every violated constraint; empty means valid."""
    bad: list[str] = []
    if not isprime(ps.p):
        bad.append("p_prime")
    if ps.q != ps.p * ps.p:
        bad.append("q_is_p_squared")
    if ps.q.bit_length() > ps.max_q_bits:
        bad.append("q_bit_cap")
    if ps.k != ps.q.bit_length():
        bad.append("k_is_log2_q")
    if 2 * ps.t >= ps.n:
        bad.append("threshold_below_half")
    if ps.n >= ps.p:
        bad.append("n_below_p")
    if ps.u0 < ps.v or ps.u != ps.u0 + ps.v * ps.k:
        bad.append("u_gadget_layout")
    if ps.alpha_q**2 < ps.v:
        bad.append("alpha_q_at_least_sqrt_v")
    log_u = _log2_ceil(ps.u)
    if ps.r != log_u + 1:
        bad.append("r_is_log_u_plus_one")
    if Fraction(ps.beta_q) ** 2 < Fraction(ps.u * log_u * log_u) * (Fraction(2 * ps.alpha_q + 1, 2)) ** 2:
        bad.append("beta_q_formula")
    if ps.key_s_sq != ps.v * ps.alpha_q**2 or ps.key_e_sq != ps.u * ps.alpha_q**2:
        bad.append("key_bounds")
    if ps.enc_r_sq != ps.u * ps.r**2 or ps.enc_e_sq != ps.v * ps.beta_q**2:
        bad.append("enc_bounds")

    key_dim = ps.reps * (ps.u + ps.v)
    f = sqrt_log_factor(key_dim)
    if ps.sigma_key**2 <= f * f * ps.reps * (ps.key_s_sq + ps.key_e_sq):
        bad.append("sigma_key_lower_bound")
    if ps.key_star**2 < 4 * (ps.u + ps.v) * ps.sigma_key**2:
        bad.append("key_star_definition")

    enc_dim = ps.reps * ps.n * (ps.u + 1)
    f = sqrt_log_factor(enc_dim)
    sym = ps.reps * ps.n * (ps.enc_e_sq + ps.enc_r_sq)
    if ps.sigma_enc**2 <= f * f * sym:
        bad.append("sigma_enc_lower_bound")
    if ps.enc_star_f**2 < 4 * ps.sigma_enc**2 * (ps.u + 1) * (ps.key_star + 1) ** 2:
        bad.append("enc_star_f_definition")

    dec_dim = ps.reps * (ps.u + ps.v + 1)
    f = sqrt_log_factor(dec_dim)
    if ps.sigma_dec**2 <= f * f * ps.reps * (ps.dec_s**2 + ps.dec_e**2 + ps.dec_f**2):
        bad.append("sigma_dec_lower_bound")
    if ps.dec_star**2 < 4 * (ps.u + ps.v + 1) * ps.sigma_dec**2:
        bad.append("dec_star_definition")

    b = _Bounds(ps.u, ps.u0, ps.alpha_q, ps.beta_q, ps.r, ps.key_s_sq, ps.key_e_sq,
                ps.enc_r_sq, ps.enc_e_sq, ps.key_star, ps.enc_star_f, ps.dec_star,
                ps.sigma_key, ps.sigma_enc, ps.sigma_dec)
    bad.extend(_p_constraints(b, ps.v, ps.p))
    return bad

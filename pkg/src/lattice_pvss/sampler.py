"""Discrete Gaussian sampling and the rejection step that hides response shifts.

Widths follow the convention rho_s(x) = exp(-pi * x^2 / s^2), so the standard
deviation of D_{Z,s} is about s / sqrt(2*pi).

Two base samplers are used.  For s up to 2^20 a cumulative table over the
support [-T, T] is built once per width and queried with vectorized binary
search.  Wider Gaussians are sampled by drawing uniform candidates on
[-T, T] and accepting each with probability rho_s(x).  Both are deterministic
functions of the numpy Generator state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .modmath import l2_norm_sq, to_obj

SIGMA_DENOMINATOR = 1 << 32
CDT_MAX_SIGMA = 1 << 20
# rho(T) / rho(0) < 2^-70 once T >= 3.93 s
_TAIL = 4
_PREC_BITS = 192


class SamplingFailure(RuntimeError):
    """A bounded sampling loop ran out of attempts."""


def _as_sigma(value) -> Fraction:
    f = Fraction(value)
    if f <= 0:
        raise ValueError("sigma must be positive")
    return Fraction(round(f * SIGMA_DENOMINATOR), SIGMA_DENOMINATOR)


@dataclass(frozen=True)
class GaussianParams:
    sigma: Fraction
    dim: int
    center: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "sigma", _as_sigma(self.sigma))
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.center is not None and len(self.center) != self.dim:
            raise ValueError("center length must equal dim")


@lru_cache(maxsize=8)
def _cdt(sigma: Fraction) -> tuple[int, np.ndarray]:
    s = float(sigma)
    tail = int(np.ceil(_TAIL * s)) + 1
    xs = np.arange(-tail, tail + 1, dtype=np.float64)
    w = np.exp(-np.pi * (xs / s) ** 2)
    cdf = np.cumsum(w)
    cdf /= cdf[-1]
    cdf[-1] = 1.0
    cdf.setflags(write=False)
    return tail, cdf


def _sample_centered(sigma: Fraction, count: int, rng: np.random.Generator) -> np.ndarray:
    if sigma <= CDT_MAX_SIGMA:
        tail, cdf = _cdt(sigma)
        u = rng.random(count)
        # sorted keys let the binary search start from the previous hit
        order = np.argsort(u)
        out = np.empty(count, dtype=np.int64)
        out[order] = np.searchsorted(cdf, u[order], side="right")
        return out - tail
    s = float(sigma)
    tail = int(np.ceil(_TAIL * s)) + 1
    out = np.empty(count, dtype=np.int64)
    filled = 0
    # acceptance is about s / (2 * tail), roughly 1/8
    while filled < count:
        need = count - filled
        batch = max(64, 9 * need)
        x = rng.integers(-tail, tail, size=batch, endpoint=True, dtype=np.int64)
        keep = rng.random(batch) < np.exp(-np.pi * (x / s) ** 2)
        got = x[keep][:need]
        out[filled : filled + got.size] = got
        filled += got.size
    return out


def sample_gaussian(gp: GaussianParams, rng: np.random.Generator) -> np.ndarray:
    """Draw one vector from D_{Z^dim, sigma, center}."""
    x = _sample_centered(gp.sigma, gp.dim, rng)
    if gp.center is not None:
        c = np.asarray(gp.center)
        if c.dtype == object:
            return to_obj(x) + c
        return x + c.astype(np.int64)
    return x


def sample_matrix(sigma, shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """i.i.d. D_{Z, sigma} entries in the given shape."""
    count = int(np.prod(shape))
    return _sample_centered(_as_sigma(sigma), count, rng).reshape(shape)


def sample_bounded(
    gp: GaussianParams, bound_sq, rng: np.random.Generator, max_tries: int = 128
) -> np.ndarray:
    """Sample until ||x||^2 <= bound_sq (exact comparison)."""
    for _ in range(max_tries):
        x = sample_gaussian(gp, rng)
        if l2_norm_sq(x) <= bound_sq:
            return x
    raise SamplingFailure(f"no sample within bound after {max_tries} tries")


# ---------------------------------------------------------------- rejection


def log_m(dim: int) -> mpmath.mpf:
    """ln M = 1/ln(dim) + 12/ln(dim)^2 for a response vector of the given dimension."""
    if dim < 2:
        raise ValueError("the slack constant needs dim >= 2")
    with mpmath.workprec(_PREC_BITS):
        ld = mpmath.log(dim)
        return 1 / ld + 12 / (ld * ld)


@dataclass(frozen=True)
class RejectionConfig:
    sigma: Fraction
    dim: int
    log_m: mpmath.mpf = field(compare=False)

    @classmethod
    def for_dim(cls, sigma, dim: int) -> "RejectionConfig":
        return cls(_as_sigma(sigma), dim, log_m(dim))

    @property
    def M(self) -> float:
        return float(mpmath.exp(self.log_m))


def acceptance_probability(z, shift, cfg: RejectionConfig) -> mpmath.mpf:
    """min(1, D_s(z) / (M * D_{s,shift}(z))) evaluated in high precision."""
    z_o, v_o = to_obj(np.ravel(z)), to_obj(np.ravel(shift))
    # ||z - v||^2 - ||z||^2 = ||v||^2 - 2<z, v>, an exact integer
    delta = l2_norm_sq(v_o) - 2 * int(np.dot(z_o, v_o)) if v_o.size else 0
    s = cfg.sigma
    with mpmath.workprec(_PREC_BITS):
        expo = mpmath.pi * mpmath.mpf(delta) * s.denominator**2 / s.numerator**2 - cfg.log_m
        if expo >= 0:
            return mpmath.mpf(1)
        return mpmath.exp(expo)


def rejection_filter(z, shift, cfg: RejectionConfig, rng: np.random.Generator):
    """Release z with the Lyubashevsky acceptance probability, else None.

    The Bernoulli draw compares a 128-bit uniform integer against the
    probability scaled by 2^128.
    """
    prob = acceptance_probability(z, shift, cfg)
    if prob >= 1:
        return z
    with mpmath.workprec(_PREC_BITS):
        threshold = int(mpmath.floor(prob * mpmath.mpf(2) ** 128))
    draw = int.from_bytes(rng.bytes(16), "little")
    return z if draw < threshold else None

"""Common reference string shared by the three proof systems."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from .gadget import TrapdoorMatrix, trap_gen
from .modmath import ConfigurationError, Modulus, ZqMatrix, residues_to_bytes, uniform_residues
from .params import ParamSet, validate_params


class Mode(str, Enum):
    REAL = "real"
    TRAPDOORED = "trapdoored"


class Language(str, Enum):
    KEY = "key"
    ENC = "enc"
    DEC = "dec"

    @property
    def tag(self) -> int:
        return {"key": 1, "enc": 2, "dec": 3}[self.value]


@dataclass(frozen=True, eq=False)
class Crs:
    A: ZqMatrix
    params: ParamSet
    mode: Mode
    language: Language
    trapdoor: TrapdoorMatrix | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.A.shape != (self.params.v, self.params.u) or self.A.q != self.params.q:
            raise ConfigurationError("CRS matrix does not match the parameter set")
        if self.mode is Mode.TRAPDOORED:
            if self.trapdoor is None or self.trapdoor.A != self.A:
                raise ConfigurationError("trapdoored CRS needs the trapdoor of its own matrix")

    @property
    def q(self) -> int:
        return self.params.q

    @property
    def p(self) -> int:
        return self.params.p

    @cached_property
    def modulus(self) -> Modulus:
        return Modulus(self.params.p)

    @cached_property
    def digest(self) -> bytes:
        """Hash of the public part (matrix and parameter ledger); mode is not included."""
        h = hashlib.sha256()
        h.update(b"lattice-pvss/crs/v1")
        h.update(self.params.to_text().encode())
        h.update(residues_to_bytes(self.A.data, self.modulus.width))
        return h.digest()

    def for_language(self, language: Language) -> "Crs":
        return Crs(self.A, self.params, self.mode, Language(language), self.trapdoor)

    def public(self) -> "Crs":
        """Same matrix without the trapdoor (mode stays as recorded)."""
        return Crs(self.A, self.params, Mode.REAL, self.language, None)


def crs_gen(ps: ParamSet, mode: Mode | str, rng: np.random.Generator,
            language: Language | str = Language.KEY) -> Crs:
    """Real mode samples A uniformly; trapdoored mode builds A with a gadget trapdoor."""
    problems = validate_params(ps)
    if problems:
        raise ConfigurationError(f"invalid parameters: {problems}")
    mode = Mode(mode)
    m = Modulus(ps.p)
    if mode is Mode.REAL:
        a = ZqMatrix(uniform_residues((ps.v, ps.u), ps.q, rng), ps.q)
        return Crs(a, ps, mode, Language(language))
    tm = trap_gen(ps.v, ps.u, m, rng)
    if tm.radius < ps.dec_star:
        raise ConfigurationError("trapdoor decoding radius is below the largest relaxed bound")
    return Crs(tm.A, ps, mode, Language(language), tm)

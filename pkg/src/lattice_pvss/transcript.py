"""Public record of one protocol run, stored as versioned `key = value` text.

Binary payloads (keys, ciphertext parts, proofs) are lowercase hex; residues
use the fixed little-endian width of the modulus.  The record holds no secret
material, so anyone can recompute every verdict from it.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .modmath import ConfigurationError, decode_residues, residues_to_bytes
from .params import ParamSet
from .pke import Ciphertext

FORMAT_VERSION = 1
HEADER = "# lattice-pvss transcript"


class TranscriptFormatError(ValueError):
    """The transcript text is truncated, malformed or inconsistent."""


def params_digest(ps: ParamSet) -> str:
    return hashlib.sha256(ps.to_text().encode()).hexdigest()


@dataclass
class PartyRecord:
    pid: int
    pk: np.ndarray
    key_proof: bytes
    key_ok: bool


@dataclass
class DealerRecord:
    ciphertexts: list[Ciphertext]
    proof: bytes
    ok: bool


@dataclass
class RevealRecord:
    index: int  # position in the qualified set, from 1
    share: int
    proof: bytes
    ok: bool


@dataclass
class PvssTranscript:
    params_digest: str
    setup_seed: bytes
    parties: list[PartyRecord] = field(default_factory=list)
    qualified: list[int] = field(default_factory=list)  # original ids; position j is index j + 1
    dealer: DealerRecord | None = None
    reveals: list[RevealRecord] = field(default_factory=list)
    reconstruct_set: list[int] = field(default_factory=list)
    secret: int | None = None

    def party(self, pid: int) -> PartyRecord:
        return next(p for p in self.parties if p.pid == pid)

    def qualified_keys(self) -> list[np.ndarray]:
        return [self.party(pid).pk for pid in self.qualified]

    def to_text(self, width: int) -> str:
        lines = [HEADER, f"format = {FORMAT_VERSION}", f"params.digest = {self.params_digest}",
                 f"setup.seed = {self.setup_seed.hex()}", f"parties = {len(self.parties)}"]
        for p in self.parties:
            lines += [f"party.{p.pid}.pk = {residues_to_bytes(p.pk, width).hex()}",
                      f"party.{p.pid}.key_proof = {p.key_proof.hex()}",
                      f"party.{p.pid}.key_ok = {int(p.key_ok)}"]
        lines.append(f"qualified = {_ints(self.qualified)}")
        if self.dealer is not None:
            for j, ct in enumerate(self.dealer.ciphertexts, start=1):
                lines += [f"dealer.{j}.c1 = {residues_to_bytes(ct.c1, width).hex()}",
                          f"dealer.{j}.c2 = {residues_to_bytes([ct.c2], width).hex()}"]
            lines += [f"dealer.proof = {self.dealer.proof.hex()}", f"dealer.ok = {int(self.dealer.ok)}"]
            for r in self.reveals:
                lines += [f"reveal.{r.index}.share = {r.share}",
                          f"reveal.{r.index}.proof = {r.proof.hex()}",
                          f"reveal.{r.index}.ok = {int(r.ok)}"]
            lines.append(f"reconstruct.set = {_ints(self.reconstruct_set)}")
            lines.append(f"reconstruct.secret = {'refused' if self.secret is None else self.secret}")
        lines.append("end")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, ps: ParamSet, width: int) -> "PvssTranscript":
        fields = _parse_lines(text)
        try:
            return _build(fields, ps, width)
        except ConfigurationError:
            raise
        except (KeyError, ValueError) as exc:
            raise TranscriptFormatError(f"bad transcript: {exc}") from exc


def _ints(values) -> str:
    return ",".join(str(int(v)) for v in values)


def _parse_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",")] if text else []


def _parse_lines(text: str) -> dict[str, str]:
    lines = text.splitlines()
    if not lines or lines[0] != HEADER:
        raise TranscriptFormatError("missing transcript header")
    if lines[-1] != "end":
        raise TranscriptFormatError("transcript is truncated")
    out: dict[str, str] = {}
    for line in lines[1:-1]:
        key, sep, value = line.partition(" = ")
        if not sep or key in out:
            raise TranscriptFormatError(f"malformed or repeated line: {line[:60]!r}")
        out[key] = value
    return out


def _flag(value: str) -> bool:
    if value not in ("0", "1"):
        raise ValueError(f"verdict must be 0 or 1, got {value!r}")
    return value == "1"


def _build(f: dict[str, str], ps: ParamSet, width: int) -> PvssTranscript:
    if f.pop("format") != str(FORMAT_VERSION):
        raise ValueError("unsupported transcript format")
    q = ps.q
    digest = f.pop("params.digest")
    if digest != params_digest(ps):
        # checked first: residues under foreign parameters would look malformed
        raise ConfigurationError("transcript was produced under different parameters")
    tr = PvssTranscript(digest, bytes.fromhex(f.pop("setup.seed")))
    count = int(f.pop("parties"))
    for pid in range(1, count + 1):
        pk = decode_residues(bytes.fromhex(f.pop(f"party.{pid}.pk")), width, q)
        proof = bytes.fromhex(f.pop(f"party.{pid}.key_proof"))
        tr.parties.append(PartyRecord(pid, pk, proof, _flag(f.pop(f"party.{pid}.key_ok"))))
    tr.qualified = _parse_ints(f.pop("qualified"))
    if "dealer.proof" in f:
        cts = []
        for j in range(1, len(tr.qualified) + 1):
            c1 = decode_residues(bytes.fromhex(f.pop(f"dealer.{j}.c1")), width, q)
            c2 = decode_residues(bytes.fromhex(f.pop(f"dealer.{j}.c2")), width, q)
            if c2.shape != (1,):
                raise ValueError("ciphertext scalar has the wrong length")
            cts.append(Ciphertext(c1, int(c2[0])))
        tr.dealer = DealerRecord(cts, bytes.fromhex(f.pop("dealer.proof")), _flag(f.pop("dealer.ok")))
        for j in range(1, len(tr.qualified) + 1):
            if f"reveal.{j}.share" in f:
                tr.reveals.append(RevealRecord(j, int(f.pop(f"reveal.{j}.share")),
                                               bytes.fromhex(f.pop(f"reveal.{j}.proof")),
                                               _flag(f.pop(f"reveal.{j}.ok"))))
        tr.reconstruct_set = _parse_ints(f.pop("reconstruct.set"))
        secret = f.pop("reconstruct.secret")
        tr.secret = None if secret == "refused" else int(secret)
    if f:
        raise ValueError(f"unexpected entries: {sorted(f)[:3]}")
    return tr

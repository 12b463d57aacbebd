"""Non-interactive proofs from the three Σ-protocols.

Each proof runs `reps` binary-challenge repetitions in parallel.  Challenges
come from a SHAKE-256 oracle over the CRS digest, the statement and every
first message.  That makes this a random-oracle heuristic and not a
standard-model compiler.  Rejection is bundled: if the joint response
is rejected, the prover recommits all repetitions.

Wire format (all integers big-endian unless noted)::

    version      1 byte   (= 1)
    language     1 byte   (key = 1, enc = 2, dec = 3)
    reps         2 bytes
    per repetition:
        len      4 bytes, then the first message
        len      4 bytes, then the response

Messages are sequences of residues mod q, each stored little-endian in
ceil(bits(q) / 8) bytes.  Signed response entries are stored as their
residue and read back centered.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import sigma_dec, sigma_key, sigma_share
from .crs import Crs, Language
from .sampler import RejectionConfig

WIRE_VERSION = 1
MAX_RESTARTS = 1024
_DOMAIN = b"lattice-pvss/challenge/v1"


class ProverError(RuntimeError):
    """The prover could not produce a proof (bad witness or restart cap hit)."""


@dataclass(frozen=True)
class Protocol:
    language: Language
    statement_bytes: Callable[[Crs, Any], bytes]
    commit: Callable[[Crs, Any, np.random.Generator, int], tuple[Any, Any]]
    respond: Callable[[Crs, Any, Any, Any, RejectionConfig, np.random.Generator], Any]
    verify: Callable[[Crs, Any, Any, Any, Any], bool]
    rejection_config: Callable[[Crs, Any, int], RejectionConfig]
    check_witness: Callable[[Crs, Any, Any], bool]
    first_bytes: Callable[[Crs, Any, int], bytes]
    response_bytes: Callable[[Crs, Any, int], bytes]
    first_from: Callable[[Crs, Any, list], Any]
    response_from: Callable[[Crs, Any, list], Any]


PROTOCOLS: dict[Language, Protocol] = {
    Language.KEY: Protocol(
        Language.KEY,
        sigma_key.statement_bytes,
        lambda crs, stmt, rng, reps: sigma_key.key_commit(crs, rng, reps),
        lambda crs, stmt, state, c, wit, cfg, rng: sigma_key.key_respond(state, c, wit, cfg, rng),
        sigma_key.key_verify,
        lambda crs, stmt, reps: sigma_key.rejection_config(crs, reps),
        sigma_key.check_witness,
        sigma_key.first_bytes,
        sigma_key.response_bytes,
        lambda crs, stmt, chunks: sigma_key.first_from_bytes(crs, chunks),
        lambda crs, stmt, chunks: sigma_key.response_from_bytes(crs, chunks),
    ),
    Language.ENC: Protocol(
        Language.ENC,
        sigma_share.statement_bytes,
        sigma_share.share_commit,
        lambda crs, stmt, state, c, wit, cfg, rng: sigma_share.share_respond(state, c, wit, cfg, rng, crs.p),
        sigma_share.share_verify,
        lambda crs, stmt, reps: sigma_share.rejection_config(crs, reps, stmt.n),
        sigma_share.check_witness,
        sigma_share.first_bytes,
        sigma_share.response_bytes,
        lambda crs, stmt, chunks: sigma_share.first_from_bytes(crs, chunks, stmt.n),
        lambda crs, stmt, chunks: sigma_share.response_from_bytes(crs, chunks, stmt.n),
    ),
    Language.DEC: Protocol(
        Language.DEC,
        sigma_dec.statement_bytes,
        sigma_dec.dec_commit,
        lambda crs, stmt, state, c, wit, cfg, rng: sigma_dec.dec_respond(state, c, wit, cfg, rng),
        sigma_dec.dec_verify,
        lambda crs, stmt, reps: sigma_dec.rejection_config(crs, reps),
        sigma_dec.check_witness,
        sigma_dec.first_bytes,
        sigma_dec.response_bytes,
        lambda crs, stmt, chunks: sigma_dec.first_from_bytes(crs, chunks),
        lambda crs, stmt, chunks: sigma_dec.response_from_bytes(crs, chunks),
    ),
}


@dataclass(frozen=True)
class NizkProof:
    language: Language
    reps: int
    first: Any
    response: Any
    restarts: int = 0
    # encoded first messages, kept so they are serialized only once
    first_raw: tuple[bytes, ...] | None = field(default=None, repr=False, compare=False)


def _prefixed(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def derive_challenges(crs: Crs, language: Language | str, statement: bytes,
                      firsts: list[bytes], reps: int) -> np.ndarray:
    """`reps` challenge bits, deterministic in every input byte."""
    language = Language(language)
    h = hashlib.shake_256()
    h.update(_DOMAIN)
    h.update(bytes([language.tag]))
    h.update(crs.digest)
    h.update(struct.pack(">H", reps))
    h.update(_prefixed(statement))
    for chunk in firsts:
        h.update(_prefixed(chunk))
    raw = np.frombuffer(h.digest((reps + 7) // 8), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:reps].astype(np.int64)


def _first_chunks(crs: Crs, proto: Protocol, first, reps: int) -> list[bytes]:
    return [proto.first_bytes(crs, first, j) for j in range(reps)]


def _challenges_for(crs: Crs, proto: Protocol, stmt, firsts: list[bytes], reps: int) -> np.ndarray:
    return derive_challenges(crs, proto.language, proto.statement_bytes(crs, stmt), firsts, reps)


def nizk_prove(crs: Crs, stmt, wit, language: Language | str, rng: np.random.Generator,
               reps: int | None = None, check_witness: bool = True,
               max_restarts: int = MAX_RESTARTS) -> NizkProof:
    """Prove membership; `check_witness=False` lets test harnesses run a cheating prover."""
    proto = PROTOCOLS[Language(language)]
    reps = crs.params.reps if reps is None else reps
    if check_witness and not proto.check_witness(crs, stmt, wit):
        raise ProverError(f"witness does not satisfy the {proto.language.value} relation")
    cfg = proto.rejection_config(crs, stmt, reps)
    for attempt in range(max_restarts + 1):
        state, first = proto.commit(crs, stmt, rng, reps)
        raw = _first_chunks(crs, proto, first, reps)
        c = _challenges_for(crs, proto, stmt, raw, reps)
        resp = proto.respond(crs, stmt, state, c, wit, cfg, rng)
        if resp is not None:
            return NizkProof(proto.language, reps, first, resp, attempt, tuple(raw))
    raise ProverError(f"rejection restarts exceeded {max_restarts}")


def nizk_verify(crs: Crs, stmt, proof: NizkProof | bytes, language: Language | str) -> bool:
    """Re-derive the challenges and check every repetition; malformed input is rejected."""
    proto = PROTOCOLS[Language(language)]
    try:
        if isinstance(proof, (bytes, bytearray)):
            # decoding enforces canonical encodings, so the raw chunks are safe to hash
            proof = proof_from_bytes(crs, stmt, bytes(proof), proto.language)
            raw = list(proof.first_raw)
        else:
            raw = _first_chunks(crs, proto, proof.first, proof.reps)
        if proof.language is not proto.language or proof.reps != crs.params.reps:
            return False
        c = _challenges_for(crs, proto, stmt, raw, proof.reps)
        return bool(proto.verify(crs, stmt, proof.first, c, proof.response))
    except (ValueError, IndexError, TypeError):
        return False


def proof_to_bytes(crs: Crs, proof: NizkProof) -> bytes:
    proto = PROTOCOLS[proof.language]
    out = [bytes([WIRE_VERSION, proof.language.tag]), struct.pack(">H", proof.reps)]
    raw = proof.first_raw or _first_chunks(crs, proto, proof.first, proof.reps)
    for j in range(proof.reps):
        out.append(_prefixed(raw[j]))
        out.append(_prefixed(proto.response_bytes(crs, proof.response, j)))
    return b"".join(out)


def proof_from_bytes(crs: Crs, stmt, data: bytes, language: Language | str) -> NizkProof:
    """Decode a proof; raises ValueError on any structural problem."""
    language = Language(language)
    proto = PROTOCOLS[language]
    if len(data) < 4 or data[0] != WIRE_VERSION:
        raise ValueError("unknown proof version")
    if data[1] != language.tag:
        raise ValueError("proof is for another language")
    (reps,) = struct.unpack(">H", data[2:4])
    if reps == 0:
        raise ValueError("proof has no repetitions")
    pos, firsts, resps = 4, [], []
    for _ in range(reps):
        for sink in (firsts, resps):
            if pos + 4 > len(data):
                raise ValueError("truncated proof")
            (length,) = struct.unpack(">I", data[pos : pos + 4])
            pos += 4
            if pos + length > len(data):
                raise ValueError("truncated proof")
            sink.append(data[pos : pos + length])
            pos += length
    if pos != len(data):
        raise ValueError("trailing bytes after proof")
    return NizkProof(language, reps, proto.first_from(crs, stmt, firsts),
                     proto.response_from(crs, stmt, resps), first_raw=tuple(firsts))

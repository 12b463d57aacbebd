"""Seeded end-to-end runs with scripted misbehaviour, and public re-verification.

The broadcast channel is the transcript itself: every phase appends its
public messages and the verdicts any observer would reach.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .crs import Language
from .modmath import ConfigurationError, uniform_residues
from .nizk import NizkProof, nizk_prove, proof_to_bytes
from .params import ParamSet
from .pke import KeyPair, pke_dec
from .pvss import (
    PvssPublicParams,
    encrypt_shares,
    pvss_combine,
    pvss_dec,
    pvss_dec_ver,
    pvss_keygen,
    pvss_keyver,
    pvss_setup_from_seed,
    pvss_share,
    pvss_share_ver,
    share_statement,
)
from .shamir import sss_share
from .sigma_dec import DecStatement, DecWitness
from .sigma_key import KeyStatement, key_simulate
from .transcript import DealerRecord, PartyRecord, PvssTranscript, RevealRecord, params_digest

SCENARIOS = ("honest", "bad-key", "off-code-dealer", "wrong-reveal", "garbage-proof", "silent")


@dataclass(frozen=True)
class Scenario:
    name: str
    corrupted: tuple[int, ...]
    seed: int

    def __post_init__(self) -> None:
        if self.name not in SCENARIOS:
            raise ConfigurationError(f"unknown scenario {self.name!r}; choose from {', '.join(SCENARIOS)}")


def make_scenario(name: str, ps: ParamSet, seed: int) -> Scenario:
    """Corrupt t parties (chosen from the seed) unless only the dealer misbehaves."""
    if name in ("honest", "off-code-dealer"):
        return Scenario(name, (), seed)
    pick = np.random.default_rng([seed, 0x5eed])
    chosen = sorted(int(i) + 1 for i in pick.choice(ps.n, size=ps.t, replace=False))
    return Scenario(name, tuple(chosen), seed)


@dataclass
class RunResult:
    scenario: Scenario
    transcript: PvssTranscript
    dealer_secret: int
    expected: bool
    notes: list[str] = field(default_factory=list)

    def summary(self) -> str:
        tr = self.transcript
        keys = sum(p.key_ok for p in tr.parties)
        dealer = "none" if tr.dealer is None else ("accepted" if tr.dealer.ok else "disqualified")
        reveals = sum(r.ok for r in tr.reveals)
        if tr.dealer is None or not tr.dealer.ok:
            out = "none"
        else:
            out = "refused" if tr.secret is None else str(tr.secret)
        status = "expected" if self.expected else "UNEXPECTED"
        return (f"scenario={self.scenario.name} seed={self.scenario.seed} keys_ok={keys}/{len(tr.parties)} "
                f"dealer={dealer} reveals_ok={reveals}/{len(tr.reveals)} reconstructed={out} "
                f"secret={self.dealer_secret} outcome={status}")


# ---------------------------------------------------------------- misbehaviour


def forged_key(pp: PvssPublicParams, rng: np.random.Generator) -> tuple[np.ndarray, bytes]:
    """Uniform b with a simulated proof for guessed challenges; accepted only if the guess hits."""
    ps = pp.params
    b = uniform_residues(ps.u, ps.q, rng)
    guess = rng.integers(0, 2, ps.reps)
    sim = None
    while sim is None:
        sim = key_simulate(pp.crs_key, KeyStatement(b), guess, rng)
    d, _, resp = sim
    proof = NizkProof(Language.KEY, ps.reps, d, resp)
    return b, proof_to_bytes(pp.crs_key, proof)


def off_code_sharing(pp: PvssPublicParams, pks, secret: int, rng: np.random.Generator):
    """Shares with one entry moved off the code, proved with the honest algorithm anyway."""
    ps = pp.params
    sv, _ = sss_share(secret, len(pks), ps.t, ps.p, rng)
    shares = list(sv.shares)
    victim = int(rng.integers(0, len(shares)))
    shares[victim] = (shares[victim] + 1) % ps.p
    cts, wit = encrypt_shares(pp, pks, shares, rng)
    proof = nizk_prove(pp.crs_enc, share_statement(pp, pks, cts), wit, Language.ENC, rng, check_witness=False)
    return cts, proof_to_bytes(pp.crs_enc, proof)


def wrong_reveal(pp: PvssPublicParams, kp: KeyPair, ct, rng: np.random.Generator) -> tuple[int, bytes]:
    """Reveal share + 1 and run the honest prover on the true witness."""
    res = pke_dec(pp.A, kp.pk, kp.sk, ct, pp.pke)
    claimed = (res.m + 1) % pp.params.p
    stmt = DecStatement(kp.pk, ct.c1, ct.c2, claimed)
    proof = nizk_prove(pp.crs_dec, stmt, DecWitness(kp.sk, kp.e, res.f), Language.DEC, rng, check_witness=False)
    return claimed, proof_to_bytes(pp.crs_dec, proof)


def garbage_reveal(pp: PvssPublicParams, kp: KeyPair, ct, rng: np.random.Generator) -> tuple[int, bytes]:
    """A wrong share with a well-framed proof full of random bytes."""
    res = pke_dec(pp.A, kp.pk, kp.sk, ct, pp.pke)
    ps = pp.params
    width = pp.crs_dec.modulus.width
    body = b"".join(
        struct.pack(">I", width * (ps.u + 1)) + rng.bytes(width * (ps.u + 1))
        + struct.pack(">I", width * (ps.u + ps.v + 1)) + rng.bytes(width * (ps.u + ps.v + 1))
        for _ in range(ps.reps)
    )
    header = bytes([1, Language.DEC.tag]) + struct.pack(">H", ps.reps)
    return (res.m + 1) % ps.p, header + body


# ---------------------------------------------------------------- runs


def run_scenario(ps: ParamSet, scenario: Scenario) -> RunResult:
    rng = np.random.default_rng(scenario.seed)
    setup_seed = rng.bytes(32)
    pp = pvss_setup_from_seed(ps, setup_seed)
    tr = PvssTranscript(params_digest(ps), setup_seed)
    bad = set(scenario.corrupted)
    name = scenario.name

    keypairs: dict[int, KeyPair] = {}
    for pid in range(1, ps.n + 1):
        if name == "bad-key" and pid in bad:
            pk, proof = forged_key(pp, rng)
        else:
            kp, proof = pvss_keygen(pp, rng)
            keypairs[pid], pk = kp, kp.pk
        tr.parties.append(PartyRecord(pid, pk, proof, pvss_keyver(pp, pk, proof)))
    tr.qualified = [p.pid for p in tr.parties if p.key_ok]

    secret = int(uniform_residues(1, ps.p, rng)[0])
    pks = tr.qualified_keys()
    if len(pks) <= ps.t:
        return _finish(scenario, tr, secret)
    if name == "off-code-dealer":
        cts, proof = off_code_sharing(pp, pks, secret, rng)
    else:
        cts, proof = pvss_share(pp, pks, secret, rng)
    tr.dealer = DealerRecord(cts, proof, pvss_share_ver(pp, pks, cts, proof))
    if not tr.dealer.ok:
        return _finish(scenario, tr, secret)

    for j, pid in enumerate(tr.qualified, start=1):
        kp, ct = keypairs[pid], cts[j - 1]
        if pid in bad and name == "silent":
            continue
        if pid in bad and name == "wrong-reveal":
            share, proof = wrong_reveal(pp, kp, ct, rng)
        elif pid in bad and name == "garbage-proof":
            share, proof = garbage_reveal(pp, kp, ct, rng)
        else:
            share, proof = pvss_dec(pp, kp, ct, rng)
        tr.reveals.append(RevealRecord(j, share, proof, pvss_dec_ver(pp, kp.pk, ct, share, proof)))
    _reconstruct(pp, tr)
    return _finish(scenario, tr, secret)


def _reconstruct(pp: PvssPublicParams, tr: PvssTranscript) -> None:
    good = [r for r in tr.reveals if r.ok]
    tr.reconstruct_set = [r.index for r in good]
    tr.secret = pvss_combine(pp, tr.reconstruct_set, [r.share for r in good], len(tr.qualified))


def _finish(scenario: Scenario, tr: PvssTranscript, secret: int) -> RunResult:
    notes = expectation_failures(scenario, tr, secret)
    return RunResult(scenario, tr, secret, not notes, notes)


def expectation_failures(scenario: Scenario, tr: PvssTranscript, secret: int) -> list[str]:
    """Differences between the run and the scenario's expected outcome."""
    bad = set(scenario.corrupted)
    name = scenario.name
    notes = []
    for p in tr.parties:
        want = not (name == "bad-key" and p.pid in bad)
        if p.key_ok != want:
            notes.append(f"party {p.pid} key verdict {p.key_ok}")
    if name == "off-code-dealer":
        if tr.dealer is None or tr.dealer.ok:
            notes.append("off-code dealer was not disqualified")
        return notes
    if tr.dealer is None or not tr.dealer.ok:
        return notes + ["honest dealer was disqualified"]
    for r in tr.reveals:
        pid = tr.qualified[r.index - 1]
        cheats = pid in bad and name in ("wrong-reveal", "garbage-proof")
        if r.ok == cheats:
            notes.append(f"reveal by party {pid} verdict {r.ok}")
    if tr.secret != secret:
        notes.append(f"reconstructed {tr.secret} instead of {secret}")
    return notes


def verify_transcript(ps: ParamSet, tr: PvssTranscript) -> list[str]:
    """Recompute every verdict from public data; returns the mismatches."""
    if tr.params_digest != params_digest(ps):
        raise ConfigurationError("transcript was produced under different parameters")
    pp = pvss_setup_from_seed(ps, tr.setup_seed)
    out = []
    if [p.pid for p in tr.parties] != list(range(1, len(tr.parties) + 1)):
        out.append("party ids are not 1..n")
    for p in tr.parties:
        if pvss_keyver(pp, p.pk, p.key_proof) != p.key_ok:
            out.append(f"party {p.pid} key verdict does not reproduce")
    if tr.qualified != [p.pid for p in tr.parties if p.key_ok]:
        out.append("qualified set does not match the key verdicts")
        return out
    if tr.dealer is None:
        if len(tr.qualified) > ps.t:
            out.append("dealer record missing")
        return out
    pks = tr.qualified_keys()
    if pvss_share_ver(pp, pks, tr.dealer.ciphertexts, tr.dealer.proof) != tr.dealer.ok:
        out.append("dealer verdict does not reproduce")
    if not tr.dealer.ok:
        if tr.reveals:
            out.append("reveals recorded after the dealer was disqualified")
        return out
    for r in tr.reveals:
        ct = tr.dealer.ciphertexts[r.index - 1]
        if pvss_dec_ver(pp, pks[r.index - 1], ct, r.share, r.proof) != r.ok:
            out.append(f"reveal {r.index} verdict does not reproduce")
    good = [r for r in tr.reveals if r.ok]
    if tr.reconstruct_set != [r.index for r in good]:
        out.append("reconstruction set does not match the reveal verdicts")
    elif tr.secret != pvss_combine(pp, tr.reconstruct_set, [r.share for r in good], len(tr.qualified)):
        out.append("reconstructed secret does not reproduce")
    return out

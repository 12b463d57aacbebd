import re
import shutil
import subprocess

import pytest

from lattice_pvss.cli import SEED_ENV, build_parser, main
from lattice_pvss.harness import make_scenario, run_scenario, verify_transcript
from lattice_pvss.modmath import Modulus
from lattice_pvss.transcript import PvssTranscript, TranscriptFormatError

DESK_FLAGS = ["--n", "8", "--t", "3", "--v", "16", "--reps", "16"]


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("cli")


@pytest.fixture(scope="module")
def params_file(workdir):
    path = workdir / "desk.params"
    assert main(["params", *DESK_FLAGS, "--out", str(path)]) == 0
    return path


@pytest.fixture(scope="module")
def honest_transcript(workdir, params_file):
    path = workdir / "honest.txt"
    assert main(["run", "--params", str(params_file), "--scenario", "honest", "--seed", "7", "--out", str(path)]) == 0
    return path


def _verify(params_file, path):
    return main(["verify", "--params", str(params_file), "--transcript", str(path)])


def test_params_file_is_reproducible(workdir, params_file):
    again = workdir / "again.params"
    assert main(["params", *DESK_FLAGS, "--out", str(again)]) == 0
    assert again.read_bytes() == params_file.read_bytes()
    assert "p = 4280433918413770177" in params_file.read_text()


def test_params_to_stdout(capsys):
    assert main(["params", *DESK_FLAGS]) == 0
    assert "sigma_dec = 376767370678833" in capsys.readouterr().out


@pytest.mark.parametrize("flags", [["--n", "8", "--t", "4"], ["--n", "8", "--t", "3", "--max-q-bits", "90"],
                                   ["--n", "8", "--t", "3", "--reps", "80", "--max-q-bits", "136"],
                                   ["--n", "8"]])
def test_params_configuration_errors(flags):
    assert main(["params", *flags]) == 2


def test_honest_run_reverifies(params_file, honest_transcript, capsys):
    assert _verify(params_file, honest_transcript) == 0
    assert capsys.readouterr().out.startswith("ok:")


def test_run_summary(params_file, capsys):
    assert main(["run", "--params", str(params_file), "--seed", "7"]) == 0
    line = capsys.readouterr().out.splitlines()[0]
    fields = dict(kv.split("=") for kv in line.split())
    assert fields["reconstructed"] == fields["secret"]
    assert fields["outcome"] == "expected"


def test_runs_are_byte_identical(workdir, params_file, honest_transcript):
    again = workdir / "honest-again.txt"
    assert main(["run", "--params", str(params_file), "--seed", "7", "--out", str(again)]) == 0
    assert again.read_bytes() == honest_transcript.read_bytes()


def test_flipped_proof_nibble(workdir, params_file, honest_transcript):
    text = honest_transcript.read_text()
    m = re.search(r"^party\.3\.key_proof = ", text, re.M)
    pos = m.end() + 400
    flipped = text[:pos] + format(int(text[pos], 16) ^ 0x8, "x") + text[pos + 1 :]
    path = workdir / "flipped.txt"
    path.write_text(flipped)
    assert _verify(params_file, path) == 1


def test_flipped_verdict(workdir, params_file, honest_transcript):
    path = workdir / "verdict.txt"
    path.write_text(honest_transcript.read_text().replace("reveal.2.ok = 1", "reveal.2.ok = 0"))
    assert _verify(params_file, path) == 1


def test_truncated_and_garbage_files(workdir, params_file, honest_transcript):
    text = honest_transcript.read_text()
    short = workdir / "short.txt"
    short.write_text(text[: len(text) // 2])
    assert _verify(params_file, short) == 3
    junk = workdir / "junk.txt"
    junk.write_bytes(b"\xff\xfe\x00")
    assert _verify(params_file, junk) == 3
    missing = workdir / "missing-line.txt"
    missing.write_text("\n".join(line for line in text.splitlines() if not line.startswith("dealer.ok")) + "\n")
    assert _verify(params_file, missing) == 3
    assert _verify(params_file, workdir / "absent.txt") == 3


def test_bad_params_file(workdir, honest_transcript):
    bad = workdir / "bad.params"
    bad.write_text("n = 8\n")
    assert _verify(bad, honest_transcript) == 2
    assert _verify(workdir / "nope.params", honest_transcript) == 2


def test_transcript_under_other_params(workdir, honest_transcript):
    other = workdir / "other.params"
    assert main(["params", "--n", "4", "--t", "1", "--out", str(other)]) == 0
    assert _verify(other, honest_transcript) == 2


@pytest.mark.parametrize("scenario, dealer", [("off-code-dealer", "disqualified"), ("wrong-reveal", "accepted")])
def test_misbehaving_runs(workdir, params_file, capsys, scenario, dealer):
    out = workdir / f"{scenario}.txt"
    assert main(["run", "--params", str(params_file), "--scenario", scenario, "--seed", "3", "--out", str(out)]) == 0
    summary = capsys.readouterr().out
    assert f"dealer={dealer}" in summary
    if scenario == "wrong-reveal":
        fields = dict(kv.split("=") for kv in summary.splitlines()[0].split())
        assert fields["reconstructed"] == fields["secret"]
        assert fields["reveals_ok"] == "5/8"
    assert _verify(params_file, out) == 0


def test_unknown_scenario():
    assert main(["run", "--params", "x", "--scenario", "nope"]) == 2


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv(SEED_ENV, "41")
    args = build_parser().parse_args(["run", "--params", "x"])
    assert args.seed == 41


def test_transcript_text_roundtrip(desk, honest_transcript):
    width = Modulus(desk.p).width
    text = honest_transcript.read_text()
    tr = PvssTranscript.from_text(text, desk, width)
    assert tr.to_text(width) == text
    assert verify_transcript(desk, tr) == []
    with pytest.raises(TranscriptFormatError):
        PvssTranscript.from_text(text.replace("format = 1", "format = 9"), desk, width)


def test_silent_and_bad_key_scenarios(desk):
    for name in ("silent", "bad-key"):
        sc = make_scenario(name, desk, 11)
        assert len(sc.corrupted) == desk.t
        res = run_scenario(desk, sc)
        assert res.expected, res.notes
        assert verify_transcript(desk, res.transcript) == []


@pytest.mark.skipif(shutil.which("lattice-pvss") is None, reason="console script not installed")
def test_console_script(tmp_path):
    out = subprocess.run(["lattice-pvss", "params", "--n", "4", "--t", "1"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("n = 4")

import json

import pytest

from mqpc.cli import UsageError, main, parse_config, write_transcript
from mqpc.protocol import PartySecret, SessionConfig, run_session


def test_flags_only():
    cfg = parse_config("run --d 5 --n 4 --L 8 --seed 7 --secrets 13,13,13,13".split())
    assert (cfg.d, cfg.n, cfg.L, cfg.seed) == (5, 4, 8, 7)
    assert cfg.secrets == [13, 13, 13, 13]
    assert cfg.session_config().decoys == 8


def test_file_then_flag_override(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"d": 3, "n": 2, "L": 4, "seed": 9}))
    cfg = parse_config(["run", "--config", str(path), "--d", "5"])
    assert (cfg.d, cfg.n, cfg.L, cfg.seed) == (5, 2, 4, 9)


@pytest.mark.parametrize(
    "argv,field",
    [
        ("run --n 4 --d 5 --secrets 1,2,3", "secrets"),
        ("run --d 3 --n 3", "d"),
        ("run --L 2 --secrets 1,2,9", "secrets"),
        ("run --L 0", "L"),
        ("audit collusion --target 5", "target"),
    ],
)
def test_usage_errors_name_the_field(argv, field):
    with pytest.raises(UsageError) as info:
        parse_config(argv.split())
    assert info.value.field == field


def test_bad_config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("{not json")
    with pytest.raises(UsageError):
        parse_config(["run", "--config", str(path)])
    path.write_text(json.dumps({"dimension": 3}))
    with pytest.raises(UsageError) as info:
        parse_config(["run", "--config", str(path)])
    assert info.value.field == "dimension"


def test_usage_error_exit_and_no_artifacts(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--n", "4", "--d", "5", "--secrets", "1,2,3", "--out", str(out)]) == 2
    assert not out.exists()
    assert "secrets" in capsys.readouterr().err
    assert main(["frobnicate"]) == 2


def test_run_equal_secrets(tmp_path):
    out = tmp_path / "run"
    assert main(["run", "--secrets", "5,5,5", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["verdict"] == "AllEqual"
    assert summary["particles_created"] == 10 * 8
    lines = (out / "transcript.jsonl").read_text().splitlines()
    assert json.loads(lines[0])["seed"] == 0


def test_run_aborted_exit_code(tmp_path):
    argv = ["run", "--secrets", "1,1,1", "--L", "1", "--decoys", "32",
            "--attack", "measure-resend", "--out", str(tmp_path)]
    assert main(argv) == 1


def test_run_to_stdout(capsys):
    assert main(["run", "--secrets", "1,2,3", "--L", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "NotAllEqual"


def test_oracle_check(capsys):
    assert main(["oracle-check", "--d", "2", "--n", "3"]) == 0
    captured = capsys.readouterr()
    assert "all 256 branches matched" in captured.err
    assert json.loads(captured.out)["matched"] == 256


def test_soundness_audit_fails(capsys):
    assert main(["audit", "soundness", "--d", "2", "--n", "3", "--L", "1"]) == 3
    record = json.loads(capsys.readouterr().out)
    assert [1, 1, 0] in record["false_equal_cases"]


def test_efficiency_command(capsys):
    assert main(["efficiency", "--n", "3"]) == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert rows[0]["eta"] == "1/10"


def test_attack_command(capsys):
    assert main(["attack", "--d", "2", "--trials", "2000", "--L", "1"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["expected"] == 0.25
    assert record["decoys_checked"] == 2000


def test_io_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["efficiency", "--out", str(blocker / "sub")]) == 4


def test_write_transcript_header_only(tmp_path):
    res = run_session(SessionConfig(2, 3, 1), [PartySecret((0,))] * 3)
    path = tmp_path / "t.jsonl"
    write_transcript(res.transcript, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["config"]["d"] == 2


def _swap_events(path):
    return [json.loads(x) for x in path.read_text().splitlines()[1:] if '"swap"' in x]


def test_write_transcript_seeds(tmp_path):
    secrets = [PartySecret.from_int(x, 4) for x in (3, 3, 9)]
    for name, seed in [("a", 1), ("b", 1), ("c", 2)]:
        res = run_session(SessionConfig(4, 3, 4, seed=seed), secrets)
        write_transcript(res.transcript, tmp_path / f"{name}.jsonl")
    a, b, c = (tmp_path / f"{x}.jsonl" for x in "abc")
    assert a.read_bytes() == b.read_bytes()
    ka = [(e["payload"]["k"], e["payload"]["l"]) for e in _swap_events(a)]
    kc = [(e["payload"]["k"], e["payload"]["l"]) for e in _swap_events(c)]
    assert ka != kc


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--L", "3"],
        ["attack", "--d", "3", "--trials", "300"],
        ["audit", "leakage", "--d", "3", "--n", "2", "--L", "1"],
        ["efficiency", "--n", "4"],
    ],
)
def test_same_seed_same_bytes(tmp_path, argv):
    codes = [main(argv + ["--seed", "42", "--out", str(tmp_path / x)]) for x in "ab"]
    assert codes[0] == codes[1]
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

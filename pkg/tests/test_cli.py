"""Command line front end, run in-process against a live bridge."""

from __future__ import annotations

import io
import json
import re
import socket

import pytest

from conftest import make_stack
from lightbridge.cli import main


@pytest.fixture
def stack():
    s = make_stack()
    yield s
    s.stop()


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def pair_via_cli(capsys, stack) -> str:
    code, out, _ = run_cli(
        capsys,
        [
            "pair",
            "--user",
            "demo",
            "--pass",
            "demo",
            "--device",
            "bulb-1",
            "--api",
            stack.base_url,
        ],
    )
    assert code == 0
    match = re.search(r"pairing code: (\d{5})", out)
    assert match, out
    assert "device: Living Room" in out
    return match.group(1)


def test_pair_set_get_round_trip(capsys, stack):
    code = pair_via_cli(capsys, stack)

    rc, out, _ = run_cli(
        capsys, ["set", "--code", code, "--cue", "blue", "--api", stack.base_url]
    )
    assert rc == 0
    assert "desired revision: 1" in out

    rc, out, _ = run_cli(capsys, ["get", "--code", code, "--api", stack.base_url])
    assert rc == 0
    state = json.loads(out)
    assert state["desired"] == {
        "power": True,
        "hue": 240,
        "saturation": 100,
        "brightness": 60,
    }
    assert state["desired_revision"] == 1


def test_api_error_exits_3(capsys, stack):
    rc, _, err = run_cli(
        capsys, ["get", "--code", "00000", "--api", stack.base_url]
    )
    assert rc == 3
    assert "unknown_code" in err


def test_unreachable_api_exits_4(capsys):
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()  # nobody is listening here any more
    rc, _, err = run_cli(
        capsys, ["get", "--code", "00001", "--api", f"http://127.0.0.1:{port}"]
    )
    assert rc == 4
    assert err.strip()


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["set", "--code", "00001"])
    assert excinfo.value.code == 2


def test_bad_cue_name_rejected(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["set", "--code", "00001", "--cue", "mauve"])
    assert excinfo.value.code == 2


def test_scripted_play_session(capsys, stack, monkeypatch):
    code = pair_via_cli(capsys, stack)
    # start, gesture, two question/hold rounds, then quit
    monkeypatch.setattr("sys.stdin", io.StringIO("\n\n\n\n\n\nq\n"))
    rc, out, _ = run_cli(
        capsys,
        [
            "play",
            "--code",
            code,
            "--seed",
            "42",
            "--api",
            stack.base_url,
            "--test-mode",
        ],
    )
    assert rc == 0
    assert out.startswith("~ the spirits gather ~")
    assert out.rstrip().endswith("~ the spirits have departed ~")
    # seed 42 answers YES then NO
    yes = out.index("the spirits say YES (green)")
    no = out.index("the spirits say NO (red)")
    assert yes < no
    cues = re.findall(r"> cue (\w+)", out)
    assert cues == [
        "SpookyAmbiance",
        "Listening",
        "AnswerYes",
        "Listening",
        "AnswerNo",
        "Listening",
        "Restore",
    ]
    assert "light out of sync" not in out


def test_play_quit_immediately(capsys, stack, monkeypatch):
    code = pair_via_cli(capsys, stack)
    monkeypatch.setattr("sys.stdin", io.StringIO("q\n"))
    rc, out, _ = run_cli(
        capsys,
        ["play", "--code", code, "--api", stack.base_url, "--test-mode"],
    )
    assert rc == 0
    assert re.findall(r"> cue (\w+)", out) == ["Restore"]


def test_play_unknown_code_exits_3(capsys, stack, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("q\n"))
    rc, _, err = run_cli(
        capsys, ["play", "--code", "00000", "--api", stack.base_url]
    )
    assert rc == 3
    assert "unknown_code" in err

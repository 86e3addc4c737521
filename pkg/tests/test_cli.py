import json
import math
import re
import shlex
from pathlib import Path

import numpy as np
import pytest

from qchaos import cli, purification
from qchaos.cli import main, parse_angle, parse_complex, parse_point, parse_size
from qchaos.exceptions import DegenerateMeasurement
from qchaos.purification import make_initial_rho0
from qchaos.sphere import INF

README = Path(__file__).resolve().parents[1] / "README.md"

PURIFY_PI4 = ["purify", "--x1", "0.25pi", "--x2", "0.25pi", "--phi1", "0.25pi",
              "--phi2", "0.25pi", "--rho0", "paper"]


@pytest.mark.parametrize("text, expected", [
    ("1+0.5i", 1 + 0.5j), ("0", 0j), ("-2", -2 + 0j), ("0.5i", 0.5j),
    ("-1.5e-3-2i", -1.5e-3 - 2j), (" 3-.25i ", 3 - 0.25j), ("+1", 1 + 0j),
])
def test_parse_complex(text, expected):
    assert parse_complex(text) == expected


@pytest.mark.parametrize("text", ["0.293pi", "", "i", "1+i", "1 + 2i", "inf", "nan", "1j", "2+3"])
def test_parse_complex_rejects(text):
    with pytest.raises(ValueError, match=re.escape(repr(text))):
        parse_complex(text)


def test_parse_point():
    assert parse_point("inf") is INF
    assert parse_point("2-1i") == 2 - 1j


@pytest.mark.parametrize("text, expected", [
    ("0.293pi", 0.293 * math.pi), ("0", 0.0), ("0.25pi", math.pi / 4), ("1.5", 1.5),
    ("-0.5pi", -math.pi / 2),
])
def test_parse_angle(text, expected):
    assert parse_angle(text) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("text", ["pi", "0.25 pi", "1e", "x"])
def test_parse_angle_rejects(text):
    with pytest.raises(ValueError):
        parse_angle(text)


def test_parse_size():
    assert parse_size("400x300") == (400, 300)
    for bad in ["400", "0x5", "4x-1", "axb"]:
        with pytest.raises(ValueError):
            parse_size(bad)


def test_no_arguments_is_usage_error(capsys):
    assert main([]) == 1
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["julia", "--p", "1"],
    ["julia", "--p", "1x", "--out", "a.pgm"],
    ["julia", "--p", "1", "--size", "0x4", "--out", "a.pgm"],
    ["julia", "--p", "1", "--eps", "-1", "--out", "a.pgm"],
    ["orbit", "--p", "1", "--z0", "0", "--steps", "0"],
    ["purify", "--x1", "1", "--x2", "1", "--phi1", "1", "--phi2", "x", "--steps", "3",
     "--out", "a.csv"],
])
def test_bad_flags_exit_1(argv, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 1
    assert "error" in capsys.readouterr().err
    assert not list(tmp_path.iterdir())


def test_help_lists_defaults(capsys):
    with pytest.raises(SystemExit) as info:
        cli.build_parser().parse_args(["julia", "--help"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    assert "1e-06" in out and "500" in out and "2.0" in out


def test_julia_writes_pgm_and_sidecar(tmp_path):
    out = tmp_path / "j.pgm"
    assert main(["julia", "--p", "1", "--size", "40x30", "--out", str(out)]) == 0
    data = out.read_bytes()
    assert data.startswith(b"P5\n40 30\n255\n")
    assert len(data) == len(b"P5\n40 30\n255\n") + 40 * 30
    side = json.loads(Path(f"{out}.json").read_text())
    assert side["command"] == "julia"
    assert side["parameters"]["eps"] == 1e-6 and side["parameters"]["max_iter"] == 500
    assert side["parameters"]["half_width"] == 2.0 and side["parameters"]["center"] == [0, 0]
    assert side["cycles"][0]["points"] == [[-1, 0], "inf"]


def test_julia_threads_do_not_change_bytes(tmp_path):
    outs = []
    for threads in ("1", "3", "8"):
        out = tmp_path / f"j{threads}.pgm"
        args = ["julia", "--p", "1+0.5i", "--size", "64x64", "--threads", threads,
                "--out", str(out), "--dump-grid", str(tmp_path / f"g{threads}.json")]
        assert main(args) == 0
        outs.append((out.read_bytes(), (tmp_path / f"g{threads}.json").read_bytes()))
    assert outs[0] == outs[1] == outs[2]


def test_julia_repeated_runs_identical(tmp_path):
    a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
    for out in (a, b):
        assert main(["julia", "--p", "0.5", "--size", "50x50", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_julia_dump_grid_matches_image(tmp_path):
    out, dump = tmp_path / "j.pgm", tmp_path / "g.json"
    assert main(["julia", "--p", "1", "--size", "8x6", "--max-iter", "100",
                 "--out", str(out), "--dump-grid", str(dump)]) == 0
    steps = np.array(json.loads(dump.read_text())["steps"])
    img = np.frombuffer(out.read_bytes()[-48:], dtype=np.uint8).reshape(6, 8)
    assert np.array_equal(img == 255, steps < 0)


def test_julia_unwritable_output(tmp_path, capsys):
    assert main(["julia", "--p", "1", "--size", "4x4",
                 "--out", str(tmp_path / "nope" / "j.pgm")]) == 1
    assert "nope" in capsys.readouterr().err


def test_cycles_without_convergence_exit_3(capsys):
    assert main(["cycles", "--p", "0.5", "--max-iter", "1"]) == 3
    assert "no attracting cycle" in capsys.readouterr().err


def test_julia_without_cycle_exit_3(tmp_path):
    # p = -0.2+i: neither critical orbit settles within the default budget
    assert main(["julia", "--p=-0.2+1i", "--size", "4x4", "--out", str(tmp_path / "x.pgm")]) == 3


def test_orbit_json(capsys):
    assert main(["orbit", "--p", "1", "--z0", "0", "--steps", "3"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["points"] == [[0, 0], [1, 0], "inf", [-1, -0.0]]


def test_cycles_json(capsys):
    assert main(["cycles", "--p", "1+0.1i"]) == 0
    (cyc,) = json.loads(capsys.readouterr().out)["cycles"]
    assert cyc["period"] == 2 and 0 < cyc["multiplier_magnitude"] < 1


def test_lyapunov_json(capsys):
    assert main(["lyapunov", "--p", "0", "--doubling", "--steps", "20000"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["value"] == pytest.approx(math.log(2), abs=1e-12)
    assert obj["n"] == 20000 and not obj["attracting"]
    assert main(["lyapunov", "--p", "1", "--z0", "0"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["clamped"] and obj["attracting"]


def _read_csv(path):
    lines = Path(path).read_bytes().decode("utf-8").split("\n")
    assert lines[-1] == "" and "\r" not in "".join(lines)
    assert lines[0] == "step,fidelity,purity,success_probability"
    return np.array([[float(v) for v in line.split(",")] for line in lines[1:-1]])


def test_purify_documented_run(tmp_path):
    out = tmp_path / "t.csv"
    assert main(PURIFY_PI4 + ["--steps", "40", "--out", str(out)]) == 0
    rows = _read_csv(out)
    assert rows.shape == (41, 4)
    assert np.array_equal(rows[:, 0], np.arange(41))
    even = rows[0::2, 1]
    assert even[0] == pytest.approx(0.895, abs=1e-12)
    assert np.all(np.diff(even) > -1e-12) and even[-1] > 1 - 1e-12
    side = json.loads(Path(f"{out}.json").read_text())
    assert side["degenerate"] is False and side["breakdown_step"] is None
    assert side["parameters"]["phase_scale"] == 2.0


def test_purify_chaotic_breakdown_in_sidecar(tmp_path):
    out = tmp_path / "c.csv"
    args = ["purify", "--x1", "0.293pi", "--x2", "0.293pi", "--phi1", "0.25pi",
            "--phi2", "0.25pi", "--steps", "300", "--out", str(out)]
    assert main(args) == 0
    assert isinstance(json.loads(Path(f"{out}.json").read_text())["breakdown_step"], int)


def test_purify_rho0_file(tmp_path):
    state = tmp_path / "s.json"
    state.write_text(json.dumps(make_initial_rho0().to_json()))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(PURIFY_PI4 + ["--steps", "6", "--out", str(a)]) == 0
    args = [x if x != "paper" else str(state) for x in PURIFY_PI4]
    assert main(args + ["--steps", "6", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("content", [
    "not json",
    json.dumps({"dim": 2, "entries": [[0.5, 0], [0, 0], [0, 0], [0.5, 0]]}),
    json.dumps({"dim": 4, "entries": [[0.5, 0]] * 16}),
])
def test_purify_bad_rho0_exit_1(tmp_path, content, capsys):
    state = tmp_path / "s.json"
    state.write_text(content)
    args = [x if x != "paper" else str(state) for x in PURIFY_PI4]
    assert main(args + ["--steps", "2", "--out", str(tmp_path / "o.csv")]) == 1
    assert "error" in capsys.readouterr().err


def test_purify_missing_rho0_exit_1(tmp_path):
    args = [x if x != "paper" else str(tmp_path / "missing.json") for x in PURIFY_PI4]
    assert main(args + ["--steps", "2", "--out", str(tmp_path / "o.csv")]) == 1


def test_purify_degenerate_exit_2(tmp_path, monkeypatch):
    # a valid state never yields a zero-probability outcome, so inject one
    def degenerate(rho):
        raise DegenerateMeasurement("probability 0")

    monkeypatch.setattr(purification, "squaring_map", degenerate)
    out = tmp_path / "d.csv"
    assert main(PURIFY_PI4 + ["--steps", "5", "--out", str(out)]) == 2
    assert _read_csv(out).shape == (1, 4)
    assert json.loads(Path(f"{out}.json").read_text())["degenerate"] is True


def _readme_commands():
    text = README.read_text(encoding="utf-8")
    cmds = re.findall(r"^\$ qchaos (.+)$", text, flags=re.M)
    state = re.search(r"`state\.json`:\s*```json\n(.*?)```", text, flags=re.S).group(1)
    return cmds, state


def test_readme_has_examples():
    cmds, _ = _readme_commands()
    assert len(cmds) >= 8
    assert {c.split()[0] for c in cmds} == set(cli.COMMANDS)


@pytest.mark.parametrize("command", _readme_commands()[0])
def test_readme_example_runs(command, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "state.json").write_text(_readme_commands()[1])
    assert main(shlex.split(command)) == 0

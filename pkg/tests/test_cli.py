import json

import pytest

from infointegrate.cli import RunConfig, main
from infointegrate.demo import load_demonstration


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


@pytest.mark.parametrize("name", ["mission1", "mission2", "mission3"])
def test_record_demo_bundled(tmp_path, name):
    assert main(["record-demo", "--map", name, "--out", str(tmp_path / "d")]) == 0
    demo = load_demonstration(tmp_path / "d")
    assert demo.map_id == name and demo.L > 0


def test_record_demo_is_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert main(["record-demo", "--map", "mission1", "--seed", "4", "--out",
                     str(tmp_path / d)]) == 0
    assert _files(tmp_path / "a") == _files(tmp_path / "b")


def test_missing_map_exits_2(tmp_path, capsys):
    assert main(["record-demo", "--map", str(tmp_path / "none.map"), "--out",
                 str(tmp_path / "d")]) == 2
    assert "error" in capsys.readouterr().err


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["run-mission", "--alg", "3", "--demo", "x"])
    assert exc.value.code == 2


@pytest.fixture(scope="module")
def openroom_demo(tmp_path_factory):
    d = tmp_path_factory.mktemp("demo")
    assert main(["record-demo", "--map", "openroom", "--out", str(d)]) == 0
    return d


@pytest.mark.parametrize("extra", [[], ["--alg", "1"], ["--baseline"]])
def test_run_mission_outputs(tmp_path, openroom_demo, extra):
    args = ["run-mission", "--demo", str(openroom_demo), "--seed", "1"] + extra
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a = _files(tmp_path / "a")
    assert set(a) == {"report.json", "trajectory.svg"}
    assert a == _files(tmp_path / "b")
    report = json.loads(a["report.json"])
    assert report["U"] == "success"


def test_run_mission_corrupt_demo_exits_2(tmp_path):
    (tmp_path / "d").mkdir()
    assert main(["run-mission", "--demo", str(tmp_path / "d"), "--out", str(tmp_path / "o")]) == 2


def test_config_overrides_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"stride": 2, "map": "mission1"}))
    assert main(["record-demo", "--map", "nope", "--stride", "5", "--config", str(cfg), "--out",
                 str(tmp_path / "d")]) == 0
    assert load_demonstration(tmp_path / "d").stride == 2
    assert main(["record-demo", "--map", "mission1", "--stride", "5", "--out",
                 str(tmp_path / "e")]) == 0
    assert load_demonstration(tmp_path / "e").stride == 5


@pytest.mark.parametrize("content", ["{bad json", "[1, 2]", '{"unknown_key": 1}',
                                     '{"sigma": -1}'])
def test_bad_config_exits_2(tmp_path, content):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(content)
    assert main(["record-demo", "--map", "mission1", "--config", str(cfg), "--out",
                 str(tmp_path / "d")]) == 2


def test_run_config_validation():
    assert RunConfig().search.n_avg == 3
    for bad in (dict(sigma=0), dict(n_avg=-1), dict(seed=-2), dict(g_profile="x"),
                dict(hp_sources=())):
        with pytest.raises(ValueError):
            RunConfig(**bad)


def test_scaling_csv(tmp_path):
    assert main(["scaling", "--sizes", "--out", str(tmp_path / "e.csv")]) == 0
    assert (tmp_path / "e.csv").read_text() == "L,agent_interactions,baseline_interactions\n"
    assert main(["scaling", "--sizes", "10", "--out", str(tmp_path / "a.csv")]) == 0
    assert main(["scaling", "--sizes", "10", "--out", str(tmp_path / "b.csv")]) == 0
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert len(lines) == 2
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_causal_json(tmp_path):
    assert main(["causal", "--seed", "0", "--out", str(tmp_path / "a.json")]) == 0
    assert main(["causal", "--seed", "0", "--out", str(tmp_path / "b.json")]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    res = json.loads((tmp_path / "a.json").read_text())
    for key in ("g_rel_l2_error", "prediction_rel_l2_error", "rms_transferred", "rms_naive"):
        assert key in res
    assert res["prediction_rel_l2_error"] <= 0.05


def test_causal_to_stdout(capsys):
    assert main(["causal", "--hp-sources", "60", "120", "--hp-target", "90"]) == 0
    assert json.loads(capsys.readouterr().out)["rms_ratio"] < 0.5


def test_demo_noise_sigma_changes_frames_only(tmp_path):
    assert main(["record-demo", "--map", "mission1", "--out", str(tmp_path / "a")]) == 0
    assert main(["record-demo", "--map", "mission1", "--demo-noise-sigma", "0.1", "--out",
                 str(tmp_path / "b")]) == 0
    a, b = load_demonstration(tmp_path / "a"), load_demonstration(tmp_path / "b")
    assert a.positions == b.positions
    assert a != b
    with pytest.raises(ValueError):
        RunConfig(demo_noise_sigma=-0.1)

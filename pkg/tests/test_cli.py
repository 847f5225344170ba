import csv
import json

import numpy as np
import pytest

from uavplace.cli import circle_polyline, cmd_export, cmd_generate, cmd_place, cmd_sweep, main
from uavplace.results import dumps_result, load_result
from uavplace.scenario import generate, make_scenario, flash_crowd, save_scenario, write_ues


def spec_doc(n_each=60, background=60):
    return {
        "area": {"width": 1200, "height": 1200},
        "hotspots": [{"center": c, "std_dev": 60, "count": n_each}
                     for c in ([0, 400], [500, 500], [500, 100], [820, 200])],
        "background_count": background,
    }


@pytest.fixture(scope="module")
def placed(tmp_path_factory):
    d = tmp_path_factory.mktemp("run")
    write_ues(generate(flash_crowd(300), seed=2), d / "ues.csv")
    assert cmd_place(d / "ues.csv", d / "r.json", seed=2) == 0
    return d


def test_generate_writes_n_lines(tmp_path):
    (tmp_path / "spec.json").write_text(json.dumps(spec_doc()))
    assert cmd_generate(tmp_path / "spec.json", tmp_path / "a.csv", 1) == 0
    assert cmd_generate(tmp_path / "spec.json", tmp_path / "b.csv", 1) == 0
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines[0] == "id,x,y" and len(lines) == 301
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_generate_zero_count(tmp_path):
    (tmp_path / "spec.json").write_text(json.dumps(spec_doc(0, 0)))
    assert cmd_generate(tmp_path / "spec.json", tmp_path / "a.csv", 1) == 2


def test_generate_bad_json(tmp_path):
    (tmp_path / "spec.json").write_text("{nope")
    assert cmd_generate(tmp_path / "spec.json", tmp_path / "a.csv", 1) == 2


def test_place_summary_and_result(placed, capsys):
    assert cmd_place(placed / "ues.csv", placed / "r2.json", seed=2) == 0
    fields = capsys.readouterr().out.strip().split("\t")
    assert len(fields) == 4
    result, ue = load_result(placed / "r2.json")
    assert int(fields[0]) == result.k >= 1 and int(fields[2]) == 0
    assert (placed / "r.json").read_bytes() == (placed / "r2.json").read_bytes()


def test_result_round_trip(placed):
    result, ue = load_result(placed / "r.json")
    assert dumps_result(result, ue) == (placed / "r.json").read_text()


def test_place_exhausted_exit_3(tmp_path):
    pts = np.array([[10.0, 10.0], [1190.0, 1190.0], [10.0, 1190.0]])
    write_ues(pts, tmp_path / "u.csv")
    code = cmd_place(tmp_path / "u.csv", tmp_path / "r.json", overrides=["radio.k_max=0"])
    assert code == 3
    result, _ = load_result(tmp_path / "r.json")
    assert result.status == "fleet-exhausted"


def test_place_parse_error(tmp_path):
    (tmp_path / "u.csv").write_text("x,y\n1,2\n")
    assert cmd_place(tmp_path / "u.csv", tmp_path / "r.json") == 2
    assert cmd_place(tmp_path / "missing.csv", tmp_path / "r.json") == 2
    write_ues(np.array([[1.0, 1.0]]), tmp_path / "ok.csv")
    assert cmd_place(tmp_path / "ok.csv", tmp_path / "r.json", overrides=["radio.zz=1"]) == 2


def test_export_tables(placed):
    out = placed / "map"
    assert cmd_export(placed / "r.json", "csv", out, resolution=32) == 0
    result, ue = load_result(placed / "r.json")
    ues = list(csv.DictReader((out / "ues.csv").open()))
    uavs = list(csv.DictReader((out / "uavs.csv").open()))
    circles = list(csv.DictReader((out / "circles.csv").open()))
    assert len(ues) == len(ue) and len(uavs) == result.k
    for j in range(result.k):
        assert sum(1 for c in circles if int(c["uav"]) == j) == 32
    # every UE is GBS-served or inside the disc of its UAV
    for row in ues:
        s = int(row["serving"])
        assert s >= 0
        if s > 0:
            u = uavs[s - 1]
            r = np.hypot(float(row["x"]) - float(u["x"]), float(row["y"]) - float(u["y"]))
            assert r <= float(u["radius"]) + 1e-6


def test_export_marks_unserved(tmp_path):
    pts = np.array([[10.0, 10.0], [1190.0, 1190.0]])
    write_ues(pts, tmp_path / "u.csv")
    cmd_place(tmp_path / "u.csv", tmp_path / "r.json", overrides=["radio.k_max=0"])
    assert cmd_export(tmp_path / "r.json", "tsv", tmp_path / "m") == 0
    rows = list(csv.DictReader((tmp_path / "m" / "ues.tsv").open(), delimiter="\t"))
    assert {r["serving"] for r in rows} == {"-1"}


def test_export_unknown_format(placed):
    assert cmd_export(placed / "r.json", "xml", placed / "m") == 2


def test_circle_polyline_on_circle():
    pts = circle_polyline(3.0, 4.0, 5.0, 12)
    assert len(pts) == 12
    assert np.allclose([np.hypot(x - 3, y - 4) for x, y in pts], 5.0)


def test_sweep(tmp_path):
    d = tmp_path / "scen"
    d.mkdir()
    for n, seed in ((200, 0), (250, 1)):
        save_scenario(make_scenario(generate(flash_crowd(n), seed=seed), seed=seed), d / f"n{n}.json")
    (d / "broken.json").write_text("{")
    assert cmd_sweep(d, tmp_path / "table.tsv") == 0
    rows = list(csv.DictReader((tmp_path / "table.tsv").open(), delimiter="\t"))
    assert [r["scenario"] for r in rows] == ["broken.json", "n200.json", "n250.json"]
    assert rows[0]["status"] == "error" and rows[0]["error"]
    for r in rows[1:]:
        assert float(r["sumrate_with_uav"]) > float(r["sumrate_without_uav"])
        assert int(r["k"]) >= 1
    assert (tmp_path / "table_results" / "n200.result.json").exists()


def test_sweep_empty_dir(tmp_path):
    assert cmd_sweep(tmp_path, tmp_path / "t.tsv") == 2


def test_main_dispatch(tmp_path, capsys):
    (tmp_path / "spec.json").write_text(json.dumps(spec_doc(10, 10)))
    assert main(["generate", str(tmp_path / "spec.json"), "--out", str(tmp_path / "u.csv")]) == 0
    with pytest.raises(SystemExit):
        main(["bogus"])

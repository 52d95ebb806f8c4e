import json
import re

import pytest

from serrin_lab.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert re.fullmatch(r"\d+\.\d+\.\d+\n", capsys.readouterr().out)


def test_radial_singular_values(capsys):
    code, out, _ = run(["radial", "--nl", "p_laplacian", "--p", "3", "--n", "2", "--R", "1", "--c", "1",
                        "--singular-value"], capsys)
    assert code == 0
    m = re.fullmatch(r"finite M=(\S+)\n", out)
    assert m and abs(float(m.group(1)) - 2.0) <= 1e-6
    code, out, _ = run(["radial", "--p", "2", "--n", "2", "--R", "1", "--c", "1", "--singular-value"], capsys)
    assert code == 0 and out == "infinite\n"


def test_radial_csv_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["radial", "--p", "3", "--n", "2", "--R", "1", "--c", "1", "--emit", "csv", "--points", "50"]
    assert run(base + ["--out", str(a)], capsys)[0] == 0
    assert run(base + ["--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "r,v,v_prime,first_integral_defect" and len(lines) == 51
    # atomic writes leave no temporary files behind
    assert sorted(q.name for q in tmp_path.iterdir()) == ["a.csv", "b.csv"]


def test_validation_exit_codes(tmp_path, capsys):
    assert run(["solve", "--p", "0.5", "--h", "0.01"], capsys)[0] == 2
    assert run(["radial", "--p", "2", "--n", "1", "--R", "1", "--c", "1"], capsys)[0] == 2
    cfg = write_json(tmp_path / "c.json", {"p": 2, "n": 2, "R": 1, "c": 1, "colour": "red"})
    code, _, err = run(["radial", "--config", cfg], capsys)
    assert code == 2 and "colour" in err
    assert run(["moving-plane", "--domain", str(tmp_path / "missing.json")], capsys)[0] == 2


def test_config_merges_under_flags(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"p": 3, "n": 2, "R": 1, "c": 1, "singular_value": True})
    code, out, _ = run(["radial", "--config", cfg], capsys)
    assert code == 0 and out.startswith("finite M=2")
    code, out, _ = run(["radial", "--config", cfg, "--p", "2"], capsys)
    assert code == 0 and out == "infinite\n"


def test_ellipticity(capsys):
    code, out, _ = run(["ellipticity", "--nl", "bounded_gradient", "--p", "4", "--samples", "100"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["pass"] and rep["Lambda_hat"] <= 3.0


def test_moving_plane_csv(tmp_path, capsys):
    dom = write_json(tmp_path / "d.json", {"kind": "ellipse", "center": [0, 0], "semi_axes": [2, 1]})
    out = tmp_path / "mp.csv"
    assert run(["moving-plane", "--domain", dom, "--directions", "8", "--emit", "csv", "--out", str(out)], capsys)[0] == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "xi_x,xi_y,t_plus,t_minus,sum,case,contact_x,contact_y"
    assert len(lines) == 9
    first = lines[1].split(",")
    assert first[:2] == ["1", "0"] and first[5] == "II"


def test_solve_outputs(tmp_path, capsys):
    dom = write_json(tmp_path / "d.json", {"kind": "circle", "center": [0, 0], "radius": 1})
    field, flux = tmp_path / "field.csv", tmp_path / "flux.csv"
    argv = ["solve", "--domain", dom, "--nl", "p_laplacian", "--p", "2", "--delta", "0.1",
            "--inner-value", "auto", "--c", "1", "--h", "0.03125",
            "--emit-field", str(field), "--emit-flux", str(flux)]
    code, out, _ = run(argv, capsys)
    summary = json.loads(out)
    assert code == 0 and summary["converged"] and summary["defect"] <= 0.05
    assert field.read_text().splitlines()[0] == "x,y,u"
    assert flux.read_text().splitlines()[0] == "arc_s,nx,ny,du_dnu"
    first = field.read_bytes()
    run(argv, capsys)
    assert field.read_bytes() == first
    # 17 significant digits
    assert any(len(tok.lstrip("-").replace(".", "").lstrip("0")) >= 15
               for tok in field.read_text().splitlines()[1].split(","))


def test_solve_nonconvergence_exit(tmp_path, capsys):
    dom = write_json(tmp_path / "d.json", {"kind": "circle", "center": [0, 0], "radius": 1})
    code, _, err = run(["solve", "--domain", dom, "--p", "3", "--h", "0.03125", "--max-iter", "1"], capsys)
    assert code == 3 and "did not converge" in err


def test_verify_commands(tmp_path, capsys):
    fw = write_json(tmp_path / "fw.json", {"R": 1, "c": 1, "nl": {"kind": "p_laplacian", "p": 2},
                                           "h_ladder": [0.03125, 0.015625], "n_directions": 4})
    out = tmp_path / "r.json"
    code, _, err = run(["verify", "forward", "--config", fw, "--out", str(out)], capsys)
    assert code == 0 and "ConsistentWithTheorem" in err
    report = json.loads(out.read_text())
    assert report["schema"] == "serrin-lab/report/v1"
    out2 = tmp_path / "r2.json"
    run(["verify", "forward", "--config", fw, "--out", str(out2)], capsys)
    assert out.read_bytes() == out2.read_bytes()

    ct = write_json(tmp_path / "ct.json", {
        "domain": {"kind": "ellipse", "center": [0, 0], "semi_axes": [2, 1]},
        "nl": {"kind": "p_laplacian", "p": 2}, "h_ladder": [0.03125, 0.015625],
        "separation": 1e9, "n_directions": 0})
    assert run(["verify", "contrapositive", "--config", ct, "--out", str(tmp_path / "c.json")], capsys)[0] == 4

    nc = write_json(tmp_path / "nc.json", {"R": 1, "nl": {"kind": "p_laplacian", "p": 3},
                                           "h_ladder": [0.03125, 0.015625], "n_directions": 0,
                                           "solver": {"max_iter": 1}})
    assert run(["verify", "forward", "--config", nc, "--out", str(tmp_path / "n.json")], capsys)[0] == 3

    sw = write_json(tmp_path / "sw.json", {"domain": {"kind": "circle", "center": [0.3, 0], "radius": 1},
                                           "n_directions": 8})
    code, out, _ = run(["verify", "sweep", "--config", sw], capsys)
    assert code == 0 and json.loads(out)["geometry_summary"]["all_symmetric"]

    bad = write_json(tmp_path / "bad.json", {"R": 1, "bogus": 1})
    assert run(["verify", "forward", "--config", bad], capsys)[0] == 2
    centered = write_json(tmp_path / "cc.json", {"domain": {"kind": "circle", "center": [0, 0], "radius": 1},
                                                 "nl": {"kind": "p_laplacian", "p": 2}, "h_ladder": [0.03125]})
    assert run(["verify", "contrapositive", "--config", centered], capsys)[0] == 2


def test_threads_env(tmp_path, capsys, monkeypatch):
    dom = write_json(tmp_path / "d.json", {"kind": "circle", "center": [0, 0], "radius": 1})
    monkeypatch.setenv("SERRIN_LAB_THREADS", "lots")
    assert run(["moving-plane", "--domain", dom, "--directions", "4"], capsys)[0] == 2
    monkeypatch.setenv("SERRIN_LAB_THREADS", "2")
    code, out, _ = run(["moving-plane", "--domain", dom, "--directions", "4"], capsys)
    assert code == 0 and len(out.splitlines()) == 5

import json

import pytest

from surfdyn.cli import main
from surfdyn.dynamics import verify_period
from surfdyn.surfaces import SurfacePoint, surface_from_json

from conftest import singular_triple

W_POINT = '[["0","1","0"],["1","0","1"]]'


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spectral_wehler(capsys):
    code, out, _ = run(capsys, "spectral", "--preset", "wehler")
    assert code == 0
    assert json.loads(out)["lambda"] == {"a": "7", "b": "4", "d": 3}


def test_spectral_triple(capsys):
    code, out, _ = run(capsys, "spectral", "--preset", "triple")
    data = json.loads(out)
    assert data["lambda"] == {"a": "9", "b": "4", "d": 5}
    assert float(data["lambda_float"]) == pytest.approx(9 + 4 * 5 ** 0.5)


def test_spectral_identity_is_null_entropy(capsys, tmp_path):
    f = tmp_path / "id.json"
    f.write_text(json.dumps({"gram": [[2, 4], [4, 2]], "pullback": [[1, 0], [0, 1]], "ample": [1, 1]}))
    code, _, err = run(capsys, "spectral", "--lattice", str(f))
    assert code == 3 and "entropy" in err


def test_spectral_curves_and_perturbation(capsys, tmp_path):
    f = tmp_path / "lat.json"
    f.write_text(json.dumps({"gram": [[2, 4], [4, 2]], "pullback": [[15, 4], [-4, -1]],
                             "ample": [1, 1], "curves": [[1, -1], [1, 0]]}))
    code, out, _ = run(capsys, "spectral", "--lattice", str(f))
    data = json.loads(out)
    assert code == 0
    assert [t["periodic"] for t in data["curve_tests"]] == [True, False]
    assert data["ample_perturbation"]["Z"] == ["1", "-1"]


def test_spectral_bad_file(capsys, tmp_path):
    f = tmp_path / "bad.json"
    f.write_text("{not json")
    assert run(capsys, "spectral", "--lattice", str(f))[0] == 2


def test_orbit_csv(capsys):
    code, out, err = run(capsys, "orbit", "--preset", "wehler", "--point", W_POINT,
                         "--format", "csv", "--depth", "4")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "T,N,N_plus,Sigma,predicted_N,bracket_lo,bracket_hi,pass"
    assert len(lines) == 10
    assert "h_plus=" in err


def test_orbit_forward_only(capsys):
    code, out, _ = run(capsys, "orbit", "--preset", "wehler", "--point", W_POINT,
                       "--format", "csv", "--forward-only", "--depth", "4")
    assert out.splitlines()[0] == "T,N_plus,predicted_N_plus"


def test_orbit_depth_convergence(capsys):
    _, out3, _ = run(capsys, "orbit", "--preset", "wehler", "--point", W_POINT, "--depth", "3")
    _, out5, _ = run(capsys, "orbit", "--preset", "wehler", "--point", W_POINT, "--depth", "5")
    c3, c5 = json.loads(out3)["canonical"], json.loads(out5)["canonical"]
    assert abs(float(c3["h_D"]) - float(c5["h_D"])) < float(c3["error_bound"])


def test_orbit_off_surface(capsys):
    code, _, _ = run(capsys, "orbit", "--preset", "wehler", "--point", '[["1","2","3"],["1","1","1"]]')
    assert code == 4


def test_orbit_periodic_center(capsys, tmp_path):
    f = tmp_path / "s.json"
    f.write_text(json.dumps(singular_triple().to_json()))
    code, _, _ = run(capsys, "orbit", "--surface", str(f), "--point", '[["1","0"],["1","0"],["1","0"]]')
    assert code == 6


def test_orbit_out_file_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for f in (a, b):
        run(capsys, "orbit", "--preset", "triple", "--point", '[["0","1"],["1","-1"],["1","0"]]',
            "--format", "csv", "--out", str(f), "--threads", "1")
    assert a.read_bytes() == b.read_bytes() and a.stat().st_size > 0


def test_scan_reload_verifies(capsys, tmp_path):
    f = tmp_path / "s.json"
    S = singular_triple()
    f.write_text(json.dumps(S.to_json()))
    code, out, err = run(capsys, "scan", "--surface", str(f), "--height-bound", "1.5")
    data = json.loads(out)
    assert code == 0 and "max periodic height" in err
    S2 = surface_from_json(json.loads(f.read_text()))
    hits = data["scan"]["hits"]
    assert hits
    for h in hits:
        assert verify_period(S2, SurfacePoint.from_json(h["point"]), h["period"])


def test_scan_empty(capsys, tmp_path):
    C = [[[0] * 3 for _ in range(3)] for _ in range(3)]
    for i in (0, 2):
        for j in (0, 2):
            for k in (0, 2):
                C[i][j][k] = 1
    f = tmp_path / "e.json"
    f.write_text(json.dumps({"family": "triple", "C": C}))
    code, out, _ = run(capsys, "scan", "--surface", str(f), "--height-bound", "1")
    data = json.loads(out)
    assert code == 0 and data["points"] == [] and data["scan"]["hits"] == []


def test_scan_deterministic(capsys):
    outs = [run(capsys, "scan", "--preset", "wehler", "--height-bound", "2", "--threads", "1")[1]
            for _ in range(2)]
    assert outs[0] == outs[1]


def test_mobius_commands(capsys):
    code, out, _ = run(capsys, "mobius", "--matrix", "[[2,0],[0,1]]")
    data = json.loads(out)
    assert data["type"] == "II_two_fixed"
    assert data["fixed_points"] == [["1", "0"], ["0", "1"]]
    code, out, _ = run(capsys, "mobius", "--matrix", "[[1,1],[0,1]]", "--point", "[0,1]")
    assert json.loads(out)["regime"] == "exponential"
    code, out, _ = run(capsys, "mobius", "--matrix", "[[0,-1],[1,0]]")
    data = json.loads(out)
    assert data["type"] == "I_periodic" and data["order"] == 2


def test_mobius_csv(capsys):
    code, out, _ = run(capsys, "mobius", "--matrix", "[[2,0],[0,1]]", "--point", "[1,1]",
                       "--format", "csv", "--tmin", "1", "--tmax", "3")
    assert out.splitlines() == ["T,N", "1,3", "2,5", "3,9"]


def test_mobius_singular(capsys):
    assert run(capsys, "mobius", "--matrix", "[[1,2],[2,4]]")[0] == 2


def test_parse_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["orbit", "--depth", "x"])
    assert exc.value.code == 2


def test_precision_env(monkeypatch, capsys):
    monkeypatch.setenv("SURFDYN_PRECISION", "200")
    code, out, _ = run(capsys, "orbit", "--preset", "wehler", "--point", W_POINT, "--depth", "2")
    assert json.loads(out)["canonical"]["precision"] == 200

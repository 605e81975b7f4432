import json
import shutil
import subprocess
import sys
from fractions import Fraction

import pytest

from anglers.cli import main
from anglers.io import canonical

from conftest import DATA


def run(capsys, *argv):
    code = main(["--quiet", *map(str, argv)])
    out = capsys.readouterr().out
    return code, json.loads(out), out


@pytest.fixture
def work(tmp_path):
    for f in DATA.iterdir():
        shutil.copy(f, tmp_path / f.name)
    return tmp_path


def test_validate_codes(capsys, work):
    code, rep, _ = run(capsys, "validate", work / "one_edge.triangulation.json")
    assert code == 0 and rep["valid"]
    assert [e["valence"] for e in rep["edge_classes"]] == [12]
    code, rep, _ = run(capsys, "validate", work / "even_perm.triangulation.json")
    assert code == 1 and not rep["valid"]
    (work / "junk.json").write_text("{not json")
    assert run(capsys, "validate", work / "junk.json")[0] == 2
    assert run(capsys, "validate", work / "missing.json")[0] == 2


def test_output_is_canonical(capsys, work):
    _, rep, raw = run(capsys, "angles", "find", work / "one_edge.triangulation.json")
    assert raw == canonical(rep)
    assert list(rep) == sorted(rep)


def test_find_and_verify_round_trip(capsys, work):
    out = work / "w.angles.json"
    code, rep, _ = run(capsys, "angles", "find", work / "one_edge.triangulation.json", "--out", out)
    assert code == 0 and rep["status"] == "strictly_feasible" and rep["slack"] == "1/6"
    first = out.read_bytes()
    code, rep, _ = run(capsys, "angles", "verify", work / "one_edge.triangulation.json", out)
    assert code == 0 and rep["passed"]
    # rerun gives identical bytes
    run(capsys, "angles", "find", work / "one_edge.triangulation.json", "--out", out)
    assert out.read_bytes() == first
    data = json.loads(first)
    assert all(Fraction(v) == Fraction(1, 6) for v in data["values"].values())


def test_find_writes_certificate(capsys, work):
    cert = work / "c.json"
    code, rep, _ = run(capsys, "angles", "find", work / "valence_two.triangulation.json", "--certificate", cert)
    assert code == 1 and rep["status"] != "strictly_feasible"
    data = json.loads(cert.read_text())
    assert data["verified"] is True


def test_float_find_agrees(capsys, work):
    code, rep, _ = run(capsys, "angles", "find", "--no-exact", work / "valence_eight.triangulation.json")
    assert code == 0 and abs(rep["slack"] - 0.25) < 1e-9
    code, _, _ = run(capsys, "angles", "find", "--no-exact", work / "valence_two.triangulation.json")
    assert code == 1


def test_find_rejects_unoriented(capsys, work):
    assert run(capsys, "angles", "find", work / "even_perm.triangulation.json")[0] == 2


def test_verify_negative_and_tolerance(capsys, work, monkeypatch):
    tri = work / "one_edge.triangulation.json"
    data = json.loads((work / "one_edge.uniform.angles.json").read_text())
    data["mode"] = "radians"
    import math

    data["values"] = {k: math.pi / 6 + 1e-11 for k in data["values"]}
    bad = work / "bad.angles.json"
    bad.write_text(json.dumps(data))
    code, rep, _ = run(capsys, "angles", "verify", tri, bad)
    assert code == 1 and rep["tolerance"] == 1e-12
    monkeypatch.setenv("ANGLERS_TOL", "1e-8")
    code, rep, _ = run(capsys, "angles", "verify", tri, bad)
    assert code == 0 and rep["tolerance"] == 1e-8
    code, rep, _ = run(capsys, "angles", "verify", tri, bad, "--tol", "1e-14")
    assert code == 1
    monkeypatch.setenv("ANGLERS_TOL", "tiny")
    assert run(capsys, "angles", "verify", tri, bad)[0] == 2


def test_layered_heptagon_has_certified_negative(capsys, work):
    code, rep, _ = run(
        capsys, "layered", "build", work / "heptagon_pyramids.decomposition.json", "--out-dir", work, "--name", "hp"
    )
    assert code == 0 and rep["flat_tetrahedra"] == 3 and rep["tetrahedra"] == 13
    tri, tags = work / "hp.triangulation.json", work / "hp.tags.json"
    assert run(capsys, "validate", tri)[0] == 0
    code, rep, _ = run(capsys, "angles", "find", tri, "--fixed", tags)
    assert code == 1 and rep["certificate"]["verified"] is True


def test_layered_then_perturb_then_volume(capsys, work):
    code, rep, _ = run(capsys, "layered", "build", work / "two_cubes.decomposition.json", "--out-dir", work, "--name", "tc")
    assert code == 0 and rep["flat_tetrahedra"] == sum(rep["flats_per_pairing"]) > 0
    tri, tags = work / "tc.triangulation.json", work / "tc.tags.json"
    code, rep, _ = run(capsys, "angles", "find", tri, "--fixed", tags, "--out", work / "tc.beta.json")
    assert code == 0
    code, rep, _ = run(capsys, "angles", "perturb", tri, work / "tc.beta.json", "--out", work / "tc.angles.json")
    assert code == 0 and rep["verified"]
    t_max = Fraction(rep["t_max"])
    assert Fraction(rep["t"]) == t_max / 2
    assert run(capsys, "angles", "perturb", tri, work / "tc.beta.json", "--t", str(t_max))[0] == 2
    assert run(capsys, "angles", "perturb", tri, work / "tc.beta.json", "--t", "0")[0] == 2
    code, rep, _ = run(capsys, "volume", "eval", tri, work / "tc.angles.json")
    assert code == 0 and rep["volume"] > 0


def test_perturb_needs_tags(capsys, work):
    code, _, _ = run(
        capsys, "angles", "perturb", work / "one_edge.triangulation.json", work / "one_edge.uniform.angles.json"
    )
    assert code == 2


def test_layered_geometric(capsys, work):
    code, rep, _ = run(
        capsys, "layered", "build", work / "two_cubes.decomposition.json", "--geometry", "--out-dir", work, "--name", "c"
    )
    assert code == 0 and "beta" in rep["files"]
    code, rep, _ = run(capsys, "angles", "perturb", work / "c.triangulation.json", work / "c.beta.json")
    assert code == 0 and rep["verified"]


def test_layered_diagonal_miss_is_negative(capsys, work):
    data = json.loads((work / "two_cubes.decomposition.json").read_text())
    for cell in data["cells"]:
        cell["vertices"] = [[1.0] + [3 * x for x in v[1:]] for v in cell["vertices"]]
    path = work / "far.json"
    path.write_text(json.dumps(data))
    code, rep, _ = run(capsys, "layered", "build", path, "--geometry", "--out-dir", work)
    assert code == 1 and "misses hyperbolic space" in rep["error"]


def test_layered_bad_input(capsys, work):
    data = json.loads((work / "heptagon_pyramids.decomposition.json").read_text())
    data["pairings"] = []
    path = work / "open.json"
    path.write_text(json.dumps(data))
    assert run(capsys, "layered", "build", path, "--out-dir", work)[0] == 2


def test_volume_commands(capsys, work):
    tri, ang = work / "valence_eight.triangulation.json", work / "valence_eight.uniform.angles.json"
    code, rep, _ = run(capsys, "volume", "eval", tri, ang)
    assert code == 0
    code, rep2, _ = run(capsys, "volume", "maximize", tri, ang, "--out", work / "m.json")
    assert code == 0 and rep2["status"] == "critical"
    assert rep2["volume"] >= rep["volume"] - 1e-12
    # a non-strict start is an input error
    assert run(capsys, "volume", "eval", work / "one_edge.triangulation.json", ang)[0] == 2


def test_threads_flag(capsys, work):
    tri, ang = work / "valence_eight.triangulation.json", work / "valence_eight.uniform.angles.json"
    a = run(capsys, "volume", "eval", tri, ang)[2]
    b = main(["--quiet", "--threads", "4", "volume", "eval", str(tri), str(ang)])
    assert b == 0 and capsys.readouterr().out == a
    assert main(["--threads", "0", "validate", str(tri)]) == 2


def test_surface_check_codes(capsys, work):
    tri, ang = work / "one_edge.triangulation.json", work / "one_edge.uniform.angles.json"
    code, rep, _ = run(capsys, "surface", "check", tri, ang, work / "one_edge.tube.surface.json")
    assert code == 0 and rep["verdict"] == "tube" and rep["chi_combinatorial"] == "0"
    code, rep, _ = run(capsys, "surface", "check", tri, ang, work / "one_edge.boundary.surface.json")
    assert code == 0 and rep["verdict"] == "negative"
    data = json.loads((work / "one_edge.tube.surface.json").read_text())
    data["disks"][0]["corners"] = [data["disks"][0]["corners"][0]] * 3
    bad = work / "bad.surface.json"
    bad.write_text(json.dumps(data))
    code, rep, _ = run(capsys, "surface", "check", tri, ang, bad)
    assert code == 1 and not rep["admissible"]


def test_usage_errors(capsys):
    assert main(["angles"]) == 2
    assert main(["nonsense"]) == 2
    assert main(["--version"]) == 0


def test_console_script(work):
    exe = shutil.which("anglers")
    cmd = [exe] if exe else [sys.executable, "-m", "anglers.cli"]
    proc = subprocess.run(cmd + ["validate", str(work / "one_edge.triangulation.json")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["valid"] is True
    assert "e0: valence 12" in proc.stderr

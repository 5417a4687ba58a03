import json
import subprocess
import sys
from pathlib import Path

import pytest

from builders import crossing, nf_example
from trusskit import io
from trusskit.cli import main
from trusskit.ops import grid
from trusskit.truss import OPEN

FIX = Path(__file__).parent / "fixtures"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_grid_and_validate(capsys, tmp_path):
    code, out, _ = run(capsys, "grid", "1,1")
    assert code == 0
    doc = json.loads(out)
    T = io.truss_from_json(doc)
    assert T == grid(OPEN, 1, 1) and T.size() == 9
    path = tmp_path / "g.json"
    path.write_text(out)
    code, out, _ = run(capsys, "validate", path)
    assert code == 0 and json.loads(out) == {"valid": True, "violations": []}


def test_broken_functoriality_is_reported(capsys):
    code, out, _ = run(capsys, "validate", FIX / "broken_functoriality.json")
    assert code == 1
    rep = json.loads(out)
    assert rep["valid"] is False and rep["violations"][0]["law"] == "functoriality"
    code, _, _ = run(capsys, "normalize", FIX / "broken_functoriality.json")
    assert code == 1


def test_malformed_input_exits_two(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "validate", bad)[0] == 2
    assert run(capsys, "validate", tmp_path / "missing.json")[0] == 2
    bad.write_text(json.dumps({"kind": "sideways", "levels": []}))
    assert run(capsys, "validate", bad)[0] == 2
    assert run(capsys, "grid", "1,x")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_normalize_example(capsys):
    code, out, _ = run(capsys, "normalize", FIX / "nf_example.json")
    assert code == 0
    nf = io.truss_from_json(json.loads(out))
    assert nf.fibers[0][0] == 2
    assert [nf.labels[x] for x in nf.top.elements] == [1, 0, 1, 0, 1]
    code, out, _ = run(capsys, "normalize", "--witness", FIX / "nf_example.json")
    doc = json.loads(out)
    assert set(doc) == {"nf", "witness"}
    code, out2, _ = run(capsys, "normalize", "--oracle", FIX / "nf_example.json")
    assert io.truss_from_json(json.loads(out2)) == nf


def test_round_trip_through_json():
    for T in [nf_example(), grid(OPEN, 2, 1), io.load_truss(FIX / "crossing.json")]:
        assert io.truss_from_json(json.loads(io.dumps(io.truss_to_json(T)))) == T
    d = io.diagram_from_json(io.load_json(FIX / "cube_diagram.json"))
    assert io.diagram_from_json(io.diagram_to_json(d)).S == d.S


def test_dualize_compactify_atoms_stype(capsys, tmp_path):
    code, out, _ = run(capsys, "dualize", FIX / "crossing.json")
    assert code == 0 and json.loads(out)["kind"] == "closed"
    code, out, _ = run(capsys, "compactify", FIX / "crossing.json")
    assert code == 0 and json.loads(out)["levels"][0]["fibers"]["*"] == 2
    code, out, _ = run(capsys, "atoms", FIX / "crossing.json")
    rep = json.loads(out)
    assert len(rep) == 9 and rep["s0/s0"]["stype"] == [1, 1]
    code, out, _ = run(capsys, "stype", FIX / "crossing.json")
    assert code == 0 and json.loads(out)["stype"] == [1, 1]
    code, out, _ = run(capsys, "stype", FIX / "nf_example.json")
    assert code == 1


def test_checks(capsys, tmp_path):
    assert run(capsys, "check-diagrammatic", FIX / "crossing.json")[0] == 0
    bad = tmp_path / "bad.json"
    bad.write_text(io.dumps(io.truss_to_json(crossing(germs=1))))
    code, out, _ = run(capsys, "check-diagrammatic", bad)
    assert code == 1 and json.loads(out)["failures"] == ["s0/r0", "s0/r1"]
    code, out, _ = run(capsys, "canonicalize", FIX / "cube_diagram.json")
    doc = json.loads(out)
    assert code == 0 and doc["was_canonical"] is False
    assert io.truss_from_json(doc["S"]).fibers[1] == {(0, 0): 1}


def test_typecheck(capsys, tmp_path):
    code, out, _ = run(capsys, "typecheck", FIX / "grid11_typed.json", FIX / "free2.json")
    assert code == 0 and json.loads(out)["ok"]
    doc = io.load_json(FIX / "grid11_typed.json")
    doc["labels"]["s0/s0"] = "g10"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "typecheck", bad, FIX / "free2.json")
    assert code == 1 and [v["path"] for v in json.loads(out)["violations"]] == ["s0/s0"]


def test_factorize_and_compose(capsys, tmp_path):
    from trusskit.ops import identity_bordism

    f = tmp_path / "f.json"
    f.write_text(io.dumps(io.truss_to_json(identity_bordism(grid(OPEN, 1)))))
    code, out, _ = run(capsys, "factorize", f)
    assert code == 0 and len(json.loads(out)["middle"]) == 3
    code, out, _ = run(capsys, "compose", f, f)
    assert code == 0 and io.truss_from_json(json.loads(out)) == identity_bordism(grid(OPEN, 1))
    code, out, _ = run(capsys, "check-submersive", FIX / "crossing.json")
    assert code == 1


def test_render(capsys, tmp_path):
    out = tmp_path / "c.svg"
    assert run(capsys, "render", FIX / "crossing.json", "--out", out)[0] == 0
    first = out.read_bytes()
    assert run(capsys, "render", FIX / "crossing.json", "--out", out)[0] == 0
    assert out.read_bytes() == first and first.startswith(b"<?xml")
    code, txt, _ = run(capsys, "render", "--format", "json", FIX / "nf_example.json")
    assert len(json.loads(txt)["*"]["vertices"]) == 3
    g3 = tmp_path / "g3.json"
    g3.write_text(io.dumps(io.truss_to_json(grid(OPEN, 1, 1, 1))))
    code, txt, _ = run(capsys, "render", g3, "--out", tmp_path / "s.svg")
    assert code == 0 and len(json.loads(txt)["written"]) == 3


def test_homs(capsys):
    code, out, _ = run(capsys, "homs", 1, 1)
    doc = json.loads(out)
    assert code == 0 and len(doc["maps"]) == 3
    ident = next(m for m in doc["maps"] if m["map"] == [0, 1])
    assert "s0→s0" in ident["homs"] and "s0→r1" in ident["homs"]


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "trusskit.cli", "grid", "2"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["levels"][0]["fibers"] == {"*": 2}


@pytest.mark.parametrize("flavor", ["open", "closed"])
def test_grid_flavors(capsys, flavor):
    code, out, _ = run(capsys, "grid", "1,0", "--flavor", flavor)
    assert code == 0 and json.loads(out)["kind"] == flavor

import json

import pytest

from ruellelab.cli import main
from ruellelab.hermanmodel import AnnulusModel
from ruellelab.ratmap import RationalMap
from ruellelab.transversal import FamilySpec


@pytest.fixture
def files(tmp_path):
    def put(name, obj):
        p = tmp_path / name
        p.write_text(json.dumps(obj))
        return str(p)

    return {
        "sq": put("sq.json", {"num": [[0, 0], [0, 0], [1, 0]]}),
        "cheb": put("cheb.json", {"num": [[-2, 0], [0, 0], [1, 0]]}),
        "unicrit": put("unicrit.json", {"unicritical": 2}),
        "annulus": put("annulus.json", AnnulusModel(2.0).to_json()),
        "poly": put("p.json", {"coeffs": [[-4, 0], [0, 0], [1, 0]]}),
        "atoms": put("atoms.json", {"atoms": [[[1, 0], [1, 0]], [[-1, 0], [-1, 0]]]}),
        "dir": tmp_path,
    }


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def test_transversality_example(capsys, files):
    code, out = run(capsys, "transversality", "--family", files["unicrit"], "--v0", "-2", "--mmax", "40")
    rep = json.loads(out)["report"]
    assert code == 0
    assert abs(rep["series_estimate"][0] - 2 / 3) < 1e-7 and rep["nonzero_verdict"] is True
    assert "convergence_rtol" in json.loads(out)["tolerances"]


def test_herman_verify_example(capsys, files):
    code, out = run(capsys, "herman-verify", "--model", files["annulus"])
    assert code == 0 and json.loads(out)["all_passed"] is True


def test_critical_value_exit_code(capsys, files):
    code, out = run(capsys, "transfer-apply", "--map", files["sq"], "--g", "one", "--x", "0")
    assert code == 2
    assert json.loads(out)["error"]["kind"] == "CriticalValue"


def test_input_errors_exit_one(capsys, files):
    code, out = run(capsys, "orbit", "--map", str(files["dir"] / "missing.json"), "--z0", "1")
    assert code == 1 and json.loads(out)["error"]["kind"] == "InputError"
    code, out = run(capsys, "no-such-command")
    assert code == 1
    code, out = run(capsys, "orbit", "--map", files["sq"], "--z0", "abc")
    assert code == 1


def test_convergence_exit_three(capsys, files):
    code, out = run(capsys, "roots", "--poly", files["poly"], "--max-iter", "0", "--tol", "1e-300")
    assert code == 3 and json.loads(out)["error"]["kind"] == "NonConvergence"


def test_determinism(capsys, files):
    argv = ("fixed-residual", "--map", files["cheb"], "--g", f"measure:{files['atoms']}", "--seed", "7", "--samples", "32")
    a = run(capsys, *argv)
    b = run(capsys, *argv)
    assert a == b and a[0] == 0
    c = run(capsys, *argv[:-3], "8", "--samples", "32")
    assert c[1] != a[1]


def test_conjugate_round_trip(capsys, files):
    code, out = run(capsys, "conjugate", "--map", files["sq"], "--moebius", "0,1,1,0")
    emitted = json.loads(out)["map"]
    g = RationalMap.from_json(emitted)
    assert g.to_json() == emitted


def test_family_round_trip(capsys, files):
    code, out = run(capsys, "transversality", "--family", files["unicrit"], "--v0", "-2")
    emitted = json.loads(out)["family"]
    assert FamilySpec.from_json(emitted).to_json() == emitted


def test_csv_output(capsys, files):
    code, out = run(capsys, "summability", "--map", files["cheb"], "--N", "12", "--format", "csv")
    lines = out.strip().splitlines()
    assert lines[0] == "n,term,partial_sum" and len(lines) == 13


def test_config_defaults_and_unknown_keys(capsys, files):
    cfg = files["dir"] / "cfg.json"
    cfg.write_text(json.dumps({"N": 5}))
    code, out = run(capsys, "summability", "--map", files["cheb"], "--config", cfg)
    assert code == 0 and len(json.loads(out)["report"]["terms"]) == 5
    cfg.write_text(json.dumps({"bogus": 1}))
    code, out = run(capsys, "summability", "--map", files["cheb"], "--config", cfg)
    assert code == 1 and "bogus" in json.loads(out)["error"]["detail"]


def test_output_and_figure(capsys, files):
    out_path = files["dir"] / "rep.json"
    fig = files["dir"] / "hardy.png"
    code, _ = run(capsys, "hardy", "--model", files["annulus"], "--output", out_path, "--figure", fig)
    assert code == 0
    assert json.loads(out_path.read_text())["report"]["bounded_verdict"] is True
    assert fig.read_bytes()[:4] == b"\x89PNG"


@pytest.mark.parametrize(
    "argv",
    [
        ("roots", "--poly", "{poly}"),
        ("preimages", "--map", "{sq}", "--x", "4"),
        ("critical-points", "--map", "{cheb}"),
        ("orbit", "--map", "{cheb}", "--z0", "-2", "--m", "3"),
        ("infinity-form", "--map", "{sq}"),
        ("cauchy", "--measure", "{atoms}", "--z", "0", "--z", "3j"),
        ("moments", "--measure", "{atoms}"),
        ("multiplier", "--map", "{sq}", "--g", "zinv2", "--x", "2"),
        ("line-field", "--model", "{annulus}", "--g", "model:{annulus}", "--samples", "16"),
        ("invariant-mass", "--map", "{sq}", "--g", "zinv2"),
        ("omega-limit", "--map", "{cheb}", "--x", "-2", "--burn-in", "5", "--keep", "10"),
        ("l-matrix", "--family", "{unicrit}", "--family", "{unicrit}", "--v0", "-2"),
        ("herman-eigenspace", "--rotation", "1/4", "--N", "6"),
    ],
)
def test_every_command_runs(capsys, files, argv):
    argv = [a.format(**files) for a in argv]
    for fmt in ("json", "csv"):
        code, out = run(capsys, *argv, "--format", fmt)
        assert code == 0, out
        assert out


def test_command_outputs(capsys, files):
    _, out = run(capsys, "herman-eigenspace", "--rotation", "1/4", "--N", "6")
    assert json.loads(out)["indices"] == [-6, -2, 2, 6]
    _, out = run(capsys, "l-matrix", "--family", files["unicrit"], "--family", files["unicrit"], "--v0", "-2")
    assert json.loads(out)["l_matrix"]["rank"] == 1
    _, out = run(capsys, "invariant-mass", "--map", files["sq"], "--g", "zinv2")
    assert abs(json.loads(out)["report"]["rel_gap"] - 0.5) < 1e-9

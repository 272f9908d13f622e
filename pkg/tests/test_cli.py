import io
import json

from lambdar.cli import main


def run(*argv, stdin=""):
    out = io.StringIO()
    code = main(list(argv), stdout=out, stdin=io.StringIO(stdin))
    return code, out.getvalue()


def test_measure_cl():
    code, out = run("measure", "cl", r"(y y)[y/(\z.x) w]")
    assert code == 0 and out.strip() == "[a(1,4)]"


def test_measure_level_needs_var():
    code, out = run("measure", "level", "x[x/z[y/w]][w/w1]", "--var", "w1")
    assert code == 0 and out.strip() == "3"
    code, _ = run("measure", "level", "x")
    assert code == 1


def test_measure_d():
    code, out = run("measure", "d", r"\x.p")
    assert code == 0 and out.strip() == "(1, 1, 0)"


def test_infer_on_omega_runs_out_of_fuel():
    code, out = run("infer", r"(\x.x x) (\x.x x)", "--fuel", "100")
    assert code == 2 and "FuelExhausted" in out


def test_infer_json():
    code, out = run("infer", r"(I (x1 I))[x1/\y.I y]", "--format", "json")
    assert code == 0
    got = json.loads(out)
    assert got["derivation"]["rule"] == "CUT" and len(got["D"]) == 3


def test_reduce_flneed_json_lines():
    code, out = run("reduce", "flneed", r"(\x.I (I x)) (\y.y I)", "--format", "json")
    lines = [json.loads(line) for line in out.splitlines()]
    assert code == 0
    assert lines[-1] == {"status": "NormalForm", "steps": 9}
    assert len(lines) == 11


def test_reduce_text_is_deterministic():
    a = run("reduce", "name", r"(\x1.I (x1 I)) (\y.(I I) y)")
    b = run("reduce", "name", r"(\x1.I (x1 I)) (\y.(I I) y)")
    assert a == b and a[0] == 0


def test_reduce_from_stdin_and_other_strategies():
    code, out = run("reduce", "sub", "-", stdin="(x x)[x/y[y/z]]")
    lines = out.strip().splitlines()
    assert code == 0 and lines[-2].endswith("z z") and lines[-1] == "[NormalForm, 2 steps]"
    code, _ = run("reduce", "r-explore", r"(\x.x x) (y z)", "--seed", "3")
    assert code == 0
    code, _ = run("reduce", "name", r"(\x.x x) (\x.x x)", "--fuel", "10")
    assert code == 2


def test_skeleton_commands():
    code, out = run("skeleton", "mfe", r"(I y) I (\z.z y w)", "--theta", "y")
    assert code == 0 and out.splitlines()[0] == r"◇1 y ◇2 (\z.z y ◇3)"
    code, out = run("skeleton", "bigstep", "(y (u v)) z", "--theta", "y,z")
    assert code == 0 and "[" in out
    code, _ = run("skeleton", "smallstep", "y (u v)", "--theta", "y,z")
    assert code == 1


def test_check_grammar_and_derivation(tmp_path):
    code, out = run("check", "U", r"(y z)[y//I]")
    assert code == 0 and out.strip() == "U: yes"
    code, out = run("infer", r"\x.p", "--format", "json")
    f = tmp_path / "d.json"
    f.write_text(json.dumps(json.loads(out)["derivation"]))
    code, out = run("check", "--derivation", str(f))
    assert code == 0 and out.strip() == "valid"
    code, _ = run("check")
    assert code == 1


def test_diff():
    code, out = run("diff", r"(\x.x) y", "--format", "json")
    got = json.loads(out)
    assert code == 0 and got["agree"] and got["typed"]
    code, out = run("diff", r"(\x.x x) (\x.x x)", "--fuel", "50")
    assert code == 2 and out.strip().endswith("agree")


def test_user_errors():
    assert run("reduce", "name", "(x y")[0] == 1
    assert run("reduce", "bogus", "x")[0] == 1
    assert run("infer", r"(y z)[y//\x.(y y)[y/I]]")[0] == 1

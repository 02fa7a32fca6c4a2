import json
import random

import pytest

from nilfactor import cli
from nilfactor.factor import InvariantViolation
from nilfactor.io import RunSpecError, dump_json, load_schema, parse_runspec, verify_tree

PHI_SPEC = {"group": "torus:1", "coeffs": [["0"], ["phi"]], "N": 16384}


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


def test_minimal_spec_is_valid():
    spec = parse_runspec(json.dumps(PHI_SPEC))
    assert spec.T == 16384 and spec.group == "torus:1"
    assert spec.sequence().group.m == 1


@pytest.mark.parametrize("patch,needle", [
    ({"T": 20000}, "T exceeds N"),
    ({"T": 100}, "T is below N^0.9"),
    ({"R": 1}, "R must be at least Q0"),
    ({"bogus": 1}, "Additional properties"),
    ({"coeffs": [["0"], ["phi +"]]}, "/coeffs/1/0"),
    ({"coeffs": [["0", "1"]]}, "/coeffs/0"),
    ({"group": "nope"}, "/group"),
    ({"config": {"B": 0}}, "/config"),
])
def test_spec_errors(patch, needle):
    with pytest.raises(RunSpecError) as exc:
        parse_runspec({**PHI_SPEC, **patch})
    assert any(needle in e for e in exc.value.errors), exc.value.errors


def test_schema_errors_have_paths():
    with pytest.raises(RunSpecError) as exc:
        parse_runspec({"group": "torus:1", "coeffs": [["0"]], "N": "big"})
    assert exc.value.errors[0].startswith("/N:")
    with pytest.raises(RunSpecError):
        parse_runspec("{not json")
    assert load_schema()["additionalProperties"] is False


def generated_specs(n, seed=5):
    rng = random.Random(seed)
    groups = [("torus:1", 1), ("torus:2", 2), ("heisenberg", 3)]
    scalars = ["0", "1/3", "phi", "-2/7", "sqrt2", "e", "1/2 + phi/1000", {"mid": "1/5", "rad": "1/1000000000000000000000000000000"}, 4]
    out = []
    for i in range(n):
        gid, m = rng.choice(groups)
        rows = [[rng.choice(scalars) for _ in range(m)], [rng.choice(scalars) for _ in range(m)]]
        if gid == "heisenberg":
            rows.append(["0", "0", rng.choice(scalars)])
        N = rng.choice([1024, 4096, 16384])
        d = {"group": gid, "coeffs": rows, "N": N, "T": N - rng.randint(0, 10), "seed": rng.randrange(2 ** 64),
             "R": rng.choice([8, 16]), "E": rng.choice([1, 2]), "delta": rng.choice([0.05, 0.1]),
             "smooth_base": rng.choice([{"kind": "fixed", "k": 3}, {"kind": "primes", "primes": [2, 5]},
                                        {"kind": "loglog"}])}
        if rng.random() < 0.5:
            d["config"] = {"q_max": rng.choice([8, 16])}
        if rng.random() < 0.3:
            d["mode"], d["samples"] = "sampled", 100
        out.append(d)
    return out


def test_round_trip_generated_specs():
    for d in generated_specs(20):
        s1 = parse_runspec(json.dumps(d))
        s2 = parse_runspec(dump_json(s1.to_json()))
        assert s1 == s2
        assert s1.to_json() == s2.to_json()


def test_cli_tree_verify_and_corruption(tmp_path, capsys):
    spec = write(tmp_path, "phi.json", PHI_SPEC)
    out = str(tmp_path / "tree.json")
    assert cli.main(["tree", "--spec", spec, "--out", out]) == 0
    tree = json.loads(open(out).read())
    assert len(tree["leaves"]) == 1 and tree["passed"]
    assert tree["config"]["B"] == 2 and "seed" in tree
    assert cli.main(["verify", "--tree", out, "--out", str(tmp_path / "v.json")]) == 0
    tree["leaves"][0]["q_gamma"] = 7
    bad = write(tmp_path, "bad.json", tree)
    assert cli.main(["verify", "--tree", bad, "--out", str(tmp_path / "v2.json")]) == 4
    ok, rep = verify_tree(tree)
    assert not ok and rep["problems"]


def test_cli_exit_codes(tmp_path, monkeypatch, capsys):
    bad = write(tmp_path, "bad.json", {**PHI_SPEC, "T": 10 ** 6})
    assert cli.main(["tree", "--spec", bad]) == 2
    assert "T exceeds N" in capsys.readouterr().err
    assert cli.main(["tree"]) == 2
    assert cli.main(["verify", "--tree", str(tmp_path / "missing.json")]) == 2
    spec = write(tmp_path, "phi.json", PHI_SPEC)
    assert cli.main(["equidist", "--spec", spec, "--seed", str(2 ** 64)]) == 2

    def boom(*a, **k):
        raise InvariantViolation("forced")
    monkeypatch.setattr(cli, "build_tree", boom)
    assert cli.main(["tree", "--spec", spec]) == 3


def test_cli_equidist_and_factorise(tmp_path, capsys):
    spec = write(tmp_path, "half.json", {"group": "torus:1", "coeffs": [["0"], ["1/2"]], "N": 1000,
                                         "delta": 0.1})
    assert cli.main(["equidist", "--spec", spec]) == 4
    rep = json.loads(capsys.readouterr().out)
    assert rep["report"]["witness"]["q"] == 2 and rep["report"]["mode"] == "certified-enumeration"
    assert cli.main(["factorise", "--spec", spec]) == 0
    f = json.loads(capsys.readouterr().out)["factorisation"]
    assert f["q_gamma"] == 2 and f["gamma"][1] == ["1/2"]


def test_oracle_agrees_with_equidist(tmp_path, capsys):
    specs = [{"group": "torus:1", "coeffs": [["0"], ["phi"]], "N": 512, "delta": 0.1},
             {"group": "torus:2", "coeffs": [["0", "0"], ["1/3", "sqrt2"]], "N": 512, "delta": 0.1},
             {"group": "heisenberg", "coeffs": [["0", "0", "0"], ["phi", "1/5", "0"], ["0", "0", "e"]],
              "N": 256, "delta": 0.1}]
    for i, d in enumerate(specs):
        p = write(tmp_path, f"s{i}.json", d)
        assert cli.main(["oracle", "--spec", p]) == 0
        cap = capsys.readouterr()
        orc = json.loads(cap.out)
        assert "agree" in cap.err
        cli.main(["equidist", "--spec", p, "--certified"])
        eq = json.loads(capsys.readouterr().out)
        assert abs(orc["defect"] - eq["report"]["defect"]) <= cli.ORACLE_TOLERANCE


def test_byte_identical_outputs(tmp_path):
    d = {"group": "heisenberg", "coeffs": [["0", "0", "0"], ["1/3", "phi", "0"], ["0", "0", "1/7"]],
         "N": 1024, "seed": 99, "mode": "sampled", "samples": 50}
    spec = write(tmp_path, "h.json", d)
    for cmd in ("tree", "equidist"):
        outs = []
        for k in range(2):
            o = str(tmp_path / f"{cmd}{k}.json")
            cli.main([cmd, "--spec", spec, "--out", o])
            outs.append(open(o, "rb").read())
        assert outs[0] == outs[1]

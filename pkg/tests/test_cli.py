import json

import pytest

from tclab.cli import build_parser, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def cycle7(tmp_path):
    p = tmp_path / "cycle7.fml"
    p.write_text("(cycle 7 x)\n", encoding="utf-8")
    return str(p)


def test_sat_seven_cycle(capsys, cycle7):
    code, out, _ = run(capsys, "sat", "--theory", "t1", "--s-set", "7", "--bound", "7", cycle7)
    data = json.loads(out)
    assert code == 0 and data["verdict"] == "sat"
    assert data["model"]["domains"]["sigma1"] == [str(k) for k in range(7)]


def test_sat_unsat_up_to(capsys, tmp_path):
    f = tmp_path / "neq.fml"
    f.write_text("(not (= x y))", encoding="utf-8")
    code, out, _ = run(capsys, "sat", "--theory", "teq1", "--bound", "4", str(f))
    assert code == 0 and json.loads(out)["verdict"] == "unsat-up-to"


def test_decide_s(capsys):
    code, out, _ = run(capsys, "decide-s", "--theory", "t1", "--n", "17", "--s-set", "7,11,13")
    data = json.loads(out)
    assert code == 0 and data["in_s"] is False and data["min_size"] == 18
    code, out, _ = run(capsys, "decide-s", "--theory", "t3", "--n", "13")
    assert json.loads(out)["in_s"] is True


def test_mm_both_algorithms_agree(capsys, tmp_path):
    f = tmp_path / "phi.fml"
    f.write_text("(and (cycle 7 x) (= (f (f (f (f y)))) y))", encoding="utf-8")
    _, brute, _ = run(capsys, "mm", "--theory", "t1", "--bound", "12", str(f))
    _, fast, _ = run(capsys, "mm", "--theory", "t1", "--algo", "from-decision", str(f))
    assert json.loads(brute)["mm"] == json.loads(fast)["mm"] == [{"sigma1": 11}]


def test_decide_via_mm(capsys, tmp_path):
    f = tmp_path / "bad.fml"
    f.write_text("(and (= (f x) x) (not (= (f x) x)))", encoding="utf-8")
    code, out, _ = run(capsys, "decide", "--theory", "t2", "--via", "mm", str(f))
    assert code == 0 and json.loads(out)["sat"] is False


def test_witness_and_shiny(capsys, tmp_path):
    f = tmp_path / "p.fml"
    f.write_text("(P x)", encoding="utf-8")
    code, out, _ = run(capsys, "witness", "--theory", "t2n", "--witness", "shiny", str(f))
    assert code == 0 and "(not (= _w0 _w1))" in json.loads(out)["output"]
    code, out, _ = run(capsys, "witness", "--theory", "t1")
    assert json.loads(out)["output"] == "(= _w0 _w0)"


def test_complete(capsys, tmp_path):
    f = tmp_path / "e.fml"
    f.write_text("(= (f x) y)", encoding="utf-8")
    code, out, _ = run(capsys, "complete", "--theory", "t2", "--arrangement", "x;y", str(f))
    data = json.loads(out)
    assert code == 0 and data["satisfiable"]
    assert len(data["model"]["domains"]["sigma1"]) == 2


def test_verify_witness_exit_codes(capsys):
    code, out, _ = run(capsys, "verify-witness", "--theory", "t1", "--corpus", "5", "--bound", "4")
    assert code == 0 and json.loads(out)["ok"]
    code, _, _ = run(capsys, "verify-witness", "--theory", "t2n", "--witness", "shiny", "--corpus", "3",
                     "--bound", "4")
    assert code == 0


def test_check_refutation_exits_one(capsys):
    code, out, _ = run(capsys, "check", "convexity", "--theory", "t2", "--samples", "2")
    assert code == 1 and json.loads(out)["verdict"] == "refuted"
    code, out, _ = run(capsys, "check", "convexity", "--theory", "t1", "--samples", "2")
    assert code == 0 and json.loads(out)["verdict"] == "holds-at-bound"


def test_check_si_and_star(capsys):
    assert run(capsys, "check", "si", "--theory", "t1", "--samples", "3")[0] == 0
    assert run(capsys, "check", "si", "--theory", "t3", "--samples", "3")[0] == 1
    code, out, _ = run(capsys, "check", "star", "--theory", "star", "--star-n", "5")
    assert code == 0 and json.loads(out)["verdict"] == "construction-verified"
    code, out, _ = run(capsys, "check", "fsmooth", "--theory", "star", "--star-n", "3", "--model-bound", "3")
    assert code == 0 and json.loads(out)["evidence"]["cases"]


def test_reproduce_table1_markdown(capsys):
    code, out, _ = run(capsys, "reproduce", "table1")
    assert code == 0
    assert "| T1 | ✓ | ✓ | ✓ |" in out
    assert "| T4 | ✓ | ✗ | ✗ |" in out
    assert "| adds(T2) | ✗ | ✓ | ✗ |" in out


def test_reproduce_venn_json(capsys):
    code, out, _ = run(capsys, "reproduce", "venn")
    data = json.loads(out)
    assert code == 0 and data["th"]["regions"] == []


def test_corpus_is_byte_identical(capsys, tmp_path):
    _, a, _ = run(capsys, "corpus", "--n", "15", "--seed", "3")
    _, b, _ = run(capsys, "corpus", "--n", "15", "--seed", "3")
    _, c, _ = run(capsys, "corpus", "--n", "15", "--seed", "4")
    assert a == b and a != c
    code, _, _ = run(capsys, "corpus", "--n", "3", "--out", str(tmp_path / "fml"))
    assert code == 0 and len(list((tmp_path / "fml").glob("*.fml"))) == 3


def test_sat_output_is_reproducible(capsys, cycle7):
    first = run(capsys, "sat", "--theory", "t1", "--bound", "7", cycle7)[1]
    assert run(capsys, "sat", "--theory", "t1", "--bound", "7", cycle7)[1] == first


@pytest.mark.parametrize(
    "argv",
    [
        ["sat", "--theory", "t9"],
        ["sat", "--s-set", "8"],
        ["sat", "--bound", "1000"],
        ["nope"],
        ["decide-s", "--theory", "t1", "--n", "9"],
        ["decide-s", "--theory", "teq", "--n", "7"],
        ["sat", "/nonexistent/file.fml"],
    ],
)
def test_usage_errors_exit_two(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


def test_parse_error_exits_two(capsys, tmp_path):
    f = tmp_path / "broken.fml"
    f.write_text("(= x y", encoding="utf-8")
    code, _, err = run(capsys, "sat", str(f))
    assert code == 2 and "parse" in err and "1:7" in err


def test_every_subcommand_has_help(capsys):
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    for name, sp in sub.choices.items():
        assert sp.description, name
    assert main(["--help"]) == 0
    assert main(["check", "--help"]) == 0
    assert "convexity" in capsys.readouterr().out

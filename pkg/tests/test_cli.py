import json
from fractions import Fraction

import pytest

from hausdorff_lab.cli import main
from hausdorff_lab.fpt_ring import RingCtx
from hausdorff_lab.hausdorff import ExponentSet, dump_abelian_spec, spec_from_sets
from hausdorff_lab.matrix_groups import (
    GroupSpec,
    dump_subgroup_spec,
    full_generators,
    root_generators,
)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_ratios(text):
    lines = text.strip().splitlines()
    assert lines[0] == "level,num_exp,den_exp,ratio_num,ratio_den"
    return [Fraction(int(r.split(",")[3]), int(r.split(",")[4])) for r in lines[1:]]


@pytest.fixture
def sl2():
    return GroupSpec("SL", 2, RingCtx(2, 6))


def test_borel_table(capsys):
    code, out, _ = run(capsys, "borel")
    assert code == 0
    rows = out.strip().splitlines()
    assert rows[0] == "family,n,dim_B,dim_G,ratio,decimal"
    assert "SL_2,2,2,3,2/3,0.666667" in rows
    assert "Sp_4,2,6,10,3/5,0.600000" in rows


def test_borel_single_jsonl(capsys):
    code, out, _ = run(capsys, "borel", "--family", "Sp", "--n", "3", "--format", "jsonl")
    assert code == 0
    rec = json.loads(out)
    assert (rec["dim_B"], rec["dim_G"]) == (12, 21)


def test_hdim_group_files(capsys, tmp_path, sl2):
    empty = tmp_path / "empty.txt"
    empty.write_text(dump_subgroup_spec(sl2, []))
    code, out, _ = run(capsys, "hdim", "--spec", str(empty), "--mmax", "4")
    assert code == 0 and set(csv_ratios(out)) == {0}

    full = tmp_path / "full.txt"
    full.write_text(dump_subgroup_spec(sl2, full_generators(sl2, 4)))
    for method in ("bfs", "pc"):
        code, out, _ = run(capsys, "hdim", "--spec", str(full), "--mmax", "4", "--method", method)
        assert code == 0 and set(csv_ratios(out)) == {1}

    uni = tmp_path / "uni.txt"
    uni.write_text(dump_subgroup_spec(sl2, root_generators(sl2, 0, 1, 5)))
    code, out, _ = run(capsys, "hdim", "--spec", str(uni), "--mmax", "5", "--method", "pc")
    assert code == 0 and set(csv_ratios(out)[1:]) == {Fraction(1, 3)}


def test_hdim_cap_gives_partial_exit(capsys, tmp_path, sl2):
    f = tmp_path / "full.txt"
    f.write_text(dump_subgroup_spec(sl2, full_generators(sl2, 4)))
    code, out, err = run(capsys, "hdim", "--spec", str(f), "--mmax", "4", "--cap", "10")
    assert code == 2
    assert "cap" in err
    assert csv_ratios(out)


def test_hdim_abelian_file(capsys, tmp_path):
    f = tmp_path / "ab.txt"
    f.write_text(dump_abelian_spec(spec_from_sets(ExponentSet.multiples(2))))
    code, out, _ = run(capsys, "hdim", "--spec", str(f), "--mmax", "6")
    assert code == 0
    assert csv_ratios(out) == [Fraction((n + 1) // 2, n) for n in range(1, 7)]


def test_realize(capsys, tmp_path):
    out_file = tmp_path / "trace.jsonl"
    code, out, _ = run(capsys, "realize", "--theta", "1/3", "--mmax", "30", "--format", "jsonl",
                       "--out", str(out_file))
    assert code == 0
    assert "period=[1,0,0]" in out
    recs = [json.loads(ln) for ln in out_file.read_text().splitlines()]
    assert len(recs) == 30
    last = recs[-1]
    assert Fraction(last["ratio"]) == Fraction(last["num_exp"], last["den_exp"]) == Fraction(1, 3)


def test_outputs_are_byte_identical(capsys):
    args = ("spectrum", "--family", "SL", "--n", "2", "--p", "2", "--mmax", "3", "--count", "4", "--seed", "5")
    first = run(capsys, *args)
    second = run(capsys, *args)
    assert first == second and first[0] == 0
    assert run(capsys, "realize", "--theta", "2/7") == run(capsys, "realize", "--theta", "2/7")


def test_lie_dump_and_corrupted_verify(capsys, tmp_path):
    code, out, _ = run(capsys, "lie", "--family", "SL", "--n", "2", "--p", "3", "--dump")
    assert code == 0 and out.startswith("lie family=SL n=2 p=3 d=3")
    good = tmp_path / "good.txt"
    good.write_text(out)
    code, out, _ = run(capsys, "verify", "--filter", "borel", "--spec", str(good))
    assert code == 0
    assert "PASS [ 0] lie-dump" in out

    lines = good.read_text().splitlines()
    idx = next(i for i, ln in enumerate(lines) if ln[0].isdigit())
    i, j, k, c = lines[idx].split()
    lines[idx] = f"{i} {j} {k} {(int(c) + 1) % 3}"
    bad = tmp_path / "bad.txt"
    bad.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "verify", "--filter", "borel", "--spec", str(bad))
    assert code == 3
    assert "FAIL [ 0] lie-dump" in out and "antisymmetry" in out

    code, out, _ = run(capsys, "lie", "--spec", str(bad))
    assert code == 3 and "antisymmetry" in out


def test_lie_report(capsys):
    code, out, _ = run(capsys, "lie", "--family", "SL", "--n", "2", "--p", "3", "--D", "12", "--format", "jsonl")
    assert code == 0
    rep = json.loads(out)
    assert rep["simplicity"] == "simple" and rep["perfect"]
    assert rep["densities_at_D"]["congruence q=3"] == "1/3"
    assert rep["bound"] == "2/3" and rep["bound_violations"] == []


def test_verify_filter(capsys):
    code, out, _ = run(capsys, "verify", "--filter", "borel,realization")
    assert code == 0
    body = [ln for ln in out.splitlines() if ln.startswith(("PASS", "FAIL"))]
    assert len(body) == 2 and all(ln.startswith("PASS") for ln in body)


def test_fgl_command(capsys, tmp_path):
    assert run(capsys, "fgl", "--family", "multiplicative", "--p", "3", "--D", "5")[0] == 0
    f = tmp_path / "bad.fgl"
    # X + Y + XY^2 is associative mod degree 4 only in characteristic 2
    f.write_text("fgl d=1 D=3 p=3 k=1\n(1,0) -> [1]\n(0,1) -> [1]\n(1,2) -> [1]\n")
    code, out, _ = run(capsys, "fgl", "--fgl", str(f))
    assert code == 3 and "associativity" in out
    f.write_text(f.read_text().replace("p=3", "p=2"))
    assert run(capsys, "fgl", "--fgl", str(f))[0] == 0


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["hdim"],
    ["hdim", "--spec", "/nonexistent/file"],
    ["realize"],
    ["realize", "--theta", "abc"],
    ["realize", "--theta", "3/2"],
    ["borel", "--family", "Spin"],
    ["verify", "--filter", "no-such-check"],
    ["spectrum", "--family", "SL"],
    ["fgl", "--family", "formal"],
])
def test_input_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 4


def test_bad_spec_header(capsys, tmp_path):
    f = tmp_path / "x.txt"
    f.write_text("hello\n")
    assert run(capsys, "hdim", "--spec", str(f))[0] == 4

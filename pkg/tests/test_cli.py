import csv
import io
import math

import pytest

from diracstep.cli import ProfileParseError, main, parse_grid, parse_profile, write_profile, UsageError
from diracstep.step import step_scatter
from diracstep.transfer import PotentialProfile, profile_scatter


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_step_sweep_plateau(capsys):
    code, out, _ = run(capsys, "step-sweep", "--V0", "3", "--grid", "0.01:8:500")
    assert code == 0
    rows = table(out)
    assert len(rows) == 500
    assert list(rows[0]) == ["k", "E", "band", "f_re", "f_im", "g_re", "g_im", "R", "T"]
    for r in rows:
        E, R = float(r["E"]), float(r["R"])
        if 2 < E < 4:
            assert R == 1.0
        else:
            assert R < 1.0


def test_step_sweep_zero_step(capsys):
    _, out, _ = run(capsys, "step-sweep", "--V0", "0", "--grid", "0:5:11")
    assert all(float(r["R"]) == 0.0 for r in table(out))


def test_step_sweep_klein_region(capsys):
    _, out, _ = run(capsys, "step-sweep", "--V0", "8", "--grid", "0.5:3:6")
    for r in table(out):
        assert r["band"] == "klein-transmitting"
        assert float(r["R"]) == pytest.approx(step_scatter(float(r["E"]), 8.0, 1.0).R, abs=1e-16)
        assert float(r["R"]) < 1


def test_gap_points_left_blank(capsys):
    _, out, _ = run(capsys, "step-sweep", "--V0", "0.5", "--axis", "E", "--grid=-0.4:0.9:3")
    rows = table(out)
    assert all(r["band"] == "gap-no-states" and r["R"] == "" and r["T"] == "" for r in rows)


def test_output_is_deterministic_and_parallel_safe(capsys, tmp_path):
    args = ["overlap-sweep", "--grid", "0:10:41"]
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args, "--jobs", "2")
    assert a == b
    out = tmp_path / "o.csv"
    assert main([*args, "--out", str(out)]) == 0
    assert out.read_text() == a


def test_full_precision(capsys):
    _, out, _ = run(capsys, "step-sweep", "--V0", "3", "--grid", "4:5:2")
    row = table(out)[0]
    assert float(row["E"]) == math.hypot(1.0, 4.0)


def test_barrier_sweep(capsys):
    _, out, _ = run(capsys, "barrier-sweep", "--V0", "0", "--width", "2", "--grid", "0.5:6:12")
    assert all(float(r["R"]) == pytest.approx(0.0, abs=1e-28) for r in table(out))
    _, out, _ = run(capsys, "barrier-sweep", "--V0", "5.5", "--width", "1e-6", "--grid", "0.5:6:12")
    assert all(float(r["R"]) < 1e-9 for r in table(out))
    _, out, _ = run(capsys, "barrier-sweep", "--V0", "5.5", "--width", "2", "--grid", "0:6:4")
    rows = table(out)
    assert rows[0]["error"] and rows[0]["R"] == ""
    assert all(abs(float(r["R"]) + float(r["T"]) - 1) < 1e-12 for r in rows[1:])


def test_overlap_sweep(capsys):
    _, out, _ = run(capsys, "overlap-sweep", "--grid", "0:4:401")
    rows = table(out)
    assert all(float(rows[0][c]) == 0 for c in ("n2PerL", "n3PerL", "intuitivePerL", "totalPerL"))
    tot = [float(r["totalPerL"]) for r in rows]
    i = 200  # V0 = 2
    left, right = tot[i] - tot[i - 1], tot[i + 1] - tot[i]
    assert abs(right - left) > 0.1 * abs(left)
    for r in rows:
        if float(r["V0"]) > 2:
            assert float(r["totalPerL"]) < float(r["intuitivePerL"])


def test_massless(capsys):
    _, out, _ = run(capsys, "massless", "--V0", "2", "--grid=-3:3:7")
    for r in table(out):
        assert float(r["R"]) == 0 and float(r["T"]) == 1 and float(r["f_re"]) == 0


def test_profile_matches_step(capsys, tmp_path):
    p = tmp_path / "step.txt"
    p.write_text("# single step\nlead-left 0\nlead-right 3\n")
    _, out, _ = run(capsys, "profile", str(p), "--energy", "5")
    row = table(out)[0]
    res = step_scatter(5.0, 3.0, 1.0)
    assert float(row["R"]) == pytest.approx(res.R, abs=1e-15)
    assert complex(float(row["f_re"]), float(row["f_im"])) == pytest.approx(res.f, abs=1e-15)


def test_profile_empty_and_multisegment(capsys, tmp_path):
    p = tmp_path / "empty.txt"
    p.write_text("lead-left 0\nlead-right 0\n")
    _, out, _ = run(capsys, "profile", str(p), "--energy", "2")
    assert float(table(out)[0]["R"]) == pytest.approx(0.0, abs=1e-30)
    p.write_text("lead-left 0\nsegment 1 -2\nsegment 0.5 3\nsegment 1 -2\nlead-right 0\n")
    code, out, _ = run(capsys, "profile", str(p), "--energy", "2", "--verify")
    row = table(out)[0]
    assert code == 0 and float(row["R"]) + float(row["T"]) == pytest.approx(1.0, abs=1e-12)


def test_profile_round_trip():
    prof = PotentialProfile(0.1, ((0.3, 2.0 / 3.0), (1e-3, -7.25)), 0.5)
    again = parse_profile(write_profile(prof))
    assert again == prof
    assert profile_scatter(again, 3.0, 1.0) == profile_scatter(prof, 3.0, 1.0)


@pytest.mark.parametrize(
    "text, line",
    [
        ("lead-left 0\nsegment 1\nlead-right 0\n", 2),
        ("# c\nlead-left x\nlead-right 0\n", 2),
        ("segment 1 1\nlead-right 0\n", 1),
        ("lead-left 0\nsegment 1 1\n", 2),
        ("lead-left 0\nsegment -1 1\nlead-right 0\n", 2),
    ],
)
def test_profile_parse_errors(text, line):
    with pytest.raises(ProfileParseError) as info:
        parse_profile(text)
    assert info.value.line == line


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "step-sweep", "--V0", "1", "--grid", "1:0:3")[0] == 1
    assert run(capsys, "step-sweep")[0] == 1
    assert run(capsys)[0] == 1
    assert run(capsys, "step-sweep", "--V0", "-1")[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("lead-left 0\nsegmnt 1 2\nlead-right 0\n")
    code, _, err = run(capsys, "profile", str(bad), "--energy", "2")
    assert code == 2 and "line 2" in err
    ok = tmp_path / "ok.txt"
    ok.write_text("lead-left 0\nsegment 1 2\nlead-right 0\n")
    code, _, err = run(capsys, "profile", str(ok), "--energy", "0.2")
    assert code == 2 and "evanescent" in err
    deep = tmp_path / "deep.txt"
    deep.write_text("lead-left 0\nsegment 500 3\nlead-right 0\n")
    assert run(capsys, "profile", str(deep), "--energy", "2.5", "--method", "transfer")[0] == 3
    assert run(capsys, "profile", str(deep), "--energy", "2.5")[0] == 0


def test_units(capsys):
    _, a, _ = run(capsys, "step-sweep", "--V0", "3", "--grid", "1:4:4")
    _, b, _ = run(capsys, "step-sweep", "--V0", "6", "--grid", "2:8:4", "--absolute", "--mass", "2")
    ra, rb = table(a), table(b)
    for x, y in zip(ra, rb):
        assert float(x["R"]) == pytest.approx(float(y["R"]), abs=1e-14)
    assert run(capsys, "step-sweep", "--V0", "3", "--mass", "2")[0] == 1
    assert run(capsys, "step-sweep", "--V0", "3", "--absolute")[0] == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["step-sweep", "--V0", "3", "--grid", "0.01:8:300"],
        ["step-sweep", "--V0", "0.5", "--axis", "E", "--grid=-4:4:300"],
        ["barrier-sweep", "--V0", "5.5", "--width", "2", "--grid", "0.01:8:300"],
        ["overlap-sweep", "--grid", "0:10:300"],
        ["massless", "--grid=-3:3:50"],
    ],
)
def test_verify(capsys, argv):
    code, _, err = run(capsys, *argv, "--verify", "--seed", "7")
    assert code == 0
    assert "record(s) checked" in err


def test_parse_grid():
    g = parse_grid("0:1:3")
    assert list(g.points()) == [0.0, 0.5, 1.0]
    for bad in ("0:1", "0:1:1", "a:b:c"):
        with pytest.raises(UsageError):
            parse_grid(bad)

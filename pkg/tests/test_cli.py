import csv
import json
from fractions import Fraction

import pytest

from frobenius_orders.classdist import read_distribution_csv
from frobenius_orders.cli import main


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def header(path):
    with open(path) as fh:
        return dict(line[2:].rstrip("\n").split(": ", 1) for line in fh if line.startswith("# "))


def test_dist_closed(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["dist", "--ell", "13", "--method", "closed", "--out", str(out)]) == 0
    total = sum(Fraction(int(r["probability_num"]), int(r["probability_den"])) for r in rows(out))
    assert total == 1
    h = header(out)
    assert h["version"] and h["ell"] == "13" and h["method"] == "closed"
    with open(out) as fh:
        assert read_distribution_csv(fh, 13).total() == 1


def test_census_three(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["census", "--ell", "3", "--out", str(out)]) == 0
    assert header(out)["total"] == "51840"
    assert sum(int(r["count"]) for r in rows(out)) == 51840
    assert "51840" in capsys.readouterr().err


def test_census_seven_needs_big():
    assert main(["census", "--ell", "7"]) == 1


def test_table3_example(tmp_path):
    out = tmp_path / "t3.csv"
    assert main(["table3", "--primes", "500", "--out", str(out)]) == 0
    r = rows(out)
    assert r[0]["row"] == "average_pct" and r[1]["row"] == "reference_pct"
    assert len(r) == 2 + 497
    assert float(r[0]["(l^2-1)/2"]) == pytest.approx(13.4, abs=1.0)


def test_sweep_limit():
    with pytest.raises(SystemExit):
        main(["modes", "--primes", "501"])


@pytest.mark.parametrize("argv", [
    ["sample", "--ell", "5", "--samples", "100"],
    ["dist", "--ell", "11", "--method", "mc", "--samples", "100"],
    ["experiment", "--p", "211", "--curves", "2"],
    ["crt-demo", "--p", "211"],
    ["count-curve", "--p", "211"],
])
def test_seed_required(argv):
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == 2


def test_unknown_flag_and_command():
    with pytest.raises(SystemExit) as e:
        main(["dist", "--ell", "7", "--bogus"])
    assert e.value.code != 0
    with pytest.raises(SystemExit):
        main(["nope"])


def test_domain_error_exit_code():
    assert main(["count-curve", "--p", "7", "--f", "0,0,0,0,0"]) == 1  # x^5 is singular


@pytest.mark.parametrize("argv", [
    ["sample", "--ell", "5", "--samples", "3000", "--seed", "4"],
    ["sample", "--ell", "3", "--g", "3", "--samples", "500", "--seed", "4"],
    ["dist", "--ell", "11", "--method", "mc", "--samples", "5000", "--seed", "4"],
    ["experiment", "--p", "211", "--ell", "5,7", "--curves", "5", "--seed", "4"],
    ["count-curve", "--p", "211", "--seed", "4"],
    ["crt-demo", "--p", "211", "--seed", "4"],
])
def test_byte_identical_reruns(tmp_path, argv):
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}.csv"
        assert main([*argv, "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_experiment_outputs(tmp_path):
    out = tmp_path / "e.csv"
    assert main(["experiment", "--p", "211", "--ell", "3,5,7", "--curves", "4", "--seed", "1", "--out", str(out)]) == 0
    assert [r["ell"] for r in rows(out)] == ["5", "7"]
    assert header(out)["dropped_ell"] == "3"
    doc = json.loads((tmp_path / "e.json").read_text())
    assert set(doc["per_ell"]) == {"5", "7"}


def test_candidates_commands(tmp_path):
    out = tmp_path / "k.csv"
    assert main(["candidates", "--ell", "13", "--r", "1", "--out", str(out)]) == 0
    assert {(r["a1"], r["a2"]) for r in rows(out)} == {("0", "11"), ("4", "6"), ("9", "6")}
    assert main(["candidates", "--ell", "7", "--orders", "3,4", "--out", str(out)]) == 0
    w = [float(r["weight"]) for r in rows(out)]
    assert w == sorted(w, reverse=True)
    assert main(["candidates", "--g", "3", "--ell", "5", "--r", "6", "--out", str(out)]) == 0
    assert "a3" in rows(out)[0]


def test_count_curve_explicit(tmp_path):
    out = tmp_path / "cc.csv"
    assert main(["count-curve", "--p", "5", "--f", "0,0,0,1,0", "--out", str(out)]) == 0
    r = rows(out)[0]
    assert (r["n1"], r["a1"]) == ("6", "0")


def test_small_commands(tmp_path):
    out = tmp_path / "x.csv"
    assert main(["modes", "--primes", "20", "--out", str(out)]) == 0
    assert all(r["holds"] == "1" for r in rows(out))
    assert main(["moments", "--ell", "31,101", "--out", str(out)]) == 0
    assert len(rows(out)) == 2
    assert main(["heatmap", "--primes", "7,11", "--bins", "4", "--out", str(out)]) == 0
    assert len(rows(out)) == 8
    assert main(["dist", "--ell", "3", "--out", str(out)]) == 0
    assert "note" in header(out)

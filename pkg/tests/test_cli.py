import io
import json
from fractions import Fraction

import pytest

from regforge import formats
from regforge.cli import UsageError, parse_config, run


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def report(*argv):
    code, out, _ = invoke(*argv)
    return code, json.loads(out)


def test_bounds_text():
    code, out, _ = invoke("bounds", "--epsilon", "1/8100", "--format", "text")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "delta=1/3 s=3"
    assert lines[1] == "tower_sizes=1 2 4 8"


def test_verify_lemmas_passes():
    code, rep = report("verify-lemmas", "--delta", "1/3", "--s", "3", "--n", "160", "--seed", "7")
    assert code == 0
    suites = rep["result"]["suites"]
    assert all(suites[k]["passed"] for k in ("balance", "biased_oracle", "half_density", "eq1"))
    assert suites["sampling"]["passed"] is None


def test_verify_lemmas_sampling_with_set_size():
    code, rep = report("verify-lemmas", "--delta", "1/3", "--s", "3", "--n", "160", "--set-size", "60", "--trials", "20")
    assert code == 0 and rep["result"]["suites"]["sampling"]["passed"] is True


def test_divisibility_is_usage_error():
    code, out, err = invoke("gen-graph", "--n", "12", "--s", "3", "--delta", "1/3")
    assert code == 2 and out == ""
    assert "divisibility" in err and len(err.strip().splitlines()) == 1


@pytest.mark.parametrize(
    "argv, message",
    [
        (["bounds"], "epsilon required"),
        (["bounds", "--epsilon", "1/4"], "epsilon too large"),
        (["bounds", "--epsilon", "0.001"], "num/den"),
        (["demo", "--epsilon", "1/2", "--n", "8"], "irrational"),
        (["gen-tower", "--bogus", "3"], "unrecognized"),
        (["frobnicate"], "invalid choice"),
        (["demo", "--delta", "1/3", "--s", "3", "--n", "16"], "eps-audit required"),
    ],
)
def test_usage_errors(argv, message):
    code, _, err = invoke(*argv)
    assert code == 2 and message in err


def test_parse_config_rules():
    cfg = parse_config("gen-graph", {"epsilon": "1/3600", "n": "8"})
    assert cfg.mode == "paper" and cfg.delta == Fraction(1, 2) and cfg.s == 2
    with pytest.raises(UsageError, match="overdetermined"):
        parse_config("gen-graph", {"epsilon": "1/3600", "delta": "1/3", "mode": "paper"})
    with pytest.raises(UsageError, match="epsilon required"):
        parse_config("bounds", {})
    cfg = parse_config("demo", {"n": "16"}, "# comment\ndelta = 1/3\ns=3\neps-audit=1/50\nn=32\n")
    assert (cfg.delta, cfg.s, cfg.n, cfg.eps_audit) == (Fraction(1, 3), 3, 16, Fraction(1, 50))
    with pytest.raises(UsageError, match="unknown config key"):
        parse_config("demo", {}, "colour=blue\n")


def test_generation_and_audit_pipeline(tmp_path):
    base = ["--delta", "1/3", "--s", "3", "--n", "32", "--seed", "4"]
    assert invoke("gen-tower", *base, "--out", str(tmp_path / "t.txt"))[0] == 0
    assert isinstance(formats.load(tmp_path / "t.txt"), type(formats.loads(formats.dumps(formats.load(tmp_path / "t.txt")))))
    assert invoke("gen-graph", *base, "--out", str(tmp_path / "g.txt"))[0] == 0
    assert invoke("gen-graph", *base, "--descriptor", "--out", str(tmp_path / "g.desc"))[0] == 0
    g1 = formats.load(tmp_path / "g.txt")
    g2 = formats.instance_from_descriptor((tmp_path / "g.desc").read_text())
    assert g1 == g2

    code, rep = report("sample", "--in", str(tmp_path / "g.txt"), "--seed", "2", "--set-size", "16",
                       "--zeta", "1/2", "--out", str(tmp_path / "s.txt"))
    assert code == 0 and formats.load(tmp_path / "s.txt").n == 32
    code, _, err = invoke("sample", "--in", str(tmp_path / "g.txt"), "--zeta", "1/10")
    assert code == 2 and "n too small" in err

    # two halves of X_1 at level 1: irregular
    code, rep = report("audit-pair", *base, "--eps-audit", "1/100", "--a", "0-15", "--b", "0-15", "--method", "canonical")
    assert code == 1 and rep["result"]["verdict"]["status"] == "irregular"
    code, rep = report("audit-pair", "--in", str(tmp_path / "g.txt"), "--eps-audit", "1/100", "--a", "0-3", "--b", "4,5,6")
    assert rep["result"]["verdict"]["method"] == "exhaustive"

    formats.save(formats.load(tmp_path / "t.txt").partition(2), tmp_path / "p.txt")
    code, rep = report("audit-partition", *base, "--eps-audit", "1/100", "--in", str(tmp_path / "p.txt"))
    assert code == 1 and rep["result"]["report"]["verdict"] == "not-nice"


def test_demo_and_report_file(tmp_path):
    code, rep = report("demo", "--delta", "1/3", "--s", "3", "--n", "160", "--eps-audit", "1/100",
                       "--out", str(tmp_path / "demo.json"))
    assert code == 0 and rep["result"]["claim"]["min_parts"] == 4
    saved = json.loads((tmp_path / "demo.json").read_text())
    assert saved["result"] == rep["result"]

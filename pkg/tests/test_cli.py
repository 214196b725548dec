import io
import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest
from conftest import CBRT2, CBRT4, SQRT2, SQRT3
from hypothesis import given
from hypothesis import strategies as st
from oracles import brute_force_best_approximations

from posapprox import parse_descriptor
from posapprox.cli import CliConfig, UsageError, main, parse_args, render, run

GOLDEN = Path(__file__).parent / "golden"


def cli(*args, env=None):
    return subprocess.run([sys.executable, "-m", "posapprox", *args], capture_output=True, text=True, env=env)


def run_config(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(parse_args(list(argv)), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


# --- parsing ------------------------------------------------------------------------


def test_parse_verify_example():
    cfg = parse_args(["verify", "--alpha1", CBRT2, "--alpha2", CBRT4, "--gamma", "2", "--height", "1000"])
    assert cfg == CliConfig("verify", CBRT2, CBRT4, 1000, Fraction(2))


@pytest.mark.parametrize("argv, flag", [
    (["verify", "--alpha1", CBRT2, "--height", "10"], "--alpha2"),
    (["verify", "--alpha1", "alg:-2,0,1@[2,3]", "--alpha2", CBRT4, "--height", "10"], "--alpha1"),
    (["verify", "--alpha1", CBRT2, "--alpha2", CBRT4, "--height", "0"], "--height"),
    (["verify", "--alpha1", CBRT2, "--alpha2", CBRT4, "--height", "10", "--gamma", "3/2"], "--gamma"),
    (["verify", "--alpha1", CBRT2, "--alpha2", CBRT4, "--height", "10", "--Gamma", "1"], "--Gamma"),
    (["verify", "--alpha1", CBRT2, "--alpha2", CBRT4, "--height", "10", "--precision-cap", "64"], "--precision-cap"),
    (["verify", "--alpha1", CBRT2, "--alpha2", CBRT4, "--height", "10", "--format", "xml"], "--format"),
    (["frobnicate"], "frobnicate"),
])
def test_usage_errors_name_the_flag(argv, flag):
    with pytest.raises(UsageError, match=flag):
        parse_args(argv)


def test_missing_flag_exit_status():
    res = cli("verify", "--alpha1", CBRT2, "--height", "10")
    assert res.returncode == 2
    diag = json.loads(res.stderr.strip().splitlines()[-1])
    assert diag["exit_status"] == 2 and "--alpha2" in diag["message"]


configs = st.builds(
    CliConfig,
    subcommand=st.sampled_from(["best-approx", "witness", "verify"]),
    alpha1=st.sampled_from([SQRT2, CBRT2, "rat:1/3", "dec:1.25e-8"]),
    alpha2=st.sampled_from([SQRT3, CBRT4]),
    height_bound=st.integers(1, 10**6),
    gamma=st.fractions(2, 50, max_denominator=20),
    Gamma=st.one_of(st.none(), st.fractions(Fraction(1, 10**6), Fraction(999, 1000), max_denominator=10**6)),
    precision_cap=st.one_of(st.none(), st.integers(128, 10**5)),
    output_format=st.sampled_from(["json", "csv"]),
    output=st.one_of(st.none(), st.sampled_from(["out.json", "/tmp/x y.csv"])),
)


@given(configs)
def test_render_round_trip(cfg):
    assert parse_args(render(cfg)) == cfg


# --- exit statuses ----------------------------------------------------------------


def test_rational_input_exit_3():
    code, out, err = run_config("best-approx", "--alpha1", "rat:1/3", "--alpha2", SQRT3, "--height", "100")
    assert code == 3
    assert json.loads(err)["error"] == "PrecisionExhausted"


def test_no_applicable_nu_exit_4():
    code, out, err = run_config("verify", "--alpha1", CBRT2, "--alpha2", CBRT4, "--height", "5")
    assert code == 4
    assert json.loads(err)["error"] == "NoApplicableNu"
    assert json.loads(out)["witnesses"] == []


def test_witness_without_applicable_nu_exit_4():
    code, _, err = run_config("witness", "--alpha1", CBRT2, "--alpha2", CBRT4, "--height", "5")
    assert code == 4


def test_violation_exit_5():
    code, _, err = run_config("verify", "--alpha1", CBRT2, "--alpha2", CBRT4, "--height", "100", "--Gamma", "1/2")
    assert code == 5
    assert json.loads(err)["error"] == "DiophantineConditionViolated"


def test_precision_cap_flag_and_env():
    # a decimal literal known to 1e-12 cannot be refined to 128 bits
    code, _, err = run_config("best-approx", "--alpha1", "dec:1.414213562373e-12", "--alpha2", SQRT3,
                              "--height", "10", "--precision-cap", "256")
    assert code == 3
    res = cli("best-approx", "--alpha1", SQRT2, "--alpha2", SQRT3, "--height", "10",
              env={"POSAPPROX_PRECISION_CAP": "64", "PATH": ""})
    assert res.returncode == 3


# --- golden files ----------------------------------------------------------------------


def test_best_approx_golden_is_oracle_validated():
    lines = (GOLDEN / "best_approx_sqrt_100.jsonl").read_text().splitlines()
    got = [tuple(json.loads(line)["m"]) for line in lines]
    assert got == brute_force_best_approximations(parse_descriptor(SQRT2), parse_descriptor(SQRT3), 100)


@pytest.mark.parametrize("argv, golden", [
    (["best-approx", "--alpha1", SQRT2, "--alpha2", SQRT3, "--height", "100"], "best_approx_sqrt_100.jsonl"),
    (["witness", "--alpha1", CBRT2, "--alpha2", CBRT4, "--height", "300"], "witness_cbrt_300.json"),
    (["verify", "--alpha1", CBRT2, "--alpha2", CBRT4, "--gamma", "2", "--height", "1000"], "verify_cbrt_1000.json"),
    (["verify", "--alpha1", CBRT2, "--alpha2", CBRT4, "--gamma", "2", "--height", "1000", "--format", "csv"],
     "verify_cbrt_1000.csv"),
])
def test_golden_output(argv, golden):
    code, out, _ = run_config(*argv)
    assert code == 0
    assert out == (GOLDEN / golden).read_text()


def test_witness_golden_content():
    doc = json.loads((GOLDEN / "witness_cbrt_300.json").read_text())
    assert doc["witnesses"] and not doc["failures"]
    for w in doc["witnesses"]:
        assert w["holds"] and min(w["x"]) > 0
        if w["case"] == "I":
            assert Fraction(w["value_hi"]) <= Fraction(16, max(w["x"]) ** 2)


def test_output_file_and_subprocess_determinism(tmp_path):
    args = ["verify", "--alpha1", CBRT2, "--alpha2", CBRT4, "--gamma", "2", "--height", "1000"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli(*args, "--output", str(a)).returncode == 0
    assert cli(*args, "--output", str(b)).returncode == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text() == (GOLDEN / "verify_cbrt_1000.json").read_text()


def test_main_entry_point(capsys):
    assert main(["best-approx", "--alpha1", SQRT2, "--alpha2", SQRT3, "--height", "3", "--format", "csv"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "nu,m0,m1,m2,M,zeta_lo,zeta_hi"
    assert out[1].startswith("1,-3,1,1,1,")

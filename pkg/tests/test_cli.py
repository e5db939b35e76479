import json
from fractions import Fraction

import pytest

from ssbmc.bench import SUITE_DIR, run_bench, suite_files, summarize
from ssbmc.bmc.encode import default_reference_format
from ssbmc.cli import main
from ssbmc.oracle import DEFAULT_CAP, enumerate_verify, search_space
from ssbmc.runner import run_task, task_from_spec, with_precision
from ssbmc.specfile import SpecFile, parse_spec
from ssbmc.statespace import quantize_system

ZERO = """A = [0];
B = [1];
C = [1];
D = [0];
implementation.int_bits = 2;
implementation.frac_bits = 4;
"""

EXAMPLE_23 = """% the <2,3> example: y(n+1) = 0.9 y(n) + u(n)
A = [0.9];
B = [1];
C = [1];
D = [0];
implementation.int_bits = 2;
implementation.frac_bits = 3;
inputs.min = -1;
inputs.max = 1;
"""


@pytest.fixture
def spec(tmp_path):
    def write(text, name="sys.ss"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


def test_verify_stability_of_zero_matrix(spec, capsys):
    assert main(["verify", spec(ZERO), "--property", "stability"]) == 0
    assert "HOLDS" in capsys.readouterr().out


def test_missing_file(capsys):
    assert main(["verify", "missing.ss"]) == 2
    assert "error" in capsys.readouterr().err


def test_spec_error_maps_to_exit_2(spec, capsys):
    assert main(["verify", spec("A = [1 2; 3];")]) == 2
    assert "dimension mismatch" in capsys.readouterr().err


def test_violated_and_unknown_exit_codes(spec):
    p = spec(ZERO.replace("A = [0]", "A = [1]"))
    assert main(["verify", p, "-p", "stability"]) == 1
    p2 = spec(EXAMPLE_23.replace("A = [0.9]", "A = [0.9 0; 0 0.5]").replace("B = [1]", "B = [0.1; 1]")
              .replace("C = [1]", "C = [1 1]").replace("frac_bits = 3", "frac_bits = 6"), "big.ss")
    code = main(["verify", p2, "-p", "quantization-error", "--bound", "6",
                 "--error-bound", "0.046875", "--timeout", "0", "--no-presolve"])
    assert code == 3


@pytest.mark.parametrize("eps", ["0.25", "0.0625", "0.015625"])
def test_example_23_engines_match_oracle(spec, eps):
    p = spec(EXAMPLE_23)
    parsed = parse_spec(SpecFile.read(p))
    q = quantize_system(parsed.system, parsed.format)
    expected = enumerate_verify(q, default_reference_format(q.fmt), 4, Fraction(eps)).outcome
    code = {"holds": 0, "violated": 1}[expected]
    args = ["verify", p, "--property", "quantization-error", "--bound", "4", "--error-bound", eps]
    assert main(args + ["--engine", "enumerate"]) == code
    assert main(args + ["--engine", "sat", "--no-presolve"]) == code
    assert main(args) == code


def test_quantization_error_needs_bound(spec, capsys):
    assert main(["verify", spec(EXAMPLE_23), "-p", "quantization-error"]) == 2
    assert "error bound" in capsys.readouterr().err


def test_unrepresentable_eps(spec, capsys):
    assert main(["verify", spec(EXAMPLE_23), "-p", "quantization-error", "--error-bound", "0.1"]) == 2
    assert "not representable" in capsys.readouterr().err


def test_closed_loop_flag(spec, capsys):
    p = spec(ZERO.replace("A = [0]", "A = [1.5]") + "K = [1];\n")
    assert main(["verify", p, "-p", "stability"]) == 1
    assert main(["verify", p, "-p", "stability", "--closed-loop"]) == 0
    assert main(["verify", spec(ZERO, "nok.ss"), "-p", "stability", "--closed-loop"]) == 2


def test_format_overrides(spec, capsys):
    p = spec(ZERO.replace("A = [0]", "A = [0.998]").replace("frac_bits = 4", "frac_bits = 14"))
    assert main(["verify", p, "-p", "stability"]) == 0
    assert main(["verify", p, "-p", "stability", "--frac-bits", "6"]) == 1
    assert main(["verify", p, "-p", "stability", "--frac-bits", "6", "--rounding", "truncate"]) == 0


def test_json_report_schema_and_reproducibility(spec, capsys):
    p = spec(EXAMPLE_23)
    args = ["verify", p, "-p", "quantization-error", "-k", "3", "--error-bound", "0.015625",
            "--no-presolve", "--json"]
    assert main(args) == 1
    first = json.loads(capsys.readouterr().out)
    assert set(first) == {"task", "verdict", "evidence", "counterexample", "stats"}
    assert first["task"]["format"] == {"int_bits": 2, "frac_bits": 3, "rounding": "nearest", "overflow": "wrap"}
    assert first["verdict"]["outcome"] == "violated"
    cex = first["counterexample"]
    assert len(cex["inputs"]) == 3
    assert all(Fraction(v["value"]) == Fraction(v["raw"], 8) for u in cex["inputs"] for v in u)
    assert Fraction(cex["error"]) > Fraction(1, 64)
    assert {"conflicts", "decisions", "propagations"} <= set(first["stats"]["solver"])
    assert main(args) == 1
    second = json.loads(capsys.readouterr().out)
    for doc in (first, second):
        doc["stats"].pop("timings")
    assert json.dumps(first, sort_keys=True) == json.dumps(second, sort_keys=True)


def test_all_properties_by_default(spec, capsys):
    assert main(["verify", spec(EXAMPLE_23), "--json"]) == 0
    docs = json.loads(capsys.readouterr().out)
    assert [d["task"]["property"] for d in docs] == ["stability", "controllability", "observability"]


def test_export(spec, tmp_path):
    out = tmp_path / "f.cnf"
    code = main(["export", spec(EXAMPLE_23), "-k", "2", "--error-bound", "0.25", "-o", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    header = next(l for l in lines if l.startswith("p cnf"))
    nv, nc = map(int, header.split()[2:])
    assert nc == sum(1 for l in lines if not l.startswith(("c", "p")))
    assert sum(1 for l in lines if l.startswith("c input")) == 2 * 5


def test_dimacs_out_with_verify(spec, tmp_path):
    out = tmp_path / "v.cnf"
    main(["verify", spec(EXAMPLE_23), "-p", "quantization-error", "-k", "2", "--error-bound", "0.25",
          "--dimacs-out", str(out)])
    assert out.read_text().count("p cnf") == 1


def test_bench_empty_directory(tmp_path, capsys):
    assert main(["bench", str(tmp_path)]) == 2


def test_bench_rows_and_table(spec, tmp_path, capsys):
    spec(ZERO.replace("A = [0]", "A = [0.998]"), "a.ss")
    spec(EXAMPLE_23 + "error.bound = 0.25;\nbound = 2;\n", "b.ss")
    out = tmp_path / "r.json"
    assert main(["bench", str(tmp_path), "--jobs", "1", "--json", str(out)]) == 0
    text = capsys.readouterr().out
    assert "8-bit" in text and "32-bit" in text
    doc = json.loads(out.read_text())
    assert len(doc["rows"]) == 2 * 4 * 3
    a8 = [r for r in doc["rows"] if r["system"] == "a" and r["precision"] == 8]
    assert {r["property"]: r["outcome"] for r in a8}["stability"] == "violated"
    assert {r["property"]: r["outcome"] for r in a8}["quantization-error"] == "skipped"


def test_trend_flag():
    rows = [{"system": "s", "precision": w, "property": "stability", "outcome": o, "time": 0.0}
            for w, o in [(8, "holds"), (16, "holds"), (32, "violated")]]
    res = summarize(rows, [8, 16, 32], ["stability"], 0.0)
    assert res["trend_violations"] == ["stability: fewer violations at 8 bits than at 32 bits"]
    rows[0]["outcome"] = "violated"
    assert summarize(rows, [8, 16, 32], ["stability"], 0.0)["trend_violations"] == []


def test_shipped_suite_shape():
    files = suite_files(SUITE_DIR)
    assert len(files) >= 10
    sizes = set()
    for f in files:
        parsed = parse_spec(SpecFile.read(f))
        sizes.add(parsed.system.n_states)
        assert parsed.error_bound is not None and parsed.bound <= 6
    assert sizes == {1, 2, 3, 4}


def test_suite_engines_agree_where_enumerable():
    """sat and enumerate agree on every suite instance under the oracle cap."""
    checked = 0
    for f in suite_files(SUITE_DIR):
        for w in (8, 16, 32):
            parsed = with_precision(parse_spec(SpecFile.read(f)), w)
            q = quantize_system(parsed.system, parsed.format)
            if search_space(q, parsed.bound) > DEFAULT_CAP:
                continue
            sat = run_task(parsed, task_from_spec(parsed, "quantization-error", presolve=False))
            enum = run_task(parsed, task_from_spec(parsed, "quantization-error", engine="enumerate"))
            assert sat.verdict.outcome == enum.verdict.outcome, (f.stem, w)
            checked += 1
    assert checked >= 3


def test_suite_has_systems_destabilised_by_8bit_quantization():
    from ssbmc.properties import check_stability
    lost = []
    for f in suite_files(SUITE_DIR):
        parsed = parse_spec(SpecFile.read(f))
        q8 = quantize_system(parsed.system, with_precision(parsed, 8).format)
        if check_stability(parsed.system).holds and not check_stability(q8).holds:
            lost.append(f.stem)
    assert len(lost) >= 2, lost

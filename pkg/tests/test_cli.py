import json

import numpy as np
import pytest

from ultradiff.cli import _parse_distribution, _parse_gen_poly, main
from ultradiff.distributions import Combination, Delta, Gaussian


def _load(path):
    return json.loads(path.read_text())


# ---------------------------------------------------------------------------
# weights subcommands

def test_weights_analyze_gevrey_one(tmp_path):
    assert main(["weights", "analyze", "gevrey:1",
                 "--out", str(tmp_path)]) == 0
    report = _load(tmp_path / "analysis.json")
    assert report["regular"] is True
    assert report["moderate_growth"]["ok"] is True
    assert report["quasianalytic"] == "CONVERGENT"
    assert report["weight"] == "gevrey:1"
    table = (tmp_path / "omega_table.csv").read_text().splitlines()
    assert table[0] == "t,omega,log_small_h,log_h_tilde"
    assert len(table) == 42


def test_weights_analyze_flag_matches_positional(tmp_path):
    main(["weights", "analyze", "gevrey:2", "--out", str(tmp_path / "a")])
    main(["weights", "analyze", "--weight", "gevrey:2",
          "--out", str(tmp_path / "b")])
    a = _load(tmp_path / "a" / "analysis.json")
    b = _load(tmp_path / "b" / "analysis.json")
    a["config"].pop("out"), b["config"].pop("out")
    assert a == b


def test_weights_analyze_divergent_family(tmp_path):
    assert main(["weights", "analyze", "gevrey:0",
                 "--out", str(tmp_path)]) == 0
    report = _load(tmp_path / "analysis.json")
    assert report["quasianalytic"] == "DIVERGENT"


def test_weights_compare_gevrey_halves(tmp_path):
    assert main(["weights", "compare", "gevrey:0.5", "gevrey:1",
                 "--out", str(tmp_path)]) == 0
    report = _load(tmp_path / "compare.json")
    assert report["precedes"] is True
    assert report["precedes_reverse"] is False
    assert report["equivalent"] is False


def test_weights_eval_omega_at_one(tmp_path):
    assert main(["weights", "eval", "gevrey:1", "--omega", "--t", "1",
                 "--out", str(tmp_path)]) == 0
    report = _load(tmp_path / "eval.json")
    assert report["omega"] == [0.0]
    assert report["t"] == [1.0]


def test_weights_eval_multiple_functions(tmp_path):
    assert main(["weights", "eval", "gevrey:1", "--omega", "--h-tilde",
                 "--t", "0.5,2", "--out", str(tmp_path)]) == 0
    report = _load(tmp_path / "eval.json")
    assert report["t"] == [0.5, 2.0]
    assert report["omega"][0] == 0.0
    assert report["h_tilde"][0] == pytest.approx(-np.log(2.0))


def test_weights_eval_defaults_to_omega(tmp_path):
    assert main(["weights", "eval", "gevrey:1", "--t", "1",
                 "--out", str(tmp_path)]) == 0
    assert "omega" in _load(tmp_path / "eval.json")


# ---------------------------------------------------------------------------
# wavefront command

def test_wf_delta_is_singular_both_ways(tmp_path):
    assert main(["wf", "--dist", "delta", "--out", str(tmp_path)]) == 0
    report = _load(tmp_path / "wavefront.json")
    verdicts = {(e["x"], e["direction"]): e["verdict"]
                for e in report["entries"]}
    assert verdicts == {(0.0, -1.0): "SINGULAR", (0.0, 1.0): "SINGULAR"}
    svg = (tmp_path / "wavefront.svg").read_text()
    assert svg.startswith("<svg")


def test_wf_combination_spec(tmp_path):
    assert main(["wf", "--dist", "abs - 2*delta", "--points=-0.5,0,0.5",
                 "--tau-sing", "0.35", "--out", str(tmp_path)]) == 0
    report = _load(tmp_path / "wavefront.json")
    at = {(e["x"], e["direction"]): e["verdict"] for e in report["entries"]}
    assert at[(0.0, 1.0)] == "SINGULAR"
    assert at[(0.5, 1.0)] == "REGULAR"


def test_wf_config_round_trip_is_byte_identical(tmp_path):
    first = tmp_path / "first"
    second = tmp_path / "second"
    assert main(["wf", "--dist", "gaussian", "--lambda-points", "8",
                 "--out", str(first)]) == 0
    assert main(["wf", "--config", str(first / "run.cfg"),
                 "--out", str(second)]) == 0
    assert (first / "wavefront.json").read_bytes() \
        == (second / "wavefront.json").read_bytes()
    assert (first / "wavefront.svg").read_bytes() \
        == (second / "wavefront.svg").read_bytes()


def test_wf_rerun_reproduces_all_files(tmp_path):
    argv = ["wf", "--dist", "delta", "--lambda-points", "6",
            "--out", str(tmp_path)]
    assert main(argv) == 0
    snapshot = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    assert main(argv) == 0
    assert {p.name: p.read_bytes() for p in tmp_path.iterdir()} == snapshot


def test_wf_partial_failures_respect_strict(tmp_path):
    # a coarsely sampled input cannot feed the highest-frequency kernels,
    # so its rays error out; that lands in the report, and in the exit
    # code only under --strict
    xs = np.linspace(-2.0, 2.0, 81)
    table = tmp_path / "coarse.csv"
    table.write_text("\n".join(
        f"{x},{np.exp(-x * x)}" for x in xs) + "\n")
    argv = ["wf", "--dist", f"sampled:{table}", "--out", str(tmp_path)]
    assert main(argv) == 0
    report = _load(tmp_path / "wavefront.json")
    assert all(e["verdict"] == "ERROR" for e in report["entries"])
    assert "spacing" in report["entries"][0]["error"]
    assert main(argv + ["--strict"]) == 1


# ---------------------------------------------------------------------------
# almost-analytic commands

def test_aa_verify_matches_library_values(tmp_path):
    assert main(["aa", "verify", "--func", "flat:1",
                 "--weight", "gevrey:1@2048", "--order", "40",
                 "--x-span", "0.1,0.5", "--y-max", "0.2",
                 "--out", str(tmp_path)]) == 0
    report = _load(tmp_path / "dbar_report.json")
    assert report["ok"] is True
    assert report["Q"] == 13.45434264405944
    assert report["C"] == 28.761433603159496


def test_aa_jump_emits_convention_note(tmp_path):
    assert main(["aa", "jump", "--out", str(tmp_path)]) == 0
    report = _load(tmp_path / "jump.json")
    assert report["ok"] is True
    assert len(report["rows"]) == 3
    assert "2*pi*i" in report["note"]
    assert all(row["residual"] <= row["bound"] for row in report["rows"])


def test_aa_trend_flags_mismatched_weight(tmp_path):
    assert main(["aa", "trend", "--func", "flat:1",
                 "--weight", "gevrey:0.4@2048", "--out", str(tmp_path)]) == 0
    report = _load(tmp_path / "trend.json")
    assert report["exceeded"] is True
    assert report["ok"] is False
    assert report["scales"][-1] > report["scale_cap"]


def test_aa_trend_accepts_matched_weight(tmp_path):
    assert main(["aa", "trend", "--func", "flat:1",
                 "--weight", "gevrey:1@2048", "--out", str(tmp_path)]) == 0
    report = _load(tmp_path / "trend.json")
    assert report["exceeded"] is False
    assert report["ok"] is True


# ---------------------------------------------------------------------------
# symbol commands

def test_symbol_char_wave_diagonals(tmp_path):
    assert main(["symbol", "char", "--symbol", "xi1^2 - xi2^2",
                 "--points", "0,0", "--out", str(tmp_path)]) == 0
    report = _load(tmp_path / "char.json")
    assert report["count"] == 4
    rows = (tmp_path / "char.csv").read_text().splitlines()
    assert rows[0] == "x1,x2,xi1,xi2,det,scale,characteristic"
    assert len(rows) == 65
    assert sum(row.endswith("true") for row in rows[1:]) == 4


def test_symbol_bichar_writes_curve(tmp_path):
    assert main(["symbol", "bichar", "--out", str(tmp_path)]) == 0
    report = _load(tmp_path / "bichar.json")
    assert report["on_characteristic"] is True
    assert report["drift"] <= 1e-10
    assert report["endpoint"][0] == pytest.approx(20.0, abs=1e-9)
    lines = (tmp_path / "curve.csv").read_text().splitlines()
    assert lines[0] == "t,x1,x2,xi1,xi2,p_drift"
    assert len(lines) == 2002


def test_symbol_bracket_poisson(tmp_path):
    assert main(["symbol", "bracket", "--p", "xi1", "--q", "x1",
                 "--out", str(tmp_path)]) == 0
    assert _load(tmp_path / "bracket.json")["bracket"] == "1"


def test_symbol_bracket_mixed_dimensions(tmp_path):
    assert main(["symbol", "bracket", "--p", "xi1", "--q", "x2*xi2",
                 "--out", str(tmp_path)]) == 0
    assert _load(tmp_path / "bracket.json")["bracket"] == "0"


def test_symbol_bracket_lie(tmp_path):
    assert main(["symbol", "bracket", "--kind", "lie",
                 "--p", "1; 0", "--q", "0; x1", "--out", str(tmp_path)]) == 0
    assert _load(tmp_path / "bracket.json")["bracket"] == "0 | 1"


def test_symbol_type_grushin_default(tmp_path):
    assert main(["symbol", "type", "--out", str(tmp_path)]) == 0
    report = _load(tmp_path / "type.json")
    assert report["rank_by_length"] == [1, 2, 2, 2]
    assert report["type_length"] == 2
    assert report["finite"] is True


def test_symbol_type_custom_point(tmp_path):
    assert main(["symbol", "type", "--point", "1,0",
                 "--out", str(tmp_path)]) == 0
    assert _load(tmp_path / "type.json")["type_length"] == 1


def test_symbol_holmgren_both_verdicts(tmp_path):
    assert main(["symbol", "holmgren", "--symbol", "xi1^2 + xi2^2",
                 "--grad", "1,0", "--x0", "0,0",
                 "--out", str(tmp_path / "e")]) == 0
    good = _load(tmp_path / "e" / "holmgren.json")
    assert good["noncharacteristic"] is True
    assert "uniqueness across the surface" in good["statement"]
    assert main(["symbol", "holmgren", "--symbol", "xi1^2 - xi2^2",
                 "--grad", "1,-1", "--x0", "0,0",
                 "--out", str(tmp_path / "c")]) == 0
    flat = _load(tmp_path / "c" / "holmgren.json")
    assert flat["noncharacteristic"] is False


# ---------------------------------------------------------------------------
# plumbing: exit codes, config files, spec parsing

def test_bad_weight_spec_is_a_usage_error(tmp_path, capsys):
    assert main(["weights", "analyze", "nosuch:1",
                 "--out", str(tmp_path)]) == 2
    assert "bad weight spec" in capsys.readouterr().err


def test_bad_symbol_is_a_usage_error(tmp_path, capsys):
    assert main(["symbol", "char", "--symbol", "xi1 @@",
                 "--out", str(tmp_path)]) == 2
    assert "position" in capsys.readouterr().err


def test_module_error_exits_one(tmp_path, capsys):
    # the default table cannot evaluate small_h this far down
    assert main(["weights", "eval", "gevrey:1", "--small-h",
                 "--t", "0.0001", "--out", str(tmp_path)]) == 1
    assert "K" in capsys.readouterr().err


def test_unknown_config_key_is_a_usage_error(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense=1\n")
    assert main(["wf", "--config", str(cfg)]) == 2
    assert "nonsense" in capsys.readouterr().err


def test_missing_config_file_is_a_usage_error(tmp_path):
    assert main(["wf", "--config", str(tmp_path / "absent.cfg")]) == 2


def test_config_file_values_are_overridden_by_flags(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("weight=gevrey:1\nt=1\nomega=true\n")
    out = tmp_path / "out"
    assert main(["weights", "eval", "--config", str(cfg), "--t", "2",
                 "--out", str(out)]) == 0
    report = _load(out / "eval.json")
    assert report["t"] == [2.0]
    assert report["config"]["weight"] == "gevrey:1"


def test_run_config_lists_every_effective_option(tmp_path):
    assert main(["wf", "--dist", "gaussian", "--lambda-points", "6",
                 "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "run.cfg").read_text().splitlines()
    assert lines[0] == "# command: wf"
    keys = {line.split("=")[0] for line in lines[1:]}
    assert {"dist", "weight", "gen_poly", "points", "directions",
            "lambda_min", "lambda_max", "lambda_points", "tau_reg",
            "tau_sing", "out", "strict"} == keys


def test_distribution_spec_sums():
    combo = _parse_distribution("abs - 2*delta")
    assert isinstance(combo, Combination)
    coeffs = sorted(c.real for c, _ in combo.terms)
    assert coeffs == [-2.0, 1.0]
    atom = _parse_distribution("delta:0.5")
    assert isinstance(atom, Delta) and atom.location == 0.5
    scaled = _parse_distribution("2*gaussian")
    ((c, a),) = scaled.terms
    assert c == 2.0 and isinstance(a, Gaussian)


def test_gen_poly_specs():
    assert _parse_gen_poly("classical:1").terms == (((2,), 1.0),)
    assert _parse_gen_poly("quartic:1").k == 2
    with pytest.raises(Exception):
        _parse_gen_poly("cubic:1")

"""Tests for scenarios, reports, the runner and the command line."""

import copy
import json
import math

import numpy as np
import pytest

from src.dynamics.walk import StepFunction
from src.errors import ConfigError, DilationRequiredError
from src.generators.ito import StructureKind
from src.harness import selftest
from src.harness.report import (
    CSV_HEADER,
    FLOW_HALVING_RATIO,
    ConvergenceReport,
    FlowReport,
    ReportRow,
    estimate_order,
    pair_rows,
    read_csv,
    recompute_orders,
    rows_to_csv,
    windowed_order,
)
from src.harness.runner import flow_cauchy_check, run_scenario, sup_error
from src.harness.scenario import ScenarioConfig, Tolerances, parse_complex_array, parse_step_function
from src.main import build_parser, cmd_order, cmd_run, cmd_selftest, main
from src.models.families import preservation_family
from src.models.rqi import rqi_family

RQI_SCENARIO = {
    "name": "rqi-scalar",
    "dims": {"d_h": 1, "d_k": 1},
    "family": {
        "type": "rqi",
        "params": {"H_S": [[1.0]], "H_P": [[0.0, 0.0], [0.0, 1.0]], "V_D": [[1.0]], "H_Sc": [[0.5]]},
    },
    "test_functions": [
        {"f": {"breakpoints": [0, 0.5], "values": [[0.5], [1.0]]}, "g": {"constant": [0.8]}},
    ],
    "T": 1.0,
    "h_grid": [0.0625, 0.03125, 0.015625],
    "tolerances": {"final_ratio": 1.0},
}


def scenario(**overrides) -> dict:
    data = copy.deepcopy(RQI_SCENARIO)
    data.update(overrides)
    return data


class TestParsing:
    """Tests for scenario parsing."""

    def test_complex_pairs(self):
        """Test [re, im] leaves become complex entries."""
        arr = parse_complex_array([[[1, 0], [0, 1]]], "x", 2)
        assert arr.shape == (1, 2)
        assert arr[0, 1] == 1j

    def test_real_leaves(self):
        """Test plain numbers are read as real entries."""
        arr = parse_complex_array([[1, 2], [3, 4]], "x", 2)
        assert arr[1, 0] == 3

    def test_wrong_rank(self):
        """Test a vector where a matrix is expected is rejected with its path."""
        with pytest.raises(ConfigError) as exc_info:
            parse_complex_array([1, 2, 3], "family.params.Z", 2)
        assert exc_info.value.path == "family.params.Z"

    def test_step_function(self):
        """Test both step function encodings."""
        f = parse_step_function({"breakpoints": [0, 0.5], "values": [[1], [2]]}, "f")
        assert f.evaluate(0.75)[0] == 2
        c = parse_step_function({"constant": [[0, 1]]}, "g")
        assert c.evaluate(3.0)[0] == 1j

    def test_step_function_errors_are_config_errors(self):
        """Test invalid breakpoints surface as ConfigError."""
        with pytest.raises(ConfigError):
            parse_step_function({"breakpoints": [0.5], "values": [[1]]}, "f")

    def test_scenario(self):
        """Test a complete scenario document."""
        cfg = ScenarioConfig.from_dict(scenario())
        assert cfg.name == "rqi-scalar"
        assert (cfg.dim_h, cfg.dim_k) == (1, 1)
        assert cfg.h_grid == [0.0625, 0.03125, 0.015625]
        assert cfg.tolerances.final_ratio == 1.0
        assert cfg.build_family().kind is StructureKind.UNITARY

    def test_load(self, tmp_path):
        """Test loading from a JSON file."""
        path = tmp_path / "rqi.json"
        path.write_text(json.dumps(scenario()))
        assert ScenarioConfig.load(path).family_type == "rqi"

    def test_invalid_json(self, tmp_path):
        """Test unparsable files raise ConfigError."""
        path = tmp_path / "broken.json"
        path.write_text("{")
        with pytest.raises(ConfigError):
            ScenarioConfig.load(path)

    def test_missing_dims(self):
        """Test a missing required key names its path."""
        data = scenario()
        del data["dims"]
        with pytest.raises(ConfigError, match="dims"):
            ScenarioConfig.from_dict(data)

    def test_unknown_family(self):
        """Test the family type is validated."""
        with pytest.raises(ConfigError, match="family.type"):
            ScenarioConfig.from_dict(scenario(family={"type": "lindblad"}))

    def test_nonpositive_h(self):
        """Test step sizes must be positive."""
        with pytest.raises(ConfigError, match=r"h_grid\[1\]"):
            ScenarioConfig.from_dict(scenario(h_grid=[0.1, 0.0]))

    def test_unknown_tolerance(self):
        """Test unknown tolerance keys are rejected."""
        with pytest.raises(ConfigError):
            Tolerances.from_dict({"slack": 0.1})

    def test_noise_dimension_mismatch(self):
        """Test test functions must match the family noise dimension."""
        data = scenario(test_functions=[{"f": {"constant": [1, 0]}, "g": {"constant": [0, 1]}}])
        with pytest.raises(ConfigError, match="test_functions"):
            ScenarioConfig.from_dict(data).build_family()

    def test_inconsistent_matrices(self):
        """Test model errors are reported as configuration errors."""
        data = scenario()
        data["family"]["params"]["H_S"] = [[0.0, 1.0], [0.0, 0.0]]
        with pytest.raises(ConfigError):
            ScenarioConfig.from_dict(data).build_family()

    def test_from_generator_outside_class(self):
        """Test DilationRequiredError is not swallowed."""
        data = scenario(family={"type": "from_generator", "params": {"F": [[0, 1], [1, 0]]}})
        with pytest.raises(DilationRequiredError):
            ScenarioConfig.from_dict(data).build_family()

    def test_random_compressed_family(self):
        """Test random data and noise compression by dimension."""
        data = scenario(
            dims={"d_h": 1, "d_k": 2},
            family={"type": "preservation", "params": {"random": True}, "compress": {"dim": 1}},
            seed=5,
        )
        family = ScenarioConfig.from_dict(data).build_family()
        assert family.dims == (1, 1)

    def test_table_family(self):
        """Test an explicit table of G(h)."""
        identity = [[1, 0], [0, 1]]
        data = scenario(
            family={
                "type": "explicit_Gh_table",
                "params": {"table": [{"h": 0.5, "G": identity}], "limit": [[0, 0], [0, 0]]},
            }
        )
        family = ScenarioConfig.from_dict(data).build_family()
        assert family(0.5).norm() == pytest.approx(1.0)
        assert family.kind is StructureKind.UNITARY

    @pytest.mark.parametrize(
        "G, kind",
        [
            ([[0, 1], [1, 0]], StructureKind.UNITARY),
            ([[1, 0], [0, 0.5]], StructureKind.QUASICONTRACTIVE),
            ([[2, 0], [0, 2]], StructureKind.GENERAL),
        ],
    )
    def test_built_family_kind_is_certified(self, G, kind, caplog):
        """Test the built family carries the class observed on its step sizes, not the one of its limit."""
        data = scenario(
            family={
                "type": "explicit_Gh_table",
                "params": {"table": [{"h": 0.5, "G": G}, {"h": 0.125, "G": G}], "limit": [[0, 0], [0, 0]]},
            }
        )
        with caplog.at_level("WARNING"):
            family = ScenarioConfig.from_dict(data).build_family()
        assert family.kind is kind
        assert ("observed" in caplog.text) == (kind is not StructureKind.UNITARY)

    def test_flow_spec(self):
        """Test the optional flow block."""
        cfg = ScenarioConfig.from_dict(scenario(flow={"x": [[1]], "T": 0.5, "h_grid": [0.5, 0.25]}))
        assert cfg.flow.T == 0.5
        assert cfg.flow.x.shape == (1, 1)


class TestOrders:
    """Tests for order estimates and pass flags."""

    def test_exact_slope(self):
        """Test a pure power law gives its exponent."""
        hs = [2.0**-k for k in range(4, 9)]
        assert estimate_order([3 * h for h in hs], hs) == pytest.approx(1.0)
        assert estimate_order([h**0.5 for h in hs], hs) == pytest.approx(0.5)

    def test_rejects_bad_input(self):
        """Test too few points and nonpositive errors are rejected."""
        with pytest.raises(ValueError):
            estimate_order([1.0], [0.1])
        with pytest.raises(ValueError):
            estimate_order([1.0, 0.0], [0.1, 0.05])

    def test_windowed_order_undefined(self):
        """Test zero errors give nan."""
        assert math.isnan(windowed_order([0.0, 0.0], [0.1, 0.05], 4))

    def test_decreasing_errors_pass(self):
        """Test a first-order sequence passes."""
        hs = [2.0**-k for k in range(4, 10)]
        rows = pair_rows(0, hs, [h for h in hs], Tolerances(order_min=0.9, order_max=1.1), 4)
        assert all(row.passed for row in rows)
        assert rows[-1].order_estimate == pytest.approx(1.0)
        assert math.isnan(rows[0].order_estimate)

    def test_increase_fails(self):
        """Test an error growing beyond the slack fails its row."""
        rows = pair_rows(0, [0.1, 0.05, 0.025], [1.0, 1.2, 0.01], Tolerances(), 4)
        assert [row.passed for row in rows] == [True, False, True]

    def test_slack_allows_small_increase(self):
        """Test growth within the monotone slack passes."""
        rows = pair_rows(0, [0.1, 0.05, 0.025], [1.0, 1.04, 0.01], Tolerances(), 4)
        assert rows[1].passed

    def test_stalled_sequence_fails(self):
        """Test the final error must drop below the final ratio."""
        rows = pair_rows(0, [0.1, 0.05], [1.0, 0.9], Tolerances(), 4)
        assert not rows[-1].passed

    def test_order_window(self):
        """Test the order bounds apply to the last row."""
        hs = [2.0**-k for k in range(4, 10)]
        rows = pair_rows(0, hs, [h**0.5 for h in hs], Tolerances(final_ratio=1.0, order_min=0.9), 4)
        assert not rows[-1].passed

    def test_all_zero_passes(self):
        """Test exact agreement passes every row."""
        rows = pair_rows(0, [0.1, 0.05], [0.0, 0.0], Tolerances(), 4)
        assert all(row.passed for row in rows)


class TestReport:
    """Tests for the CSV report."""

    def rows(self):
        return [
            ReportRow(0, 0.0625, 0.25, math.nan, True),
            ReportRow(0, 0.03125, 1 / 7, 0.5, False),
        ]

    def test_csv_format(self):
        """Test header, full precision and flags."""
        text = rows_to_csv(self.rows())
        lines = text.split("\n")
        assert lines[0] == ",".join(CSV_HEADER)
        assert lines[1] == "0,0.0625,0.25,nan,true"
        assert lines[2].endswith(",false")
        assert "\r" not in text

    def test_read_back(self, tmp_path):
        """Test stored floats are reproduced exactly."""
        path = tmp_path / "report.csv"
        ConvergenceReport("demo", self.rows()).write_csv(path)
        rows = read_csv(path)
        assert rows[1].sup_error == 1 / 7
        assert rows[1].passed is False
        assert math.isnan(rows[0].order_estimate)

    def test_bad_header(self, tmp_path):
        """Test a foreign CSV is rejected."""
        path = tmp_path / "other.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ConfigError):
            read_csv(path)

    def test_recompute_orders(self):
        """Test orders are recomputed per pair."""
        hs = [0.1, 0.05, 0.025]
        rows = [ReportRow(0, h, h * h, 0.0, True) for h in hs] + [ReportRow(1, h, h, 0.0, True) for h in hs]
        orders = recompute_orders(rows, 4)
        assert orders[0] == pytest.approx(2.0)
        assert orders[1] == pytest.approx(1.0)

    def test_summary(self):
        """Test the summary names the scenario and each pair."""
        report = ConvergenceReport("demo", self.rows(), FlowReport([0.5, 0.25, 0.125], [0.1, 0.05]))
        lines = report.summary_lines()
        assert lines[0] == "scenario demo: FAIL"
        assert "pair 0" in lines[1]
        assert "flow" in lines[-1]

    def test_flow_report(self):
        """Test ratios and the decrease check."""
        flow = FlowReport([0.5, 0.25, 0.125], [0.2, 0.1])
        assert flow.ratios == [0.5]
        assert flow.decreasing()
        assert not FlowReport([0.5, 0.25, 0.125], [0.1, 0.2]).decreasing()

    def test_flow_report_ratio(self):
        """Test the decrease check against a required ratio."""
        flow = FlowReport([0.5, 0.25, 0.125, 0.0625], [0.2, 0.1, 0.09])
        assert flow.decreasing()
        assert not flow.decreasing(FLOW_HALVING_RATIO)
        assert FlowReport([0.5, 0.25, 0.125], [0.2, 0.14]).decreasing(FLOW_HALVING_RATIO)


class TestRunner:
    """Tests for sweeps over h."""

    def test_preservation_vacuum_is_exact(self):
        """Test g = 0 gives zero error for the preservation family."""
        family = preservation_family(np.diag([0.5, 0.2]), 1)
        f = StepFunction([0.0, 0.5], [[0.3, 0.1], [0.0, 1.0]])
        assert sup_error(family, f, StepFunction.zero(2), 0.125, 1.0) == 0.0

    def test_rqi_scenario(self):
        """Test the scalar RQI scenario passes with decreasing errors."""
        report = run_scenario(ScenarioConfig.from_dict(scenario()), threads=1)
        errors = [row.sup_error for row in report.rows]
        assert errors[2] < errors[1] < errors[0]
        assert report.passed

    def test_parallel_matches_serial(self):
        """Test the CSV does not depend on the thread count."""
        cfg = ScenarioConfig.from_dict(selftest.determinism_scenario())
        assert run_scenario(cfg, threads=1).to_csv() == run_scenario(cfg, threads=3).to_csv()

    def test_flow_check(self):
        """Test each halving of the resolution removes at least a quarter of the Cauchy difference."""
        report = flow_cauchy_check(
            rqi_family(selftest.flow_rqi()), np.array([[0, 1], [1, 0]]), 0.5, [0.5, 0.25, 0.125, 0.0625]
        )
        assert len(report.differences) == 3
        assert all(d > 0 for d in report.differences)
        assert all(r <= FLOW_HALVING_RATIO for r in report.ratios)
        assert report.decreasing(FLOW_HALVING_RATIO)

    def test_flow_needs_two_resolutions(self):
        """Test a single resolution is rejected."""
        with pytest.raises(ValueError):
            flow_cauchy_check(rqi_family(selftest.flow_rqi()), np.eye(2), 0.5, [0.5])


class TestSelftest:
    """Tests for the built-in property checks."""

    def test_check_names(self):
        """Test every registered check has a unique name."""
        names = [name for name, _ in selftest.CHECKS]
        assert len(names) == 14
        assert len(set(names)) == len(names)

    @pytest.mark.parametrize(
        "name",
        ["monoid_axioms", "compose_params", "holevo_oracle", "skew_roundtrip", "scalar_identities", "noise_embedding", "determinism"],
    )
    def test_fast_checks_pass(self, name):
        """Test the inexpensive checks pass."""
        checks = dict(selftest.CHECKS)
        passed, detail = checks[name]()
        assert passed, detail

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "name",
        [
            "main_convergence",
            "euler_formula",
            "structure_classification",
            "rqi_limit",
            "bipartite",
            "growth_bounds",
            "flow_cauchy",
        ],
    )
    def test_convergence_checks_pass(self, name):
        """Test the checks that sweep the step-size grid pass."""
        checks = dict(selftest.CHECKS)
        passed, detail = checks[name]()
        assert passed, detail

    def test_every_check_is_exercised(self):
        """Test the fast and convergence lists together cover the registry."""
        fast = {"monoid_axioms", "compose_params", "holevo_oracle", "skew_roundtrip", "scalar_identities", "noise_embedding", "determinism"}
        slow = {"main_convergence", "euler_formula", "structure_classification", "rqi_limit", "bipartite", "growth_bounds", "flow_cauchy"}
        assert fast | slow == {name for name, _ in selftest.CHECKS}

    def test_run_selftest_reports_every_check(self, monkeypatch):
        """Test run_selftest returns one result per registered check."""
        monkeypatch.setattr(selftest, "CHECKS", [("quick", lambda: (True, "ok")), ("broken", lambda: (False, "bad"))])
        results = selftest.run_selftest()
        assert [r.name for r in results] == ["quick", "broken"]
        assert [r.passed for r in results] == [True, False]


class TestCommandLine:
    """Tests for the qwc entry point."""

    @pytest.mark.parametrize("handler", [cmd_run, cmd_selftest, cmd_order, build_parser, main])
    def test_handlers_are_documented(self, handler):
        """Test every command handler carries a docstring."""
        assert handler.__doc__ and handler.__doc__.strip()

    def test_parser_subcommands(self):
        """Test the parser wires each subcommand to its handler."""
        parser = build_parser()
        assert parser.parse_args(["selftest"]).handler is cmd_selftest
        assert parser.parse_args(["order", "r.csv", "--window", "3"]).handler is cmd_order
        assert parser.parse_args(["run", "s.json"]).handler is cmd_run

    def test_run_writes_csv(self, tmp_path, capsys):
        """Test run with --out and --summary."""
        config_path = tmp_path / "rqi.json"
        config_path.write_text(json.dumps(scenario()))
        out = tmp_path / "rqi.csv"
        code = main(["run", str(config_path), "--out", str(out), "--summary"])
        assert code == 0
        assert out.read_text().startswith(",".join(CSV_HEADER))
        assert "scenario rqi-scalar: PASS" in capsys.readouterr().out

    def test_run_to_stdout(self, tmp_path, capsys):
        """Test the CSV goes to stdout without --out."""
        config_path = tmp_path / "rqi.json"
        config_path.write_text(json.dumps(scenario()))
        assert main(["run", str(config_path)]) == 0
        assert capsys.readouterr().out.count("\n") == 4

    def test_config_error_exit_code(self, tmp_path):
        """Test configuration errors exit with 2."""
        config_path = tmp_path / "bad.json"
        config_path.write_text(json.dumps({"dims": {"d_h": 1, "d_k": 1}}))
        assert main(["run", str(config_path)]) == 2

    def test_failing_scenario_exit_code(self, tmp_path):
        """Test failed checks exit with 1."""
        config_path = tmp_path / "strict.json"
        config_path.write_text(json.dumps(scenario(tolerances={"final_ratio": 1e-6})))
        assert main(["run", str(config_path)]) == 1

    def test_order(self, tmp_path, capsys):
        """Test order recomputation from a stored report."""
        path = tmp_path / "report.csv"
        hs = [0.1, 0.05, 0.025]
        path.write_text(rows_to_csv([ReportRow(0, h, h, 1.0, True) for h in hs]))
        assert main(["order", str(path)]) == 0
        assert "pair 0: order 1.000000" in capsys.readouterr().out

    def test_order_missing_file(self, tmp_path):
        """Test an unreadable report exits with 2."""
        assert main(["order", str(tmp_path / "missing.csv")]) == 2

"""Tests for the command line interface."""

import json

import pytest
import yaml

from matching_advice import cli
from matching_advice.cli import build_parser, main
from matching_advice.models import load_instance


class TestParser:
    """Test cases for argument parsing."""

    def test_subcommand_required(self):
        """Test a missing subcommand exits with a usage error."""
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_defaults(self):
        """Test subcommand defaults."""
        args = build_parser().parse_args(["derand"])
        assert args.family == "semi_complete3"
        assert args.k == 1
        assert args.epsilon == 0.2


class TestCommands:
    """Test cases for each subcommand."""

    def test_gen_to_file(self, tmp_path):
        """Test gen writes a parseable instance."""
        out = tmp_path / "semi.txt"
        assert main(["gen", "--kind", "semi_complete", "-p", "c=4", "--out", str(out)]) == 0
        graph = load_instance(out)
        assert (graph.n, graph.m) == (4, 4)
        assert graph.neighbors(4) == (4,)

    def test_gen_stdout(self, capsys):
        """Test gen prints to stdout without --out."""
        assert main(["gen", "--kind", "random_bipartite", "-p", "n=3", "-p", "m=2", "--seed", "5"]) == 0
        lines = [line for line in capsys.readouterr().out.splitlines() if not line.startswith("#")]
        assert lines[0] == "3 2"

    def test_gen_bad_parameter(self):
        """Test a malformed or missing parameter returns 1."""
        assert main(["gen", "--kind", "semi_complete", "-p", "c"]) == 1
        assert main(["gen", "--kind", "semi_complete"]) == 1

    def test_bounds_json(self, capsys):
        """Test bounds emits a JSON table."""
        assert main(["bounds", "--kind", "category_ratio", "--k-max", "3", "--format", "json"]) == 0
        rows = json.loads(capsys.readouterr().out)
        assert [row["k"] for row in rows] == [1, 2, 3]

    def test_bounds_csv(self, capsys):
        """Test bounds emits CSV by default."""
        assert main(["bounds", "--kind", "partial_sums", "--k", "1"]) == 0
        assert capsys.readouterr().out.startswith("k,i,partial_sum")

    def test_bounds_advice_totals(self, capsys):
        """Test advice_lb rows carry the total over --requests requests."""
        assert main(["bounds", "--kind", "advice_lb", "--requests", "40", "--format", "json"]) == 0
        rows = json.loads(capsys.readouterr().out)
        assert rows
        assert all(row["bits_total"] == pytest.approx(40 * row["bits_per_request"]) for row in rows)

    def test_run_with_config(self, tmp_path, capsys):
        """Test run loads YAML and applies command-line overrides."""
        path = tmp_path / "experiment.yaml"
        path.write_text(
            yaml.safe_dump(
                {"algorithm": "greedy", "generator": "semi_complete", "generator_params": {"c": 5}}
            )
        )
        assert main(["run", "--config", str(path), "--trials", "4", "--seed", "9"]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["trials"] == 4
        assert summary["config"]["seed"] == 9
        assert summary["min_ratio"] == 1.0

    def test_run_writes_artifacts(self, tmp_path, capsys):
        """Test run --out writes the JSON summary and the per-trial CSV side by side."""
        path = tmp_path / "experiment.yaml"
        path.write_text("algorithm: kvv\ngenerator: semi_complete\ngenerator_params:\n  c: 4\ntrials: 3\n")
        out = tmp_path / "results" / "kvv"
        assert main(["run", "-c", str(path), "--out", str(out)]) == 0
        assert capsys.readouterr().out == ""
        summary = json.loads(out.with_suffix(".json").read_text())
        assert summary["trials"] == 3
        assert len(out.with_suffix(".csv").read_text().splitlines()) == 4

    def test_run_csv_stdout(self, tmp_path, capsys):
        """Test run prints per-trial CSV rows without --out."""
        path = tmp_path / "experiment.yaml"
        path.write_text("algorithm: kvv\ngenerator: semi_complete\ngenerator_params:\n  c: 4\ntrials: 3\n")
        assert main(["run", "-c", str(path), "--format", "csv"]) == 0
        assert len(capsys.readouterr().out.splitlines()) == 4

    def test_run_missing_config(self, tmp_path):
        """Test a missing config file returns 1."""
        assert main(["run", "--config", str(tmp_path / "absent.yaml")]) == 1

    def test_lb_build_ranking(self, tmp_path):
        """Test lb-build verifies and writes the Ranking lower-bound instance."""
        out = tmp_path / "lb.txt"
        assert main(["lb-build", "--kind", "ranking_lb", "-p", "n=64", "--out", str(out)]) == 0
        assert load_instance(out).n == 64

    def test_lb_build_gadget(self, capsys):
        """Test lb-build emits the gadget graph."""
        assert main(["lb-build", "--kind", "h_gadget", "-p", "z=4"]) == 0
        lines = [line for line in capsys.readouterr().out.splitlines() if not line.startswith("#")]
        assert lines[0] == "4 4"

    def test_lb_build_gadget_rejects_bad_witness(self, monkeypatch, capsys):
        """Test lb-build fails when the closed-form perfect matching is not in the gadget."""
        monkeypatch.setattr(cli, "h_gadget_perfect_matching", lambda z: [(i, 1) for i in range(1, z + 1)])
        assert main(["lb-build", "--kind", "h_gadget", "-p", "z=4"]) == 1
        assert capsys.readouterr().out == ""

    @pytest.mark.parametrize("matcher", ["greedy", "optimal"])
    def test_sgkh(self, matcher, capsys):
        """Test the reduction keeps the guess/matching equivalence."""
        assert main(["sgkh", "--c", "3", "--length", "10", "--matcher", matcher, "--seed", "2"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["characters"] == 10
        assert report["equivalence_holds"]
        if matcher == "optimal":
            assert report["correct"] == 10

    def test_derand(self, tmp_path, capsys):
        """Test derand checks every input and writes the manifest."""
        manifest = tmp_path / "cover.txt"
        assert main(["derand", "--out", str(manifest)]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["inputs"] == 6
        assert summary["covering_set_size"] >= 1
        assert manifest.exists()

    def test_selftest(self, capsys):
        """Test the invariant sweeps pass on graphs with two vertices per side."""
        assert main(["selftest", "--max-size", "2"]) == 0
        reports = json.loads(capsys.readouterr().out)
        assert all(report["ok"] for report in reports)
        assert {report["name"] for report in reports} >= {"max_matching", "eps_advice"}

    def test_selftest_samples(self, capsys):
        """Test --samples and --seed reach the sweeps."""
        argv = ["selftest", "--max-size", "2", "--suite", "greedy_half", "--samples", "25", "--seed", "3"]
        assert main(argv) == 0
        [report] = json.loads(capsys.readouterr().out)
        assert report["sampled"] == 25
        assert report["ok"]

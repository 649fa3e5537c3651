"""Tests for the she-spectrum command-line interface."""

import csv
import json

import numpy as np
import pytest

from she_spectrum.cli import cli
from she_spectrum.version import __version__


def read_table(path):
    """Split a CSV result file into (metadata, rows)."""
    lines = path.read_text().splitlines()
    meta = {}
    for line in lines:
        if not line.startswith("# "):
            break
        key, value = line[2:].split(": ", 1)
        meta[key] = json.loads(value)
    body = [line for line in lines if not line.startswith("#")]
    return meta, list(csv.DictReader(body))


class TestCli:
    """Tests for the command group."""

    def test_version(self, cli_runner):
        """Test --version."""
        result = cli_runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert __version__ in result.output

    def test_lists_commands(self, cli_runner):
        """Test that every study command is registered."""
        result = cli_runner.invoke(cli, ["--help"])
        assert result.exit_code == 0
        for name in ("eig", "converge", "mc", "weakform", "she"):
            assert name in result.output

    @pytest.mark.parametrize(
        "args",
        [
            ["eig", "--n", "3", "--k", "1"],
            ["converge", "--n-list", "3,7", "--k", "1"],
            ["weakform", "--n-list", "3,7", "--replicas", "2"],
        ],
    )
    def test_zero_noise_with_forced_path(self, cli_runner, path_file, args):
        """Test that --zero-noise and --forced-path together are a usage error."""
        forced = str(path_file(np.arange(9) / 8.0))
        result = cli_runner.invoke(cli, [*args, "--zero-noise", "--forced-path", forced])
        assert result.exit_code == 2
        assert "--forced-path" in result.output


class TestEig:
    """Tests for the eig command."""

    def test_noise_free_closed_form(self, cli_runner, temp_dir):
        """Test n = 3 without noise: 32 -+ 16 sqrt(2) and 32."""
        out = temp_dir / "eig.csv"
        args = ["eig", "--n", "3", "--k", "3", "--zero-noise", "--out", str(out)]
        result = cli_runner.invoke(cli, args)
        assert result.exit_code == 0
        meta, rows = read_table(out)
        negated = [float(row["eig_negA"]) for row in rows]
        assert negated == pytest.approx([9.372583, 32.0, 54.627417], abs=1e-6)
        assert [float(row["eig_A"]) for row in rows] == pytest.approx([-v for v in negated])
        assert meta["command"] == "eig"
        assert meta["zero_noise"] is True

    def test_stdout_is_byte_identical(self, cli_runner):
        """Test that two runs with one seed print the same bytes."""
        args = ["eig", "--n", "63", "--k", "4", "--seed", "7"]
        first = cli_runner.invoke(cli, args)
        second = cli_runner.invoke(cli, args)
        assert first.exit_code == 0
        assert first.output == second.output
        assert "k_index,eig_A,eig_negA" in first.output

    def test_json(self, cli_runner):
        """Test the JSON document on stdout."""
        result = cli_runner.invoke(cli, ["eig", "--n", "8", "--k", "2", "--format", "json"])
        document = json.loads(result.output)
        assert document["meta"]["n"] == 8
        assert [row["k_index"] for row in document["rows"]] == [1, 2]

    def test_zero_n(self, cli_runner):
        """Test that n = 0 is a usage error."""
        result = cli_runner.invoke(cli, ["eig", "--n", "0"])
        assert result.exit_code == 2

    def test_k_exceeds_n(self, cli_runner):
        """Test that k > n is a usage error."""
        result = cli_runner.invoke(cli, ["eig", "--n", "3", "--k", "4"])
        assert result.exit_code == 2
        assert "exceeds" in result.output

    def test_forced_path(self, cli_runner, path_file, temp_dir):
        """Test noise read off a forced path file."""
        values = np.concatenate(([0.0], np.cumsum(np.full(8, 0.125))))
        out = temp_dir / "forced.csv"
        result = cli_runner.invoke(
            cli,
            ["eig", "--n", "3", "--k", "1", "--forced-path", str(path_file(values))]
            + ["--out", str(out)],
        )
        assert result.exit_code == 0
        meta, rows = read_table(out)
        assert meta["fine_n"] == 8
        # B(t) = t puts X_i = dx = 1/4 on every node, shifting -A_n by -1.
        assert float(rows[0]["eig_negA"]) == pytest.approx(32 - 16 * np.sqrt(2) - 1.0)

    def test_forced_path_not_divisible(self, cli_runner, path_file):
        """Test that an incompatible forced path is a precondition failure."""
        result = cli_runner.invoke(
            cli, ["eig", "--n", "4", "--k", "1", "--forced-path", str(path_file(np.zeros(9)))]
        )
        assert result.exit_code == 3

    def test_missing_forced_path(self, cli_runner, temp_dir):
        """Test that an unreadable path file is an I/O failure."""
        result = cli_runner.invoke(
            cli, ["eig", "--n", "3", "--k", "1", "--forced-path", str(temp_dir / "missing.txt")]
        )
        assert result.exit_code == 4


class TestConverge:
    """Tests for the converge command."""

    def test_noise_free_limit(self, cli_runner, temp_dir):
        """Test lambda_1 near pi^2 at n = 1023 without noise."""
        out = temp_dir / "converge.csv"
        result = cli_runner.invoke(
            cli,
            ["converge", "--n-list", "255,1023", "--k", "1", "--zero-noise", "--out", str(out)],
        )
        assert result.exit_code == 0
        meta, rows = read_table(out)
        assert abs(float(rows[-1]["eigenvalue"]) - np.pi**2) < 1e-4
        assert float(rows[-1]["ritz_reference"]) == pytest.approx(np.pi**2)
        assert meta["fine_n"] == 65536

    def test_single_n_has_no_gap(self, cli_runner, temp_dir):
        """Test an empty gap column for one n."""
        out = temp_dir / "single.csv"
        result = cli_runner.invoke(
            cli, ["converge", "--n-list", "31", "--k", "2", "--fine", "1024", "--out", str(out)]
        )
        assert result.exit_code == 0
        _, rows = read_table(out)
        assert [row["gap_to_prev"] for row in rows] == ["", ""]

    def test_rows_per_n_and_k(self, cli_runner, temp_dir):
        """Test one row per (n, k) with gaps from the second n on."""
        out = temp_dir / "rows.csv"
        result = cli_runner.invoke(
            cli,
            ["converge", "--n-list", "15,31,63", "--k", "2", "--fine", "4096", "--out", str(out)],
        )
        assert result.exit_code == 0
        _, rows = read_table(out)
        keys = [(row["n"], row["k_index"]) for row in rows]
        assert keys[:3] == [("15", "1"), ("15", "2"), ("31", "1")]
        assert all(row["gap_to_prev"] != "" for row in rows[2:])

    def test_not_ascending(self, cli_runner):
        """Test that a descending list is a usage error."""
        result = cli_runner.invoke(cli, ["converge", "--n-list", "31,15"])
        assert result.exit_code == 2
        assert "ascending" in result.output

    def test_indivisible_fine_grid(self, cli_runner):
        """Test exit 3 with a suggested --fine."""
        result = cli_runner.invoke(cli, ["converge", "--n-list", "15,20", "--fine", "1000"])
        assert result.exit_code == 3
        assert "--fine" in result.output
        assert "1344" in result.output


class TestMc:
    """Tests for the mc command."""

    def test_blocks_and_self_distance(self, cli_runner, temp_dir):
        """Test row counts and a zero KS distance at the largest n."""
        out = temp_dir / "mc.csv"
        result = cli_runner.invoke(
            cli,
            ["mc", "--n-list", "8,16", "--k", "2", "--replicas", "50", "--out", str(out)],
        )
        assert result.exit_code == 0
        _, rows = read_table(out)
        quantile_rows = [row for row in rows if row["block"] == "quantiles"]
        ks_rows = [row for row in rows if row["block"] == "ks"]
        assert len(quantile_rows) == len(ks_rows) == 4
        largest = [float(row["ks_to_largest"]) for row in ks_rows if row["n"] == "16"]
        assert largest == [0.0, 0.0]

    def test_zero_noise_quantiles_coincide(self, cli_runner, temp_dir, closed_form):
        """Test that every quantile is the deterministic eigenvalue without noise."""
        out = temp_dir / "quiet.csv"
        result = cli_runner.invoke(
            cli,
            ["mc", "--n-list", "7", "--k", "1", "--replicas", "5", "--zero-noise"]
            + ["--out", str(out)],
        )
        assert result.exit_code == 0
        _, rows = read_table(out)
        values = [float(rows[0][f"q{p}"]) for p in ("0.05", "0.25", "0.5", "0.75", "0.95")]
        assert values == pytest.approx([closed_form(7, 1)] * 5)

    def test_workers_do_not_change_output(self, cli_runner, temp_dir):
        """Test identical rows for 1 and 3 workers."""
        tables = []
        for workers in ("1", "3"):
            out = temp_dir / f"mc{workers}.csv"
            args = ["mc", "--n-list", "8,16", "--k", "1", "--replicas", "40", "--seed", "9"]
            result = cli_runner.invoke(cli, [*args, "--workers", workers, "--out", str(out)])
            assert result.exit_code == 0
            tables.append(read_table(out)[1])
        assert tables[0] == tables[1]

    def test_zero_replicas(self, cli_runner):
        """Test that replicas = 0 is a usage error."""
        result = cli_runner.invoke(cli, ["mc", "--n-list", "8", "--replicas", "0"])
        assert result.exit_code == 2

    def test_forced_path_not_offered(self, cli_runner, path_file):
        """Test that Monte Carlo studies reject a forced path."""
        result = cli_runner.invoke(
            cli, ["mc", "--n-list", "8", "--forced-path", str(path_file([0.0, 1.0]))]
        )
        assert result.exit_code == 2


class TestWeakform:
    """Tests for the weakform command."""

    def test_noise_free_decreasing(self, cli_runner, temp_dir):
        """Test a strictly decreasing MSE without noise."""
        out = temp_dir / "weakform.csv"
        result = cli_runner.invoke(
            cli,
            [
                "weakform",
                "--n-list",
                "15,31,63",
                "--replicas",
                "2",
                "--fine",
                "4096",
                "--zero-noise",
                "--out",
                str(out),
            ],
        )
        assert result.exit_code == 0
        meta, rows = read_table(out)
        mse = [float(row["mse"]) for row in rows]
        assert mse[0] > mse[1] > mse[2] > 0
        assert [row["monotone_flag"] for row in rows] == ["true", "true", "true"]
        assert meta["extra"] == {"u_mode": 1, "v_mode": 1}

    def test_default_fine_grid_echoed(self, cli_runner, temp_dir):
        """Test that the chosen fine grid is recorded."""
        out = temp_dir / "default.csv"
        result = cli_runner.invoke(
            cli, ["weakform", "--n-list", "15,31", "--replicas", "2", "--out", str(out)]
        )
        assert result.exit_code == 0
        meta, _ = read_table(out)
        assert meta["fine_n"] == 65536

    def test_forced_path(self, cli_runner, path_file, temp_dir):
        """Test that a forced path fixes the fine grid."""
        out = temp_dir / "forced.csv"
        steps = np.random.default_rng(0).standard_normal(64) / 8
        values = np.concatenate(([0.0], np.cumsum(steps)))
        result = cli_runner.invoke(
            cli,
            [
                "weakform",
                "--n-list",
                "7,15",
                "--replicas",
                "1",
                "--forced-path",
                str(path_file(values)),
                "--out",
                str(out),
            ],
        )
        assert result.exit_code == 0
        meta, rows = read_table(out)
        assert meta["fine_n"] == 64
        assert len(rows) == 2


class TestShe:
    """Tests for the she command."""

    def test_noise_free_decay(self, cli_runner, temp_dir):
        """Test exp(-pi^2 t) decay of the L2 norm within 2% at t = 0.1."""
        out = temp_dir / "she.csv"
        result = cli_runner.invoke(
            cli, ["she", "--n", "128", "--t-end", "0.1", "--no-noise", "--out", str(out)]
        )
        assert result.exit_code == 0
        _, rows = read_table(out)
        first, last = float(rows[0]["l2_norm"]), float(rows[-1]["l2_norm"])
        assert float(rows[-1]["t"]) == pytest.approx(0.1)
        assert last / first == pytest.approx(np.exp(-(np.pi**2) * 0.1), rel=0.02)

    def test_zero_initial_data(self, cli_runner, temp_dir):
        """Test that u = 0 stays 0 with noise on."""
        out = temp_dir / "zero.csv"
        result = cli_runner.invoke(
            cli, ["she", "--n", "16", "--t-end", "0.01", "--initial", "zero", "--out", str(out)]
        )
        assert result.exit_code == 0
        _, rows = read_table(out)
        assert all(float(row["u"]) == 0.0 for row in rows)

    def test_unstable_dt(self, cli_runner):
        """Test exit 3 naming the admissible bound."""
        result = cli_runner.invoke(cli, ["she", "--n", "9", "--dt", "0.01"])
        assert result.exit_code == 3
        assert "0.005" in result.output

    @pytest.mark.parametrize("dt", ["0", "-0.001"])
    def test_non_positive_dt(self, cli_runner, dt):
        """Test that a non-positive time step is a usage error."""
        result = cli_runner.invoke(cli, ["she", "--n", "9", "--dt", dt])
        assert result.exit_code == 2

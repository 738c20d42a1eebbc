"""Command-line interface: subcommands, formats, exit codes."""

import json

import pytest

from cvqss import UnphysicalStateError
from cvqss.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_UNPHYSICAL, SWEEP_HEADER, main


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSweep:
    def test_small_grid_to_file(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code, _, _ = run(["sweep", "--r-min", "0", "--r-max", "1.5",
                          "--r-steps", "7", "--transmissivities", "1,0.9",
                          "--output", str(out)], capsys)
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == SWEEP_HEADER
        assert len(lines) == 1 + 7 * 2
        for line in lines[1:]:
            fields = [float(v) for v in line.split(",")]
            k_eve, k_qss = fields[2], fields[3]
            assert k_qss <= k_eve + 1e-9

    def test_single_point_grid(self, tmp_path, capsys):
        out = tmp_path / "one.csv"
        code, _, _ = run(["sweep", "--r-min", "1.0", "--r-max", "1.0",
                          "--r-steps", "1", "--transmissivities", "1",
                          "--output", str(out)], capsys)
        assert code == EXIT_OK
        assert len(out.read_text().splitlines()) == 2

    def test_stdout_and_json(self, capsys):
        code, out, _ = run(["sweep", "--r-steps", "2", "--transmissivities", "1",
                            "--format", "json"], capsys)
        assert code == EXIT_OK
        payload = json.loads(out)
        assert len(payload["rows"]) == 2
        assert set(payload["rows"][0]) == set(SWEEP_HEADER.split(","))

    def test_unwritable_path_is_io_error(self, tmp_path, capsys):
        missing_dir = tmp_path / "nope" / "sweep.csv"
        code, _, err = run(["sweep", "--r-steps", "2",
                            "--output", str(missing_dir)], capsys)
        assert code == EXIT_IO
        assert "I/O" in err

    def test_bad_grid_is_config_error(self, capsys):
        code, _, _ = run(["sweep", "--r-steps", "0"], capsys)
        assert code == EXIT_CONFIG
        code, _, _ = run(["sweep", "--transmissivities", "1,1.5"], capsys)
        assert code == EXIT_CONFIG

    def test_unknown_flag_is_config_error(self, capsys):
        code, _, _ = run(["sweep", "--does-not-exist", "1"], capsys)
        assert code == EXIT_CONFIG


class TestThreshold:
    def test_two_two_breakdown(self, capsys):
        code, out, _ = run(["threshold", "--n", "2", "--k", "2",
                            "--r", "1.15", "--transmissivity", "1"], capsys)
        assert code == EXIT_OK
        assert out.count("access") == 1
        assert out.count("adversarial") == 2
        assert "positive key rate" in out

    def test_unsqueezed_chain_has_no_key(self, capsys):
        code, out, _ = run(["threshold", "--n", "3", "--k", "3", "--r", "0",
                            "--transmissivity", "1"], capsys)
        assert code == EXIT_OK
        assert "no secure key" in out

    def test_degenerate_threshold_prints_empty_collusion(self, capsys):
        code, out, _ = run(["threshold", "--n", "2", "--k", "1",
                            "--r", "0.5"], capsys)
        assert code == EXIT_OK
        assert "{}" in out

    def test_json_format(self, capsys):
        code, out, _ = run(["threshold", "--n", "2", "--k", "2",
                            "--format", "json"], capsys)
        assert code == EXIT_OK
        payload = json.loads(out)
        assert "combined_rate" in payload

    def test_player_cap_is_config_error(self, capsys):
        code, _, _ = run(["threshold", "--n", "30", "--k", "2"], capsys)
        assert code == EXIT_CONFIG

    def test_quiet_only_prints_the_verdict(self, capsys):
        code, out, _ = run(["threshold", "--n", "2", "--k", "2", "--quiet"], capsys)
        assert code == EXIT_OK
        assert out.startswith("K = ")


class TestSimulate:
    def test_secure_verdict(self, capsys):
        code, out, _ = run(["simulate", "--rounds", "200000", "--seed", "7",
                            "--r", "1.15", "--transmissivity", "1"], capsys)
        assert code == EXIT_OK
        assert out.strip().endswith("SECURE")

    def test_insecure_verdict(self, capsys):
        code, out, _ = run(["simulate", "--rounds", "200000", "--seed", "7",
                            "--r", "0.1", "--transmissivity", "0.85"], capsys)
        assert code == EXIT_OK
        assert out.strip().endswith("INSECURE")

    def test_runs_are_byte_identical(self, capsys):
        argv = ["simulate", "--rounds", "50000", "--seed", "3", "--r", "1.0"]
        _, first, _ = run(argv, capsys)
        _, second, _ = run(argv, capsys)
        assert first == second

    def test_summary_csv(self, tmp_path, capsys):
        out = tmp_path / "summary.csv"
        code, _, _ = run(["simulate", "--rounds", "50000", "--seed", "3",
                          "--output", str(out)], capsys)
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "quantity,structure,value,standard_error"
        assert any(line.startswith("combined_rate") for line in lines)

    def test_undersampled_run_is_config_error(self, capsys):
        code, _, err = run(["simulate", "--rounds", "200", "--seed", "1"], capsys)
        assert code == EXIT_CONFIG
        assert "sifted" in err

    def test_json_report(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code, _, _ = run(["simulate", "--rounds", "50000", "--seed", "3",
                          "--format", "json", "--output", str(out)], capsys)
        assert code == EXIT_OK
        payload = json.loads(out.read_text())
        assert "combined_rate" in payload
        assert "analytic" in payload


class TestValidate:
    def test_physical_state(self, capsys):
        code, out, _ = run(["validate", "--r", "1.0", "--transmissivity", "0.9"],
                           capsys)
        assert code == EXIT_OK
        assert "physical: True" in out

    def test_json_diagnostics(self, capsys):
        code, out, _ = run(["validate", "--format", "json"], capsys)
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["physical"] is True

    def test_unphysical_exit_code(self, capsys, monkeypatch):
        import cvqss.cli as cli

        def broken(args):
            raise UnphysicalStateError("synthetic")

        monkeypatch.setitem(cli._COMMANDS, "validate", broken)
        code, _, err = run(["validate"], capsys)
        assert code == EXIT_UNPHYSICAL
        assert "unphysical" in err


class TestConfigFile:
    def test_defaults_from_file_with_flag_override(self, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text("r-steps=3\ntransmissivities=1\n")
        out = tmp_path / "sweep.csv"
        code, _, _ = run(["sweep", "--config", str(config),
                          "--output", str(out)], capsys)
        assert code == EXIT_OK
        assert len(out.read_text().splitlines()) == 1 + 3

        out2 = tmp_path / "sweep2.csv"
        code, _, _ = run(["sweep", "--config", str(config), "--r-steps", "5",
                          "--output", str(out2)], capsys)
        assert code == EXIT_OK
        assert len(out2.read_text().splitlines()) == 1 + 5

    def test_underscore_keys_are_accepted(self, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text("# comment line\nr_steps=2\ntransmissivities=0.9\n")
        code, out, _ = run(["sweep", "--config", str(config)], capsys)
        assert code == EXIT_OK
        assert len(out.splitlines()) == 1 + 2

    def test_unknown_key_is_config_error(self, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text("not-a-flag=1\n")
        code, _, _ = run(["sweep", "--config", str(config)], capsys)
        assert code == EXIT_CONFIG

    def test_malformed_line_is_config_error(self, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text("just some words\n")
        code, _, err = run(["sweep", "--config", str(config)], capsys)
        assert code == EXIT_CONFIG
        assert "key=value" in err

    def test_missing_file_is_io_error(self, tmp_path, capsys):
        code, _, _ = run(["sweep", "--config", str(tmp_path / "absent.cfg")],
                         capsys)
        assert code == EXIT_IO


def test_missing_subcommand_is_config_error(capsys):
    assert main([]) == EXIT_CONFIG
    capsys.readouterr()

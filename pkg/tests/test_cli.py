"""Command-line tests: outputs, determinism, exit codes, config layering."""

import json

import numpy as np
import pytest

from quadbin.binning import histogram
from quadbin.cli import main
from quadbin.data import inject_phase_noise, read_csv, sample_dataset, select_phase_window
from quadbin.detect import three_bin_R
from quadbin.estimate import params_from_variances
from quadbin.model import StateParams


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    out = json.loads(captured.out) if captured.out.strip() else None
    err = json.loads(captured.err) if captured.err.strip() else None
    return code, out, err


class TestSimulate:
    def test_writes_files_and_reports(self, capsys, tmp_path):
        out = tmp_path / "s.csv"
        code, payload, _ = run(
            capsys, "simulate", "--r", "0.3", "--loss", "0.1", "--delta", "0.15",
            "--n", "10000", "--seed", "7", "--out", str(out),
        )
        assert code == 0
        assert payload["n"] == 10000
        assert out.exists() and (tmp_path / "s.meta.json").exists()
        assert payload["config"]["seed"] == 7

    def test_byte_identical_reruns(self, capsys, tmp_path):
        args = ["simulate", "--r", "0.4", "--loss", "0.2", "--delta", "0.1",
                "--n", "2000", "--seed", "3", "--out", str(tmp_path / "a.csv")]
        code, first, _ = run(capsys, *args)
        blob1 = (tmp_path / "a.csv").read_bytes()
        meta1 = (tmp_path / "a.meta.json").read_bytes()
        code, second, _ = run(capsys, *args)
        assert code == 0
        assert first == second
        assert (tmp_path / "a.csv").read_bytes() == blob1
        assert (tmp_path / "a.meta.json").read_bytes() == meta1

    def test_target_db_reaches_requested_variance(self, capsys, tmp_path):
        code, payload, _ = run(
            capsys, "simulate", "--target-db", "-2.3", "--loss", "0.37", "--delta", "0.15",
            "--n", "10000", "--seed", "27", "--out", str(tmp_path / "t.csv"),
        )
        assert code == 0
        assert abs(payload["var_x_db"] - (-2.3)) <= 0.1

    def test_requires_exactly_one_amplitude_option(self, capsys, tmp_path):
        code, _, err = run(capsys, "simulate", "--loss", "0.1", "--out", str(tmp_path / "x.csv"))
        assert code == 1 and err["error"]["exit_code"] == 1
        code, _, err = run(
            capsys, "simulate", "--r", "0.2", "--target-db", "-1.0", "--out", str(tmp_path / "x.csv")
        )
        assert code == 1

    def test_invalid_params_exit_usage(self, capsys, tmp_path):
        code, _, err = run(
            capsys, "simulate", "--r", "0.2", "--loss", "1.4", "--out", str(tmp_path / "x.csv")
        )
        assert code == 1


class TestThreeBinCommand:
    def test_reports_statistic_and_analytic(self, capsys, tmp_path):
        path = tmp_path / "d.csv"
        run(capsys, "simulate", "--r", "0.5", "--loss", "0.1", "--delta", "0.1",
            "--n", "20000", "--seed", "4", "--out", str(path))
        code, payload, _ = run(
            capsys, "three-bin", "--in", str(path), "--sigma", "1.0", "--d", "1",
            "--bootstrap", "50", "--seed", "8",
        )
        assert code == 0
        assert payload["nonclassical"] is True
        assert payload["analytic"] is not None
        assert abs(payload["r_mean"] - payload["analytic"]) < 6 * payload["r_std"]

    def test_missing_file_is_a_data_error(self, capsys):
        code, _, err = run(capsys, "three-bin", "--in", "/nonexistent.csv")
        assert code == 2 and err["error"]["exit_code"] == 2

    def test_malformed_file_is_a_data_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("theta,x\n0.0,whoops\n")
        code, _, err = run(capsys, "three-bin", "--in", str(bad))
        assert code == 2 and "line 2" in err["error"]["message"]


class TestSweepCommand:
    def test_single_step_matches_three_bin(self, capsys, tmp_path):
        path = tmp_path / "d.csv"
        run(capsys, "simulate", "--r", "0.6", "--loss", "0.2", "--delta", "0.2",
            "--n", "20000", "--seed", "5", "--out", str(path))
        common = ["--d", "1", "--bootstrap", "40", "--seed", "9",
                  "--mode", "resample-with-replacement", "--resample-size", "20000"]
        code, single, _ = run(
            capsys, "sweep-sigma", "--in", str(path), "--sigma-from", "0.8", "--sigma-to", "0.8",
            "--steps", "1", "--out", str(tmp_path / "sweep.csv"), *common,
        )
        assert code == 0
        code, direct, _ = run(capsys, "three-bin", "--in", str(path), "--sigma", "0.8", *common)
        assert single["min_r_mean"] == direct["r_mean"]
        assert single["min_r_std"] == direct["r_std"]

    def test_emits_csv_rows(self, capsys, tmp_path):
        path = tmp_path / "d.csv"
        run(capsys, "simulate", "--r", "0.4", "--loss", "0.1", "--delta", "0.1",
            "--n", "5000", "--seed", "6", "--out", str(path))
        out = tmp_path / "sweep.csv"
        code, payload, _ = run(
            capsys, "sweep-sigma", "--in", str(path), "--sigma-from", "0.5", "--sigma-to", "1.5",
            "--steps", "5", "--d", "1", "--bootstrap", "20", "--seed", "2", "--out", str(out),
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "sigma,r_mean,r_std,r_analytic,nonclassical"
        assert len(lines) == 6


class TestMomentsCommand:
    def test_rows_for_each_order(self, capsys, tmp_path):
        path = tmp_path / "d.csv"
        run(capsys, "simulate", "--r", "0.5", "--loss", "0.1", "--delta", "0.1",
            "--n", "10000", "--seed", "3", "--out", str(path))
        code, payload, _ = run(
            capsys, "moments", "--in", str(path), "--n-max", "4", "--bootstrap", "30", "--seed", "1",
        )
        assert code == 0
        assert [row["n"] for row in payload["rows"]] == [2, 3, 4]
        assert payload["rows"][0]["nonclassical"] is True  # squeezed state


class TestEstimateCommand:
    def test_recovers_simulation_parameters(self, capsys, tmp_path):
        anchor = params_from_variances(10**-0.23, 10**0.70, 0.15)
        px, pp = tmp_path / "x.csv", tmp_path / "p.csv"
        run(capsys, "simulate", "--r", repr(anchor.r), "--loss", repr(anchor.loss),
            "--delta", "0.15", "--n", "20000", "--seed", "41", "--out", str(px))
        run(capsys, "simulate", "--r", repr(anchor.r), "--loss", repr(anchor.loss),
            "--delta", "0.15", "--n", "20000", "--seed", "42", "--center", repr(np.pi / 2),
            "--out", str(pp))
        code, payload, _ = run(
            capsys, "estimate", "--in-x", str(px), "--in-p", str(pp), "--bootstrap", "40", "--seed", "2",
        )
        assert code == 0
        assert abs(payload["delta"] - 0.15) <= 4 * payload["std_delta"]
        assert abs(payload["r"] - anchor.r) <= 4 * payload["std_r"]
        assert abs(payload["l"] - anchor.loss) <= 4 * payload["std_l"]
        assert payload["var_x_db"] == pytest.approx(-2.3, abs=0.2)

    def test_unphysical_inputs_are_a_numeric_failure(self, capsys, tmp_path):
        wide, narrow = tmp_path / "wide.csv", tmp_path / "narrow.csv"
        rng = np.random.default_rng(1)
        wide.write_text("theta,x\n" + "\n".join(f"0.0,{float(v)!r}" for v in rng.normal(0, 1.5, 500)) + "\n")
        narrow.write_text("theta,x\n" + "\n".join(f"0.0,{float(v)!r}" for v in rng.normal(0, 0.7, 500)) + "\n")
        code, _, err = run(capsys, "estimate", "--in-x", str(wide), "--in-p", str(narrow))
        assert code == 3 and err["error"]["exit_code"] == 3


class TestEpCommand:
    def test_no_squeezing_means_no_entanglement(self, capsys):
        code, payload, _ = run(capsys, "ep", "--r", "0", "--loss", "0.3", "--delta", "0.4")
        assert code == 0 and payload["ep"] == 0.0

    def test_squeezed_state_is_entangling(self, capsys):
        code, payload, _ = run(capsys, "ep", "--r", "0.5", "--loss", "0.2", "--delta", "0.3")
        assert code == 0 and payload["ep"] > 0.1


class TestCompareCommand:
    def test_large_diffusion_defeats_the_variance_route_only(self, capsys, tmp_path):
        anchor = params_from_variances(10**-0.23, 10**0.70, 0.15)
        path = tmp_path / "d.csv"
        run(capsys, "simulate", "--r", repr(anchor.r), "--loss", repr(anchor.loss),
            "--delta", "0.37", "--n", "10000", "--seed", "33", "--out", str(path))
        code, payload, _ = run(
            capsys, "compare", "--in", str(path), "--sigma", "1", "--d", "1",
            "--n-list", "2,4", "--bootstrap", "60", "--seed", "3",
            "--mode", "resample-with-replacement", "--out", str(tmp_path / "table.csv"),
        )
        assert code == 0
        by_method = {(r["method"], r["params"].get("n")): r for r in payload["reports"]}
        assert by_method[("three-bin", None)]["v"] > 0
        assert by_method[("moment", 2)]["v"] < 0
        assert payload["ep"] > 0
        assert payload["delta"] == 0.37
        table = (tmp_path / "table.csv").read_text().splitlines()
        assert table[0] == "method,sigma,d,n,mean,std,v,n_flagged"
        assert len(table) == 4


class TestPipelineComposition:
    def test_cli_pipeline_matches_in_memory_bit_for_bit(self, capsys, tmp_path):
        anchor = params_from_variances(10**-0.23, 10**0.70, 0.15)
        raw, noisy, kept = (tmp_path / n for n in ("raw.csv", "noisy.csv", "kept.csv"))
        run(capsys, "simulate", "--r", repr(anchor.r), "--loss", repr(anchor.loss),
            "--delta", "0.15", "--n", "50000", "--seed", "55", "--phase-window", repr(np.pi),
            "--out", str(raw))
        code, _, _ = run(capsys, "inject", "--in", str(raw), "--delta-e", "0.25", "--seed", "56",
                         "--out", str(noisy))
        assert code == 0
        code, sel, _ = run(capsys, "select", "--in", str(noisy), "--center", "0",
                           "--half-width", "0.1", "--out", str(kept))
        assert code == 0 and sel["n_kept"] > 100
        code, cli_row, _ = run(capsys, "three-bin", "--in", str(kept), "--sigma", "0.9", "--d", "1",
                               "--bootstrap", "20", "--seed", "57",
                               "--mode", "resample-with-replacement")

        params = StateParams(anchor.r, anchor.loss, 0.15)
        data = sample_dataset(params, 50_000, seed=55, phase_window=np.pi)
        mem = select_phase_window(inject_phase_noise(data, 0.25, seed=56), 0.0, 0.1)
        point = three_bin_R(histogram(mem, 0.9), 1)
        assert mem.n == sel["n_kept"]
        assert cli_row["r_point"] == point.r_value  # bit-for-bit

    def test_select_empty_flagged(self, capsys, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("theta,x\n1.0,0.5\n")
        code, payload, _ = run(capsys, "select", "--in", str(path), "--center", "0",
                               "--half-width", "0.01", "--out", str(tmp_path / "k.csv"))
        assert code == 0 and payload["empty"] is True and payload["n_kept"] == 0


class TestConfigFile:
    def test_flags_override_config(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"r": 0.2, "loss": 0.1, "delta": 0.0, "n": 500, "seed": 1}))
        out = tmp_path / "o.csv"
        code, payload, _ = run(
            capsys, "simulate", "--config", str(cfg), "--n", "800", "--out", str(out),
        )
        assert code == 0
        assert payload["config"]["n"] == 800       # flag wins
        assert payload["config"]["r"] == 0.2       # config fills the rest
        assert payload["n"] == 800

    def test_no_subcommand_is_usage_error(self, capsys):
        code, _, err = run(capsys)
        assert code == 1 and err["error"]["exit_code"] == 1

    def test_unknown_flag_is_usage_error(self, capsys):
        code, _, err = run(capsys, "ep", "--r", "0.1", "--bogus", "1")
        assert code == 1

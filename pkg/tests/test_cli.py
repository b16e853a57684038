import json

import numpy as np
import pytest

from conftest import forward_reachability_instance
from iqcontrol import cli, qubit, verify


def write_config(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def simulate_config():
    return {
        "mode": "simulate",
        "couplings": {"g1": 0.2, "g2": [0.3, -0.1], "g3": 0.8, "g4": 0.4},
        "p_s": 0.3,
        "p_p": 0.7,
        "times": {"start": 0.0, "stop": 5.0, "count": 11},
    }


class TestConfigParsing:
    def test_invalid_json_reports_position(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"mode": "simulate",\n  oops}', encoding="utf-8")
        with pytest.raises(cli.ConfigError, match="line 2"):
            cli.load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(cli.ConfigError, match="cannot read"):
            cli.load_config(tmp_path / "absent.json")

    def test_unknown_mode(self, tmp_path):
        path = write_config(tmp_path, "c.json", {"mode": "transmute"})
        with pytest.raises(cli.ConfigError, match="transmute"):
            cli.load_config(path)

    def test_missing_key(self, tmp_path):
        doc = simulate_config()
        del doc["p_p"]
        path = write_config(tmp_path, "c.json", doc)
        with pytest.raises(cli.ConfigError, match="p_p"):
            cli.validate_config(cli.load_config(path))

    def test_probability_out_of_range(self, tmp_path):
        doc = simulate_config()
        doc["p_s"] = 1.5
        path = write_config(tmp_path, "c.json", doc)
        with pytest.raises(cli.ConfigError, match="p_s"):
            cli.validate_config(cli.load_config(path))

    def test_complex_pair_parsing(self):
        assert cli._parse_complex([1.5, -2.0], "x") == 1.5 - 2.0j
        assert cli._parse_complex(3, "x") == 3.0 + 0.0j
        with pytest.raises(cli.ConfigError):
            cli._parse_complex([1.0], "x")

    def test_ragged_matrix_rejected(self):
        with pytest.raises(cli.ConfigError, match="ragged"):
            cli._parse_matrix([[1.0, 0.0], [0.0]], "m")

    def test_bad_density_matrix_rejected(self, tmp_path):
        doc = {"mode": "solve", "p_s": 0.0,
               "target": [[1.0, 0.0], [0.0, 1.0]]}
        path = write_config(tmp_path, "c.json", doc)
        with pytest.raises(cli.ConfigError, match="target"):
            cli.validate_config(cli.load_config(path))


class TestCheckCommand:
    def test_valid_config(self, tmp_path, capsys):
        path = write_config(tmp_path, "sim.json", simulate_config())
        assert cli.main(["check", str(path)]) == 0
        assert "valid" in capsys.readouterr().out

    def test_invalid_config_exit_one(self, tmp_path, capsys):
        path = write_config(tmp_path, "sim.json", {"mode": "simulate"})
        assert cli.main(["check", str(path)]) == 1
        assert "error:" in capsys.readouterr().err

    def test_check_writes_nothing(self, tmp_path):
        path = write_config(tmp_path, "sim.json", simulate_config())
        out = tmp_path / "out"
        cli.main(["check", str(path), "--out", str(out)])
        assert not out.exists()


class TestRunSimulate:
    def test_output_shape_and_header(self, tmp_path):
        path = write_config(tmp_path, "sim.json", simulate_config())
        out = tmp_path / "out"
        assert cli.main(["run", str(path), "--out", str(out), "--quiet"]) == 0
        lines = (out / "sim.csv").read_text().splitlines()
        assert lines[0].startswith("t,rho00,rho11,re_rho10,im_rho10")
        assert len(lines) == 12

    def test_rows_match_oracle(self, tmp_path):
        # CSV entries are expressed in the conditional evolved basis;
        # rebuild the state from them and compare to the brute-force
        # oracle in the computational basis.
        doc = simulate_config()
        path = write_config(tmp_path, "sim.json", doc)
        out = tmp_path / "out"
        cli.main(["run", str(path), "--out", str(out), "--quiet"])
        lines = (out / "sim.csv").read_text().splitlines()[1:]
        g = qubit.QubitCouplings(g1=0.2, g2=0.3 - 0.1j, g3=0.8, g4=0.4)
        sc = verify.CompositeScenario(
            dim_s=2, dim_p=2,
            h_full=verify.interaction_from_couplings(g.g1, g.g2, g.g3, g.g4),
            rho_s0=np.diag([0.7, 0.3]).astype(complex),
            rho_p0=np.diag([0.3, 0.7]).astype(complex))
        for line in lines:
            vals = [float(x) for x in line.split(",")]
            t, rho00, rho11 = vals[0], vals[1], vals[2]
            rho10 = complex(vals[3], vals[4])
            u_plus, _ = qubit.conditional_unitaries(g, t)
            psi0 = u_plus @ qubit.KET_GROUND
            psi1 = u_plus @ qubit.KET_EXCITED
            rebuilt = (rho00 * np.outer(psi0, psi0.conj())
                       + rho11 * np.outer(psi1, psi1.conj())
                       + rho10 * np.outer(psi1, psi0.conj())
                       + np.conj(rho10) * np.outer(psi0, psi1.conj()))
            oracle = verify.evolve_full(sc, t)
            np.testing.assert_allclose(rebuilt, oracle, atol=1e-10)

    def test_deterministic_reruns(self, tmp_path):
        path = write_config(tmp_path, "sim.json", simulate_config())
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        cli.main(["run", str(path), "--out", str(out_a), "--quiet"])
        cli.main(["run", str(path), "--out", str(out_b), "--quiet"])
        assert (out_a / "sim.csv").read_bytes() == (out_b / "sim.csv").read_bytes()


class TestRunSolve:
    def test_feasible_target(self, tmp_path):
        doc = {"mode": "solve", "p_s": 0.0,
               "target": [[0.25, [0.1, 0.05]], [[0.1, -0.05], 0.75]]}
        path = write_config(tmp_path, "s.json", doc)
        out = tmp_path / "out"
        assert cli.main(["run", str(path), "--out", str(out), "--quiet"]) == 0
        doc_out = json.loads((out / "s.json").read_text())
        assert doc_out["feasible"] is True
        assert doc_out["oracle_distance"] <= 1e-6
        assert set(doc_out) == {"couplings", "theta", "alpha", "p_p", "t",
                                "residual", "oracle_distance", "feasible"}

    def test_infeasible_target_exit_two(self, tmp_path):
        # mixed target from a pure initial state cannot gain purity
        doc = {"mode": "solve", "p_s": 0.3,
               "target": [[1.0, 0.0], [0.0, 0.0]]}
        path = write_config(tmp_path, "s.json", doc)
        out = tmp_path / "out"
        assert cli.main(["run", str(path), "--out", str(out), "--quiet"]) == 2
        doc_out = json.loads((out / "s.json").read_text())
        assert doc_out["feasible"] is False


class TestRunReach:
    def test_reachable_instance(self, tmp_path):
        rng = np.random.default_rng(60)
        prob, _ = forward_reachability_instance(rng, 2)
        c = prob.coefficients
        doc = {
            "mode": "reach",
            "initial_weights": list(prob.initial_weights),
            "target_weights": list(prob.target_weights),
            "coefficients": [[[[c[a, j, m].real, c[a, j, m].imag]
                               for m in range(2)] for j in range(2)]
                             for a in range(2)],
        }
        path = write_config(tmp_path, "r.json", doc)
        out = tmp_path / "out"
        assert cli.main(["run", str(path), "--out", str(out), "--quiet"]) == 0
        doc_out = json.loads((out / "r.json").read_text())
        assert doc_out["reachable"] is True
        assert doc_out["residual"] <= 1e-8

    def test_unreachable_instance_exit_two(self, tmp_path):
        doc = {
            "mode": "reach",
            "initial_weights": [0.6, 0.4],
            "target_weights": [1.0, 0.0],
            "coefficients": [[[1.0, 1.0], [0.0, 0.0]],
                             [[0.0, 0.0], [1.0, 1.0]]],
        }
        path = write_config(tmp_path, "r.json", doc)
        out = tmp_path / "out"
        assert cli.main(["run", str(path), "--out", str(out), "--quiet"]) == 2
        doc_out = json.loads((out / "r.json").read_text())
        assert doc_out["reachable"] is False


class TestRunThermal:
    def test_gap_from_occupancy(self, tmp_path):
        doc = {"mode": "thermal", "temperature": 2.0, "p_p": 0.75}
        path = write_config(tmp_path, "t.json", doc)
        out = tmp_path / "out"
        assert cli.main(["run", str(path), "--out", str(out), "--quiet"]) == 0
        doc_out = json.loads((out / "t.json").read_text())
        assert doc_out["gap"] == pytest.approx(2.0 * np.log(3.0))

    def test_occupancy_from_levels(self, tmp_path):
        doc = {"mode": "thermal", "temperature": 1.0, "e0": 0.0, "e1": 1.0}
        path = write_config(tmp_path, "t.json", doc)
        out = tmp_path / "out"
        assert cli.main(["run", str(path), "--out", str(out), "--quiet"]) == 0
        doc_out = json.loads((out / "t.json").read_text())
        assert doc_out["p_p"] == pytest.approx(1.0 / (1.0 + np.exp(-1.0)))

    def test_pure_occupancy_exit_one(self, tmp_path, capsys):
        doc = {"mode": "thermal", "temperature": 1.0, "p_p": 1.0}
        path = write_config(tmp_path, "t.json", doc)
        assert cli.main(["run", str(path), "--quiet"]) == 1
        assert "error:" in capsys.readouterr().err


class TestSweep:
    def sweep_config(self):
        return {
            "mode": "sweep",
            "p_s": 0.0,
            "axes": [
                {"name": "p_p", "start": 0.0, "stop": 1.0, "count": 5},
                {"name": "alpha", "start": 0.0, "stop": 3.0, "count": 4},
            ],
            "fixed": {"theta": 0.5},
        }

    def test_row_count_matches_grid(self, tmp_path):
        path = write_config(tmp_path, "sw.json", self.sweep_config())
        out = tmp_path / "out"
        assert cli.main(["sweep", str(path), "--out", str(out), "--quiet"]) == 0
        lines = (out / "sw.csv").read_text().splitlines()
        assert lines[0] == "p_p,alpha,rho00,abs_rho10"
        assert len(lines) == 1 + 5 * 4

    def test_sweep_command_rejects_other_modes(self, tmp_path, capsys):
        path = write_config(tmp_path, "sim.json", simulate_config())
        assert cli.main(["sweep", str(path)]) == 1
        assert "requires mode 'sweep'" in capsys.readouterr().err

    def test_run_accepts_sweep_mode(self, tmp_path):
        path = write_config(tmp_path, "sw.json", self.sweep_config())
        out = tmp_path / "out"
        assert cli.main(["run", str(path), "--out", str(out), "--quiet"]) == 0

    def test_missing_fixed_value(self, tmp_path):
        doc = self.sweep_config()
        doc["fixed"] = {}
        path = write_config(tmp_path, "sw.json", doc)
        with pytest.raises(cli.ConfigError, match="theta"):
            cli.validate_config(cli.load_config(path))

    def test_duplicate_axes_rejected(self, tmp_path):
        doc = self.sweep_config()
        doc["axes"].append({"name": "p_p", "start": 0.0, "stop": 1.0,
                            "count": 2})
        path = write_config(tmp_path, "sw.json", doc)
        with pytest.raises(cli.ConfigError, match="duplicate"):
            cli.validate_config(cli.load_config(path))

import json

import pytest

import calibrate_sweeps
import export_mip
import generate_instance
import run_bench
import run_bfdcqo
import solve_sa
from toolkit import bitstring, brute_force_ground_state, load_instance, load_program


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "inst.json"
    assert generate_instance.main(["--num-qubits", "8", "--seed", "5", "--out", str(path),
                                   "--layout-out", str(tmp_path / "layout.json")]) == 0
    return path


def test_generate_prints_term_counts(instance_file, capsys, tmp_path):
    generate_instance.main(["--num-qubits", "8", "--seed", "5", "--out", str(tmp_path / "again.json")])
    counts = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert counts["linear"] == 8
    assert load_instance(str(instance_file)).num_vars == 8
    assert (tmp_path / "again.json").read_text() == instance_file.read_text()


def test_solve_sa(instance_file, tmp_path):
    out = tmp_path / "sa.json"
    assert solve_sa.main(["--instance", str(instance_file), "--sweeps", "50", "--runs", "3", "--seed", "1",
                          "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())["per_run"]) == 3


def test_solve_sa_missing_instance(tmp_path):
    assert solve_sa.main(["--instance", str(tmp_path / "missing.json")]) == 1


def test_solve_sa_zero_temp_from_ground_state(instance_file, tmp_path):
    spins, e_gs = brute_force_ground_state(load_instance(str(instance_file)))
    init, out = tmp_path / "init.txt", tmp_path / "sa.json"
    init.write_text(bitstring(spins) + "\n")
    assert solve_sa.main(["--instance", str(instance_file), "--sweeps", "5", "--runs", "2", "--seed", "1",
                          "--zero-temp", "--init", str(init), "--out", str(out)]) == 0
    runs = json.loads(out.read_text())["per_run"]
    assert all(r["bitstring"] == bitstring(spins) for r in runs)
    assert all(r["energy"] == pytest.approx(e_gs) for r in runs)


def test_solve_sa_one_start_per_run(instance_file, tmp_path):
    init = tmp_path / "init.txt"
    init.write_text("00000000\n11111111\n")
    base = ["--instance", str(instance_file), "--sweeps", "5", "--seed", "1", "--init", str(init)]
    assert solve_sa.main(base + ["--runs", "2", "--out", str(tmp_path / "ok.json")]) == 0
    assert solve_sa.main(base + ["--runs", "3"]) == 1


def test_solve_sa_rejects_bad_init(instance_file, tmp_path):
    init = tmp_path / "init.txt"
    init.write_text("0120\n")
    assert solve_sa.main(["--instance", str(instance_file), "--init", str(init)]) == 1


def test_invalid_config_returns_error(instance_file):
    assert solve_sa.main(["--instance", str(instance_file), "--sweeps", "0"]) == 1


def test_run_bfdcqo_dumps_program(instance_file, tmp_path):
    out, program = tmp_path / "bf.json", tmp_path / "program.txt"
    argv = ["--instance", str(instance_file), "--iters", "1", "--shots", "100", "--cvar", "10",
            "--pre-sweeps", "10", "--pre-runs", "2", "--post-sweeps", "2", "--seed", "2",
            "--dump-program", str(program), "--out", str(out)]
    assert run_bfdcqo.main(argv) == 0
    assert len(json.loads(out.read_text())["iterations"]) == 2
    assert load_program(str(program)).num_qubits == 8


def test_export_mip(instance_file, tmp_path):
    out = tmp_path / "mip"
    assert export_mip.main(["--instance", str(instance_file), "--out", str(out), "--seed", "0"]) == 0
    stats = json.loads((out / "model_stats.json").read_text())
    assert stats["originals"] == 8
    assert "warm_start_energy" in stats
    assert (out / "model.lp").read_text().rstrip().endswith("End")
    assert (out / "warm_start.txt").exists()


def test_calibrate_rejects_short_grid():
    assert calibrate_sweeps.main(["--num-qubits", "6", "--grid", "10", "--runs", "1", "--repeats", "1"]) == 1


def test_run_bench(tmp_path):
    config = tmp_path / "suite.toml"
    config.write_text('name = "cli"\nsizes = [6]\nreference_solver = "sa"\n\n[sa]\nn_sweep = 20\nn_runs = 2\n')
    out = tmp_path / "out"
    assert run_bench.main(["--config", str(config), "--out", str(out)]) == 0
    assert (out / "records.csv").exists()

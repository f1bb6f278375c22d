import json
import os

import pytest
from pydantic import ValidationError

from core.errors import UndefinedRatioError
from schemas.annealing import SaConfig
from schemas.bench import GeneratorConfig, SuiteConfig
from schemas.bfdcqo import BfDcqoConfig
from services.bench import (approximation_ratio, enhancement_factor, generate_instance, hardness_screen,
                            hardness_sweep, is_comparable, load_suite_config, record_columns, run_suite, time_to_energy,
                            tt_r)
from services.mip_bridge import ingest_trace
from utils.tables import read_csv

ROOT = os.path.dirname(os.path.dirname(__file__))
TRACE = os.path.join(ROOT, "tests", "fixtures", "cplex_n156_i0_trace.csv")


class TestMetrics:
    def test_ratio(self):
        assert approximation_ratio(-9.0, -10.0) == pytest.approx(0.9)
        with pytest.raises(UndefinedRatioError):
            approximation_ratio(-1.0, 0.0)

    def test_sign_mismatch_is_not_comparable(self):
        assert is_comparable(-3.0, -4.0)
        assert not is_comparable(1.0, -4.0)

    def test_time_to_ratio(self):
        trace = [(1.0, -5.0), (2.0, -9.0), (3.0, -10.0)]
        assert tt_r(trace, 0.9, -10.0) == 2.0
        assert tt_r(trace, 1.0, -10.0) == 3.0
        assert tt_r(trace[:2], 1.0, -10.0) is None

    def test_time_to_energy(self):
        assert time_to_energy([(0.5, -1.0), (1.5, -2.0)], -1.5) == 1.5

    def test_enhancement(self):
        assert enhancement_factor(10.0, 2.0) == 5.0
        assert enhancement_factor(None, 2.0) is None
        assert enhancement_factor(3.0, None) is None
        with pytest.raises(ValueError):
            enhancement_factor(1.0, 0.0)

    def test_heron_instance_zero_enhancement(self):
        # Polled every 0.5 s, the reference first reaches the subject's best energy at 17.5 s.
        tt_reference = ingest_trace(TRACE, -454.0458, poll_interval=0.5)
        assert tt_reference == 17.5
        # Subject time before rounding to 0.207 s.
        assert enhancement_factor(tt_reference, 0.20654) == pytest.approx(84.729, abs=1e-3)


class TestConfig:
    def test_desk_suite_file(self):
        cfg = load_suite_config(os.path.join(ROOT, "configs", "desk_suite.toml"))
        assert cfg.name == "desk"
        assert cfg.bfdcqo.n_iter == 3
        assert cfg.generator.s3q == 2

    def test_heron_requires_device_size(self):
        with pytest.raises(ValidationError):
            SuiteConfig(generator=GeneratorConfig(topology="heron"), sizes=[100])

    def test_targets_are_ratios(self):
        with pytest.raises(ValidationError):
            SuiteConfig(targets=[1.5])

    def test_columns_follow_targets(self):
        columns = record_columns(SuiteConfig(targets=[0.9, 1.0]))
        assert "tt_r_0.9" in columns and "tt_r_1" in columns


class TestGeneration:
    def test_seeded_instances_repeat(self):
        gen = GeneratorConfig(distribution="pareto", alpha=1.5, truncation=50.0)
        a, _ = generate_instance(gen, 12, seed=4)
        b, _ = generate_instance(gen, 12, seed=4)
        assert a == b
        assert all(abs(v) <= 50.0 for v in a.linear.values())


class TestHardness:
    def test_bands_are_nested(self):
        report = hardness_screen(GeneratorConfig(), 3, SaConfig(n_sweep=100, n_runs=5), num_qubits=8, seed=1)
        bands = report.bands
        assert bands["0.99"] >= bands["0.995"] >= bands["0.999"] >= bands["1"]
        assert bands["1"] + report.failed == 3
        assert len(report.ratios) == 3

    def test_alpha_sweep(self):
        rows = hardness_sweep(GeneratorConfig(), [1.5, 2.0], 2, SaConfig(n_sweep=50, n_runs=3), num_qubits=8)
        assert [r["alpha"] for r in rows] == [1.5, 2.0]
        assert all(r["generator"]["distribution"] == "pareto" for r in rows)


def _desk_config(**overrides) -> SuiteConfig:
    params = dict(
        name="unit",
        master_seed=3,
        sizes=[8],
        instances_per_size=2,
        solvers=["sa", "bfdcqo", "cplex"],
        reference_solver="sa",
        targets=[0.99, 1.0],
        sa=SaConfig(n_sweep=50, n_runs=5),
        bfdcqo=BfDcqoConfig(n_iter=1, n_shots=300, n_cvar=30, n_sweep_pre=10, n_runs_pre=3, n_sweep_post=3),
        cplex_traces={"N8_i0": TRACE},
    )
    params.update(overrides)
    return SuiteConfig(**params)


class TestSuite:
    def test_outputs(self, tmp_path):
        result = run_suite(_desk_config(), str(tmp_path / "out"))
        assert result["status"] == "done"
        assert result["records"] == 6
        assert result["failed"] == 0

        rows = read_csv(str(tmp_path / "out" / "records.csv"))
        assert list(rows[0]) == record_columns(_desk_config())
        assert [r["solver"] for r in rows] == ["sa", "bfdcqo", "cplex"] * 2
        assert {r["e_gs_source"] for r in rows} == {"brute_force"}
        sa_rows = [r for r in rows if r["solver"] == "sa"]
        assert all(r["enhancement_factor"] in ("1.0", "") for r in sa_rows)
        missing = [r for r in rows if r["solver"] == "cplex" and r["instance"] == "N8_i1"]
        assert missing[0]["status"] == "missing"

        artifacts = tmp_path / "out" / "artifacts" / "N8_i0"
        for name in ("instance.json", "layout.json", "model.lp", "warm_start.txt", "sa_trace.csv",
                     "bfdcqo_trace.csv"):
            assert (artifacts / name).exists()

        document = json.loads((tmp_path / "out" / "records.json").read_text())
        assert document["suite"] == "unit"
        assert len(document["instances"]) == 2

    def test_replay_is_byte_identical(self, tmp_path):
        run_suite(_desk_config(artifacts=False), str(tmp_path / "a"))
        run_suite(_desk_config(artifacts=False), str(tmp_path / "b"))
        first = (tmp_path / "a" / "records.csv").read_bytes()
        assert first == (tmp_path / "b" / "records.csv").read_bytes()

    def test_pooled_run_matches_serial(self, tmp_path):
        run_suite(_desk_config(artifacts=False), str(tmp_path / "serial"))
        run_suite(_desk_config(artifacts=False, workers=2), str(tmp_path / "pooled"))
        assert (tmp_path / "serial" / "records.csv").read_bytes() == (tmp_path / "pooled" / "records.csv").read_bytes()

    def test_unreadable_trace_fails_the_job(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("1.0,-1.0\n0.5,-2.0\n")
        result = run_suite(_desk_config(solvers=["cplex"], cplex_traces={"N8_i0": str(bad)}, artifacts=False,
                                        reference_solver="cplex"), str(tmp_path / "out"))
        assert result["failed"] == 1

"""Harness: configs, cells, records, aggregation, presets, CLI, verify."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from plateauopt.cli import main
from plateauopt.harness import (
    ExperimentConfig,
    ResultRecord,
    TableRow,
    aggregate,
    emit_csv,
    iter_cells,
    nine_degrees,
    parse_config,
    preset_config,
    read_records,
    run_cell,
    run_experiment,
    stable_seed,
    verify_records,
    write_instances,
)
from plateauopt.problems import load_instance, random_tsp


def tiny_config(**overrides) -> ExperimentConfig:
    base = dict(
        family="random_qubo",
        sizes=(6,),
        densities=(0.5,),
        samples=2,
        optimizers=("altopt", "tabu"),
        seed=42,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestConfigValidation:
    def test_unknown_family(self):
        with pytest.raises(ValueError):
            ExperimentConfig(family="sat", sizes=(3,))

    def test_qubo_requires_densities(self):
        with pytest.raises(ValueError):
            ExperimentConfig(family="random_qubo", sizes=(5,))

    def test_unknown_optimizer(self):
        with pytest.raises(ValueError):
            tiny_config(optimizers=("altopt", "adam"))

    def test_bad_encoding_and_mode(self):
        with pytest.raises(ValueError):
            tiny_config(encoding="fourier")
        with pytest.raises(ValueError):
            tiny_config(mode="hardware")


class TestConfigFile:
    def test_parse_round_trip(self, tmp_path):
        text = """
        # comment line
        family = random_qubo
        sizes = 15, 31
        densities = 0.1, 0.5, 0.9
        samples = 4
        optimizers = altopt, tabu
        encoding = rfprime
        mode = exact
        seed = 7
        workers = 2
        tabu.max_moves = 500
        """
        path = tmp_path / "cfg.txt"
        path.write_text(text)
        cfg = parse_config(path)
        assert cfg.sizes == (15, 31)
        assert cfg.densities == (0.1, 0.5, 0.9)
        assert cfg.optimizers == ("altopt", "tabu")
        assert cfg.seed == 7 and cfg.workers == 2
        assert cfg.optimizer_params == {"tabu": {"max_moves": 500}}

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("family = tsp\nsizes = 3\nfrobnicate = 1\n")
        with pytest.raises(ValueError):
            parse_config(path)


class TestCells:
    def test_grid_enumeration(self):
        cfg = tiny_config(sizes=(6, 8), densities=(0.2, 0.5), samples=3)
        cells = iter_cells(cfg)
        assert len(cells) == 2 * 2 * 3
        assert len({c.problem_id for c in cells}) == len(cells)

    def test_cell_seed_is_stable_and_optimizer_free(self):
        a = tiny_config(optimizers=("altopt",))
        b = tiny_config(optimizers=("altopt", "nft", "bh", "ga", "tabu"))
        assert [c.cell_seed for c in iter_cells(a)] == [
            c.cell_seed for c in iter_cells(b)
        ]

    def test_stable_seed_is_deterministic(self):
        assert stable_seed(1, "x", 0.5) == stable_seed(1, "x", 0.5)
        assert stable_seed(1, "x", 0.5) != stable_seed(2, "x", 0.5)

    def test_nine_degrees(self):
        degrees = nine_degrees(16)
        assert len(degrees) == 9
        assert all(0 <= d < 16 and (16 * d) % 2 == 0 for d in degrees)
        assert degrees[0] == 0 and degrees[-1] == 15


class TestRunExperiment:
    def test_record_count_and_shape(self):
        records = run_experiment(tiny_config())
        assert len(records) == 2 * 2  # 2 samples x 2 optimizers
        assert {r.optimizer for r in records} == {"altopt", "tabu"}
        assert all(r.family == "random_qubo" and r.size == 6 for r in records)

    def test_same_seed_reproduces_everything_but_wall_time(self):
        a = run_experiment(tiny_config())
        b = run_experiment(tiny_config())
        for ra, rb in zip(a, b):
            assert (ra.problem_id, ra.optimizer) == (rb.problem_id, rb.optimizer)
            assert ra.energy == rb.energy
            assert ra.evals == rb.evals
            assert ra.seed == rb.seed

    def test_resume_skips_existing_records(self, tmp_path):
        out = tmp_path / "records.csv"
        cfg = tiny_config(out=str(out))
        first = run_experiment(cfg)
        stamp = out.read_bytes()
        second = run_experiment(cfg)
        assert out.read_bytes() == stamp  # nothing recomputed, wall times kept
        assert [r.energy for r in first] == [r.energy for r in second]

    def test_workers_match_serial(self, tmp_path):
        serial = run_experiment(tiny_config())
        parallel = run_experiment(tiny_config(workers=2))
        for rs, rp in zip(serial, parallel):
            assert rs.energy == rp.energy and rs.evals == rp.evals

    def test_tsp_records_have_feasibility_and_tour_cost(self):
        cfg = ExperimentConfig(
            family="tsp", sizes=(3,), samples=2, optimizers=("altopt",), seed=9
        )
        records = run_experiment(cfg)
        for record in records:
            assert record.feasible is True
            inst = random_tsp(3, record.seed)
            best = min(
                inst.tour_length(p) for p in itertools.permutations(range(3))
            )
            assert record.energy == pytest.approx(best, abs=1e-9)

    def test_maxcut_records_have_cut_values(self):
        cfg = ExperimentConfig(
            family="maxcut_regular",
            sizes=(8,),
            degrees=(3,),
            samples=2,
            optimizers=("altopt", "tabu"),
            seed=4,
        )
        records = run_experiment(cfg)
        for record in records:
            assert record.cut_value is not None
            assert record.energy == -record.cut_value


class TestAggregate:
    def test_single_record_equals_itself(self):
        records = run_experiment(tiny_config(samples=1, optimizers=("altopt",)))
        row = aggregate(records)[0]
        assert row.mean_energy == records[0].energy
        assert row.mean_evals == records[0].evals
        assert row.records == 1

    def test_mean_of_two(self):
        recs = [
            _record("a", energy=-1.0),
            _record("b", energy=-3.0),
        ]
        row = aggregate(recs)[0]
        assert row.mean_energy == -2.0

    def test_feasibility_rate(self):
        recs = [
            _record("a", feasible=True),
            _record("b", feasible=False),
            _record("c", feasible=True),
            _record("d", feasible=True),
        ]
        assert aggregate(recs)[0].feasibility_rate == 0.75

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate([])

    def test_rows_sorted(self):
        recs = [
            _record("a", size=31, optimizer="tabu"),
            _record("b", size=15, optimizer="altopt"),
            _record("c", size=15, optimizer="bh"),
        ]
        rows = aggregate(recs)
        assert [(r.size, r.optimizer) for r in rows] == [
            (15, "altopt"),
            (15, "bh"),
            (31, "tabu"),
        ]


def _record(pid, *, size=15, optimizer="altopt", energy=-1.0, feasible=None):
    return ResultRecord(
        problem_id=pid,
        family="random_qubo",
        size=size,
        density_or_degree=0.5,
        optimizer=optimizer,
        encoding="rfprime",
        seed=1,
        energy=energy,
        cut_value=None,
        feasible=feasible,
        evals=10,
        iterations=2,
        wall_time_ms=1,
    )


class TestCsv:
    def test_empty_gives_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit_csv([], path)
        lines = path.read_text().splitlines()
        assert len(lines) == 1
        assert lines[0].startswith("problem_id,family,")

    def test_round_trip(self, tmp_path):
        records = run_experiment(tiny_config())
        path = tmp_path / "r.csv"
        emit_csv(records, path)
        assert read_records(path) == records

    def test_deterministic_bytes(self, tmp_path):
        records = run_experiment(tiny_config())
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_csv(records, p1)
        emit_csv(records, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_table_rows_csv(self, tmp_path):
        rows = aggregate(run_experiment(tiny_config()))
        path = tmp_path / "t.csv"
        emit_csv(rows, path, schema=TableRow)
        assert path.read_text().startswith("family,size,optimizer,")


class TestPresets:
    def test_t1_desk_truncates_sizes(self):
        cfg = preset_config("t1", "desk")
        assert cfg.sizes == (15, 31)
        assert cfg.samples == 5
        assert cfg.densities == (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)

    def test_t1_full_sizes(self):
        cfg = preset_config("t1", "full")
        assert cfg.sizes == (15, 31, 63, 127)
        assert cfg.samples == 20

    def test_t2_sizes(self):
        assert preset_config("t2", "desk").sizes == (3, 5, 7, 9, 11)
        assert preset_config("t2", "full").sizes == (3, 5, 7, 9, 11)

    def test_t3_desk_and_degree_count(self):
        cfg = preset_config("t3", "desk")
        assert cfg.sizes == (16,)
        assert cfg.degrees is None
        assert len(nine_degrees(16)) == 9
        assert preset_config("t3", "full").sizes == (16, 32, 64, 128)

    def test_bad_names(self):
        with pytest.raises(ValueError):
            preset_config("t4")
        with pytest.raises(ValueError):
            preset_config("t1", "huge")


class TestVerify:
    def test_clean_records_verify(self, tmp_path):
        cfg = tiny_config(out=str(tmp_path / "r.csv"))
        records = run_experiment(cfg)
        checked, mismatches = verify_records(cfg, records, fraction=1.0)
        assert checked == len(records)
        assert mismatches == []

    def test_corrupted_record_detected(self, tmp_path):
        cfg = tiny_config(out=str(tmp_path / "r.csv"))
        records = run_experiment(cfg)
        records[0].energy += 1.0
        _, mismatches = verify_records(cfg, records, fraction=1.0)
        assert len(mismatches) == 1


class TestWriteInstances:
    def test_files_exist_and_parse(self, tmp_path):
        cfg = tiny_config()
        paths = write_instances(cfg, tmp_path / "instances")
        assert len(paths) == len(iter_cells(cfg))
        instance, header = load_instance(paths[0])
        assert header["kind"] == "qubo" and instance.n == 6


class TestCli:
    CONFIG = """
    family = random_qubo
    sizes = 6
    densities = 0.5
    samples = 2
    optimizers = altopt, tabu
    seed = 42
    """

    def _write_config(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text(self.CONFIG)
        return path

    def test_gen_run_aggregate_verify(self, tmp_path, capsys):
        cfg_path = self._write_config(tmp_path)
        out_csv = tmp_path / "records.csv"

        assert main(["gen", "--config", str(cfg_path), "--out", str(tmp_path / "inst")]) == 0
        assert len(list((tmp_path / "inst").glob("*.txt"))) == 2

        assert main(["run", "--config", str(cfg_path), "--out", str(out_csv)]) == 0
        records = read_records(out_csv)
        assert len(records) == 4

        table_csv = tmp_path / "table.csv"
        assert main(["aggregate", "--records", str(out_csv), "--out", str(table_csv)]) == 0
        assert table_csv.read_text().count("\n") == 3  # header + 2 optimizers

        assert (
            main(
                [
                    "verify",
                    "--config",
                    str(cfg_path),
                    "--records",
                    str(out_csv),
                    "--fraction",
                    "1.0",
                ]
            )
            == 0
        )
        out = capsys.readouterr().out
        assert "all reproducible" in out

    def test_run_optimizer_override(self, tmp_path):
        cfg_path = self._write_config(tmp_path)
        out_csv = tmp_path / "only_altopt.csv"
        assert (
            main(
                [
                    "run",
                    "--config",
                    str(cfg_path),
                    "--out",
                    str(out_csv),
                    "--optimizer",
                    "altopt",
                ]
            )
            == 0
        )
        assert {r.optimizer for r in read_records(out_csv)} == {"altopt"}

    def test_reproduce_small_override(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code = main(
            [
                "reproduce",
                "--table",
                "t3",
                "--scale",
                "desk",
                "--optimizer",
                "altopt",
                "--out",
                str(tmp_path / "t3.csv"),
                "--table-out",
                str(tmp_path / "t3_table.csv"),
            ]
        )
        assert code == 0
        records = read_records(tmp_path / "t3.csv")
        assert len(records) == 9 * 5  # nine degrees, five samples, one optimizer
        assert (tmp_path / "t3_table.csv").exists()

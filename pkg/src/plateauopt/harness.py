"""Benchmark harness: instance generation, optimizer runs, CSV aggregation.

An experiment is a grid of cells (family, size, density-or-degree, sample).
Each cell derives its own seed from the master seed via a stable hash, so
instance streams do not shift when optimizers are added or removed, and
every record can be recomputed from its stored seed and parameters.

Families and their reduction chains:

* ``random_qubo``   -- QUBO -> Ising -> MaxCut-with-gauge -> diagonal ansatz;
  records the decoded binary energy x^T Q x.
* ``tsp``           -- penalty QUBO of a random Euclidean TSP, same chain;
  records the full penalty objective (x^T Q x + offset, equal to the tour
  length when feasible) and the permutation-matrix feasibility flag.
* ``maxcut_regular``-- weighted d-regular graph evaluated directly; records
  the decoded cut value (energy is its negative, the minimized objective).

Config files are flat ``key = value`` text; see :func:`parse_config`.
"""

from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .encoding import EncodingKind, EncodingSpec, spins_from_angles
from .optimizers import (
    BasinHoppingConfig,
    GeneticConfig,
    ObjectiveHandle,
    OptimizerReport,
    TabuConfig,
    altopt,
    basinhopping,
    genetic,
    nft,
    tabu_search,
)
from .problems import (
    Qubo,
    TspEncoding,
    WeightedGraph,
    cut_value,
    ising_to_maxcut,
    maxcut_qubo,
    qubo_energy,
    qubo_to_ising,
    random_qubo,
    random_regular_graph,
    random_tsp,
    save_instance,
    tsp_feasible,
    tsp_qubo,
)
from .simulator import DiagonalAnsatz, ansatz_energy, build_ansatz

FAMILIES = ("random_qubo", "tsp", "maxcut_regular")
OPTIMIZERS = ("altopt", "nft", "bh", "ga", "tabu")
ENCODINGS = ("rf", "rfprime")
MODES = ("exact", "shots")


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """Full description of one experiment grid.

    ``densities`` applies to random_qubo, ``degrees`` to maxcut_regular
    (None picks nine degrees spread uniformly between 0 and the size).
    ``optimizer_params`` holds per-optimizer keyword overrides, e.g.
    ``{"tabu": {"max_moves": 1000}}``.
    """

    family: str
    sizes: tuple[int, ...]
    densities: tuple[float, ...] | None = None
    degrees: tuple[int, ...] | None = None
    samples: int = 1
    optimizers: tuple[str, ...] = ("altopt",)
    encoding: str = "rfprime"
    rf_m: int | None = None
    mode: str = "exact"
    shots: int = 1024
    seed: int = 0
    out: str | None = None
    workers: int = 1
    optimizer_params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; pick from {FAMILIES}")
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise ValueError("sizes must be a non-empty list of positive integers")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.family == "random_qubo" and not self.densities:
            raise ValueError("random_qubo needs a densities list")
        for name in self.optimizers:
            if name not in OPTIMIZERS:
                raise ValueError(f"unknown optimizer {name!r}; pick from {OPTIMIZERS}")
        if self.encoding not in ENCODINGS:
            raise ValueError(f"encoding must be one of {ENCODINGS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")


@dataclass
class ResultRecord:
    """One (instance, optimizer) run.

    ``evals`` counts objective evaluations (the classical-quantum rounds);
    ``iterations`` is the optimizer's own unit (sweeps, coordinate updates,
    hops, generations or moves) since that count is ambiguous across
    optimizers.
    """

    problem_id: str
    family: str
    size: int
    density_or_degree: float | None
    optimizer: str
    encoding: str
    seed: int
    energy: float
    cut_value: float | None
    feasible: bool | None
    evals: int
    iterations: int
    wall_time_ms: int


@dataclass
class TableRow:
    """Aggregated summary over the records of one (family, size, optimizer)."""

    family: str
    size: int
    optimizer: str
    records: int
    mean_energy: float
    mean_cut_value: float | None
    mean_evals: float
    feasibility_rate: float | None


def stable_seed(*parts) -> int:
    """Platform-stable 63-bit seed derived from the given parts."""
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def nine_degrees(n: int) -> tuple[int, ...]:
    """Nine degrees spread uniformly over [0, n], clipped to valid values.

    Degrees are rounded, capped at n - 1 and lowered by one where n*d would
    be odd; duplicates after adjustment are dropped.
    """
    out: list[int] = []
    for v in np.linspace(0.0, n, 9):
        d = min(int(round(v)), n - 1)
        if (n * d) % 2 != 0:
            d -= 1
        d = max(d, 0)
        if d not in out:
            out.append(d)
    return tuple(out)


@dataclass(frozen=True)
class CellSpec:
    """One instance slot of the experiment grid."""

    family: str
    size: int
    density_or_degree: float | None
    sample: int
    cell_seed: int
    problem_id: str


def _dparam_label(value) -> str:
    if value is None:
        return "na"
    if isinstance(value, float) and value == int(value):
        return str(int(value))
    return str(value)


def iter_cells(cfg: ExperimentConfig) -> list[CellSpec]:
    """Enumerate the grid in deterministic (size, parameter, sample) order."""
    cells = []
    for size in cfg.sizes:
        if cfg.family == "random_qubo":
            params = list(cfg.densities)
        elif cfg.family == "tsp":
            params = [None]
        else:
            params = list(cfg.degrees) if cfg.degrees else list(nine_degrees(size))
        for dparam in params:
            label = _dparam_label(dparam)
            for sample in range(cfg.samples):
                cell_seed = stable_seed(cfg.seed, cfg.family, size, label, sample)
                problem_id = f"{cfg.family}-n{size}-d{label}-s{sample}"
                cells.append(
                    CellSpec(
                        family=cfg.family,
                        size=size,
                        density_or_degree=None if dparam is None else float(dparam),
                        sample=sample,
                        cell_seed=cell_seed,
                        problem_id=problem_id,
                    )
                )
    return cells


# ---------------------------------------------------------------------------
# Reduction chains
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class _Chain:
    """Everything needed to optimize and score one instance."""

    family: str
    graph: WeightedGraph
    ansatz: DiagonalAnsatz
    qubo: Qubo
    affine: tuple[float, float] | None  # objective = offset - scale * cut
    tsp: TspEncoding | None = None


def _encoding_spec(cfg: ExperimentConfig, n_nodes: int) -> EncodingSpec:
    if cfg.encoding == "rfprime":
        return EncodingSpec(EncodingKind.SAWTOOTH)
    m = cfg.rf_m if cfg.rf_m is not None else n_nodes
    return EncodingSpec(EncodingKind.DOUBLE_EXP, m=m)


def generate_instance(cfg: ExperimentConfig, cell: CellSpec):
    """The raw problem object for a cell (deterministic per cell seed)."""
    if cfg.family == "random_qubo":
        return random_qubo(cell.size, cell.density_or_degree, cell.cell_seed)
    if cfg.family == "tsp":
        return random_tsp(cell.size, cell.cell_seed)
    return random_regular_graph(cell.size, int(cell.density_or_degree), cell.cell_seed)


def _build_chain(cfg: ExperimentConfig, cell: CellSpec) -> _Chain:
    instance = generate_instance(cfg, cell)
    if cfg.family == "maxcut_regular":
        graph = instance
        spec = _encoding_spec(cfg, graph.n_nodes)
        return _Chain(
            family=cfg.family,
            graph=graph,
            ansatz=build_ansatz(graph, spec),
            qubo=maxcut_qubo(graph),
            affine=None,
        )
    if cfg.family == "tsp":
        enc = tsp_qubo(instance)
        qubo = enc.qubo
        tsp_enc = enc
    else:
        qubo = instance
        tsp_enc = None
    graph, _, affine = ising_to_maxcut(qubo_to_ising(qubo))
    spec = _encoding_spec(cfg, graph.n_nodes)
    return _Chain(
        family=cfg.family,
        graph=graph,
        ansatz=build_ansatz(graph, spec),
        qubo=qubo,
        affine=affine,
        tsp=tsp_enc,
    )


def _metrics_from_bits(chain: _Chain, bits: np.ndarray):
    """(energy, cut, feasible) of a decoded binary assignment."""
    if chain.family == "maxcut_regular":
        spins = 2 * np.asarray(bits, dtype=int) - 1
        cut = cut_value(chain.graph, spins)
        return -cut, cut, None
    energy = qubo_energy(chain.qubo, bits)
    if chain.tsp is not None:
        return (
            energy + chain.tsp.offset,
            None,
            tsp_feasible(bits, chain.tsp.n_cities),
        )
    return energy, None, None


def _decode_report(chain: _Chain, report: OptimizerReport):
    if report.best_bits is not None:
        return _metrics_from_bits(chain, np.asarray(report.best_bits))
    spins = spins_from_angles(
        report.best_angles, chain.ansatz.layout, chain.ansatz.spec
    )
    if chain.family == "maxcut_regular":
        cut = cut_value(chain.graph, spins)
        return -cut, cut, None
    bits = (spins[:-1] + 1) // 2  # drop the gauge spin
    return _metrics_from_bits(chain, bits)


def _run_single(
    cfg: ExperimentConfig, chain: _Chain, name: str, opt_seed: int
) -> OptimizerReport:
    params = dict(cfg.optimizer_params.get(name, {}))
    if name == "tabu":
        kwargs = {"seed": opt_seed}
        kwargs.update(params)
        return tabu_search(chain.qubo, TabuConfig(**kwargs))

    k = chain.ansatz.layout.n_variables
    rng = (
        np.random.default_rng(stable_seed(opt_seed, "shots"))
        if cfg.mode == "shots"
        else None
    )
    offset, scale = chain.affine if chain.affine is not None else (0.0, 1.0)

    def fn(angles):
        cut = ansatz_energy(
            chain.ansatz, angles, cfg.mode, shots=cfg.shots, rng=rng
        )
        return offset - scale * cut

    obj = ObjectiveHandle(fn=fn, dim=k)
    if name == "altopt":
        return altopt(obj, k)
    if name == "nft":
        return nft(obj, k, **params)
    if name == "bh":
        kwargs = {"seed": opt_seed, "rhobeg": k / 2.0 ** (chain.graph.n_nodes - 1)}
        kwargs.update(params)
        return basinhopping(obj, k, BasinHoppingConfig(**kwargs))
    if name == "ga":
        kwargs = {"seed": opt_seed}
        kwargs.update(params)
        return genetic(obj, k, GeneticConfig(**kwargs))
    raise ValueError(f"unknown optimizer {name!r}")


def run_cell(
    cfg: ExperimentConfig, cell: CellSpec, optimizers: tuple[str, ...]
) -> list[ResultRecord]:
    """Generate the cell's instance and run the requested optimizers on it."""
    chain = _build_chain(cfg, cell)
    records = []
    for name in optimizers:
        opt_seed = stable_seed(cell.cell_seed, name)
        start = time.perf_counter()
        report = _run_single(cfg, chain, name, opt_seed)
        wall_ms = int((time.perf_counter() - start) * 1000)
        energy, cut, feasible = _decode_report(chain, report)
        records.append(
            ResultRecord(
                problem_id=cell.problem_id,
                family=cell.family,
                size=cell.size,
                density_or_degree=cell.density_or_degree,
                optimizer=name,
                encoding=cfg.encoding,
                seed=cell.cell_seed,
                energy=float(energy),
                cut_value=None if cut is None else float(cut),
                feasible=feasible,
                evals=report.evals,
                iterations=report.iterations,
                wall_time_ms=wall_ms,
            )
        )
    return records


def _run_cell_task(args):
    cfg, cell, names = args
    return run_cell(cfg, cell, names)


def run_experiment(cfg: ExperimentConfig) -> list[ResultRecord]:
    """Run the whole grid, resuming over any records already in ``cfg.out``.

    Records are merged in deterministic (cell, optimizer) order and written
    back to ``cfg.out`` when set.  With ``workers > 1`` cells run in a
    process pool; per-cell seeding makes the result identical either way.
    """
    cells = iter_cells(cfg)
    existing: list[ResultRecord] = []
    if cfg.out and Path(cfg.out).exists():
        existing = read_records(cfg.out)
    have = {(r.problem_id, r.optimizer) for r in existing}
    tasks = []
    for cell in cells:
        names = tuple(
            n for n in cfg.optimizers if (cell.problem_id, n) not in have
        )
        if names:
            tasks.append((cfg, cell, names))

    new_records: list[ResultRecord] = []
    if tasks:
        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                for batch in pool.map(_run_cell_task, tasks):
                    new_records.extend(batch)
        else:
            for task in tasks:
                new_records.extend(_run_cell_task(task))

    cell_order = {c.problem_id: i for i, c in enumerate(cells)}
    opt_order = {n: i for i, n in enumerate(cfg.optimizers)}
    merged = existing + new_records
    merged.sort(
        key=lambda r: (
            cell_order.get(r.problem_id, len(cell_order)),
            opt_order.get(r.optimizer, len(opt_order)),
            r.problem_id,
        )
    )
    if cfg.out:
        emit_csv(merged, cfg.out, schema=ResultRecord)
    return merged


# ---------------------------------------------------------------------------
# Aggregation and CSV
# ---------------------------------------------------------------------------


def aggregate(records: list[ResultRecord]) -> list[TableRow]:
    """Mean energy / evals and feasibility rate per (family, size, optimizer)."""
    if not records:
        raise ValueError("no records to aggregate")
    groups: dict[tuple, list[ResultRecord]] = {}
    for rec in records:
        groups.setdefault((rec.family, rec.size, rec.optimizer), []).append(rec)
    rows = []
    for (family, size, optimizer), recs in sorted(groups.items()):
        cuts = [r.cut_value for r in recs if r.cut_value is not None]
        feas = [r.feasible for r in recs if r.feasible is not None]
        rows.append(
            TableRow(
                family=family,
                size=size,
                optimizer=optimizer,
                records=len(recs),
                mean_energy=float(np.mean([r.energy for r in recs])),
                mean_cut_value=float(np.mean(cuts)) if cuts else None,
                mean_evals=float(np.mean([r.evals for r in recs])),
                feasibility_rate=float(np.mean(feas)) if feas else None,
            )
        )
    return rows


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))  # plain float repr even for numpy scalars
    return str(value)


def emit_csv(rows, path, schema=None) -> None:
    """Write dataclass rows as CSV with dot decimals; empty cell = absent.

    ``schema`` supplies the header when ``rows`` is empty (defaults to
    :class:`ResultRecord`).  Output bytes are deterministic for fixed input.
    """
    if schema is None:
        schema = type(rows[0]) if rows else ResultRecord
    names = [f.name for f in fields(schema)]
    lines = [",".join(names)]
    for row in rows:
        lines.append(",".join(_format_value(getattr(row, n)) for n in names))
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_optional(text: str, cast):
    return None if text == "" else cast(text)


def read_records(path) -> list[ResultRecord]:
    """Parse a records CSV written by :func:`emit_csv`."""
    lines = Path(path).read_text().strip().splitlines()
    if not lines:
        return []
    header = lines[0].split(",")
    expected = [f.name for f in fields(ResultRecord)]
    if header != expected:
        raise ValueError(f"unexpected records header {header}")
    records = []
    for line in lines[1:]:
        v = line.split(",")
        records.append(
            ResultRecord(
                problem_id=v[0],
                family=v[1],
                size=int(v[2]),
                density_or_degree=_parse_optional(v[3], float),
                optimizer=v[4],
                encoding=v[5],
                seed=int(v[6]),
                energy=float(v[7]),
                cut_value=_parse_optional(v[8], float),
                feasible=_parse_optional(v[9], lambda s: s == "true"),
                evals=int(v[10]),
                iterations=int(v[11]),
                wall_time_ms=int(v[12]),
            )
        )
    return records


# ---------------------------------------------------------------------------
# Presets mirroring the benchmark tables
# ---------------------------------------------------------------------------

TABLES = ("t1", "t2", "t3")
SCALES = ("desk", "full")


def preset_config(table: str, scale: str = "desk", **overrides) -> ExperimentConfig:
    """Experiment presets for the three benchmark tables.

    t1: random QUBOs, sizes 15/31/63/127, densities 0.1..0.9.
    t2: random TSPs, sizes 3/5/7/9/11.
    t3: MaxCut on d-regular graphs, sizes 16/32/64/128, nine degrees each.
    Full scale uses 20 samples per cell; desk scale truncates to sizes <= 31
    and 5 samples so a laptop run finishes in minutes.
    """
    if table not in TABLES:
        raise ValueError(f"table must be one of {TABLES}")
    if scale not in SCALES:
        raise ValueError(f"scale must be one of {SCALES}")
    samples = 5 if scale == "desk" else 20
    if table == "t1":
        sizes = (15, 31, 63, 127)
        cfg = ExperimentConfig(
            family="random_qubo",
            sizes=sizes,
            densities=tuple(round(0.1 * i, 1) for i in range(1, 10)),
            samples=samples,
            optimizers=("tabu", "ga", "altopt", "bh", "nft"),
        )
    elif table == "t2":
        cfg = ExperimentConfig(
            family="tsp",
            sizes=(3, 5, 7, 9, 11),
            samples=samples,
            optimizers=("tabu", "ga", "altopt", "bh", "nft"),
        )
    else:
        cfg = ExperimentConfig(
            family="maxcut_regular",
            sizes=(16, 32, 64, 128),
            samples=samples,
            optimizers=("ga", "altopt", "bh", "nft"),
        )
    if scale == "desk":
        cfg = replace(cfg, sizes=tuple(s for s in cfg.sizes if s <= 31))
    return replace(cfg, **overrides) if overrides else cfg


def reproduce_table(
    table: str, scale: str = "desk", **overrides
) -> tuple[list[ResultRecord], list[TableRow]]:
    """Run a preset and return (records, aggregated rows)."""
    cfg = preset_config(table, scale, **overrides)
    records = run_experiment(cfg)
    return records, aggregate(records)


# ---------------------------------------------------------------------------
# Instance export and spot verification
# ---------------------------------------------------------------------------


def write_instances(cfg: ExperimentConfig, out_dir) -> list[Path]:
    """Write every instance of the grid as a flat file under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for cell in iter_cells(cfg):
        instance = generate_instance(cfg, cell)
        path = out / f"{cell.problem_id}.txt"
        save_instance(
            path,
            instance,
            density_or_degree=cell.density_or_degree,
            seed=cell.cell_seed,
        )
        paths.append(path)
    return paths


def verify_records(
    cfg: ExperimentConfig,
    records: list[ResultRecord] | None = None,
    fraction: float = 0.01,
) -> tuple[int, list[tuple[ResultRecord, ResultRecord]]]:
    """Recompute a deterministic sample of records from their stored seeds.

    Returns ``(checked, mismatches)``; a mismatch pairs the stored record
    with its recomputation.  Wall time is excluded from the comparison.
    """
    if records is None:
        if not cfg.out:
            raise ValueError("no records given and cfg.out is unset")
        records = read_records(cfg.out)
    if not records:
        return 0, []
    cells = {c.problem_id: c for c in iter_cells(cfg)}
    n_check = max(1, math.ceil(fraction * len(records)))
    rng = np.random.default_rng(stable_seed(cfg.seed, "verify"))
    indices = rng.choice(len(records), size=min(n_check, len(records)), replace=False)
    mismatches = []
    for idx in sorted(int(i) for i in indices):
        record = records[idx]
        cell = cells.get(record.problem_id)
        if cell is None:
            raise ValueError(f"record {record.problem_id} is not part of the config")
        fresh = run_cell(cfg, cell, (record.optimizer,))[0]
        same = (
            fresh.energy == record.energy
            and fresh.evals == record.evals
            and fresh.iterations == record.iterations
            and fresh.cut_value == record.cut_value
            and fresh.feasible == record.feasible
            and fresh.seed == record.seed
        )
        if not same:
            mismatches.append((record, fresh))
    return len(indices), mismatches


# ---------------------------------------------------------------------------
# Config files: flat "key = value" lines, lists comma-separated
# ---------------------------------------------------------------------------

_LIST_KEYS = {"sizes", "densities", "degrees", "optimizers"}
_INT_KEYS = {"samples", "shots", "seed", "workers", "rf_m"}
_STR_KEYS = {"family", "encoding", "mode", "out"}


def parse_config(path) -> ExperimentConfig:
    """Read an experiment config file.

    Recognized keys: family, sizes, densities, degrees, samples, optimizers,
    encoding, rf_m, mode, shots, seed, out, workers, plus dotted per-optimizer
    overrides such as ``tabu.max_moves = 1000``.  Lines starting with ``#``
    are comments.

    Example::

        family = random_qubo
        sizes = 15, 31
        densities = 0.1, 0.5, 0.9
        samples = 20
        optimizers = altopt, tabu
        encoding = rfprime
        mode = exact
        seed = 7
    """
    kwargs: dict = {}
    params: dict[str, dict] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line (expected key = value): {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if "." in key:
            opt, field_name = key.split(".", 1)
            if opt not in OPTIMIZERS:
                raise ValueError(f"unknown optimizer in key {key!r}")
            params.setdefault(opt, {})[field_name] = _number(value)
        elif key in _LIST_KEYS:
            items = [v.strip() for v in value.split(",") if v.strip()]
            cast = int if key in ("sizes", "degrees") else (str if key == "optimizers" else float)
            kwargs[key] = tuple(cast(v) for v in items)
        elif key in _INT_KEYS:
            kwargs[key] = int(value)
        elif key in _STR_KEYS:
            kwargs[key] = value
        else:
            raise ValueError(f"unknown config key {key!r}")
    if params:
        kwargs["optimizer_params"] = params
    return ExperimentConfig(**kwargs)


def _number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)

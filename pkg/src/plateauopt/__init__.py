"""Plateau-encoded diagonal-ansatz optimization of QUBO, Ising and MaxCut.

Binary optimization problems are reduced to MaxCut, whose cut count is the
energy of a diagonal variational ansatz on ceil(log2 n) qubits; plateau
encodings map a handful of continuous angles to the 2^(n-1) spin
configurations.  The package bundles the encodings, an exact/sampled
statevector evaluator, five derivative-free optimizers and a reproducible
benchmark harness with a CLI (``plateauopt --help``).
"""

from .encoding import (
    EncodingKind,
    EncodingLayout,
    EncodingSpec,
    PhaseOffsetVariant,
    angles_for_spins,
    build_diagonal,
    double_exp_plateau,
    encoded_level,
    inner_exponent,
    phase_offset,
    sawtooth,
    sawtooth_plateau,
    spins_from_angles,
    wrap_angles,
)
from .harness import (
    CellSpec,
    ExperimentConfig,
    ResultRecord,
    TableRow,
    aggregate,
    emit_csv,
    generate_instance,
    iter_cells,
    nine_degrees,
    parse_config,
    preset_config,
    read_records,
    reproduce_table,
    run_cell,
    run_experiment,
    stable_seed,
    verify_records,
    write_instances,
)
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
    run_with_budget,
    tabu_search,
)
from .problems import (
    IsingModel,
    Qubo,
    TspEncoding,
    TspInstance,
    WeightedGraph,
    cut_value,
    ising_to_maxcut,
    laplacian,
    load_instance,
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
from .simulator import (
    DiagonalAnsatz,
    EvalCounter,
    PauliTerm,
    ansatz_energy,
    build_ansatz,
    expectation_exact,
    expectation_sampled,
    pauli_decompose,
    prepare_state,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

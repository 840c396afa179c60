"""Simulator and security-analysis toolkit for a single-state multi-party
semiquantum key agreement protocol built on GHZ entangled states."""

from sqka._core import (
    Rng,
    StateVector,
    apply_unitary,
    basis_state,
    commit_key,
    detection_theory,
    ghz_state,
    mask_key,
    measure_ghz,
    measure_z,
    monte_carlo,
    probe_independence,
    qubit_efficiency,
    random_satisfying_attack,
    random_violating_attack,
    reduced_density,
    run_protocol,
    tensor,
    trace_distance,
    unmask_key,
)

__all__ = [
    "Rng",
    "StateVector",
    "apply_unitary",
    "basis_state",
    "commit_key",
    "detection_theory",
    "ghz_state",
    "mask_key",
    "measure_ghz",
    "measure_z",
    "monte_carlo",
    "probe_independence",
    "qubit_efficiency",
    "random_satisfying_attack",
    "random_violating_attack",
    "reduced_density",
    "run_protocol",
    "tensor",
    "trace_distance",
    "unmask_key",
]

__version__ = "0.1.0"

"""Python access to the polychain library."""

from ._polychain import (
    Ensemble,
    Polymer,
    PolychainError,
    analyze_critical,
    compute,
    critical_energies,
    dimer,
    eigenvalues,
    ids,
    ids_formula,
    lyapunov,
    lyapunov_formula,
    moment_green,
    polymer_matrix,
    run,
)

__all__ = [
    "Ensemble",
    "Polymer",
    "PolychainError",
    "analyze_critical",
    "compute",
    "critical_energies",
    "dimer",
    "eigenvalues",
    "ids",
    "ids_formula",
    "lyapunov",
    "lyapunov_formula",
    "moment_green",
    "polymer_matrix",
    "run",
]

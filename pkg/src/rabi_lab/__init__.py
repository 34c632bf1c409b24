"""Quantum Rabi model toolkit: exact and closed-form spectra, population
dynamics from coherent fields, and cavity applicability estimates."""
__version__ = "0.1.0"

from ._backend import BACKEND
from .errors import (ConvergenceError, DomainError, RabiLabError, RootFindingError,
                     TruncationError, WindowError)
from .rabi import (ModelParams, QuantumState, SpectrumResult, default_n_max, dense_hamiltonian,
                   exact_spectrum, parity_check, parity_sector_hamiltonian, rwa_spectrum,
                   tridiag_eigensolve)
from .uaa import (SMatrixTable, UaaEigenpair, s_element, uaa_coefficients, uaa_energy,
                  uaa_ground, uaa_levels, uaa_residual, uaa_state_vector)
from .dynamics import (CoherentInit, EvolutionTerms, TimeSeries, asymptotic_population,
                       beta_freq, coherent_state_vector, evolve_asymptotic, evolve_exact,
                       evolve_rwa, evolve_uaa, population_difference, s_asymptotic, setup,
                       sum_rule_residual, uaa_expansion_coefficients)
from .cavity import (CavitySpec, CollectiveParams, PacketReport, applicability_mu,
                     collective_average, coupling_and_xi, critical_density, external_mode_ratio,
                     mode_counts, packet_energy_report, solve_delta)

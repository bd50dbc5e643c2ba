"""wavesplit: adiabatic splitting of a trapped atom by two moving Gaussian traps.

Natural units hbar = M = omega = 1 throughout; see :mod:`wavesplit.core`.
"""
from .core import (Grid, PotentialSamples, TrapParams, UnitsConvention, Wavefunction,
                   count_minima, critical_separation, expectation_z, from_si, inner_product,
                   parity_weights, reflect, sample_double_trap, sample_single_trap, to_si)
from .eigensolver import (DiscreteHamiltonian, EigenLevel, Parity, SpectrumTable,
                          adiabatic_spectrum, build_hamiltonian, classify_parity,
                          dense_eigenpairs, ground_doublet, lowest_eigenpairs,
                          single_trap_levels, symmetric_eigenpairs, tunnel_splitting)
from .phase import (PhaseResult, area_loop, predicted_populations, splitting_phase,
                    theta_from_area, time_integrated_phase, velocity_for_phase)
from .propagator import (Method, PropagationConfig, TrajectoryRecord, propagate,
                         step_crank_nicolson, step_split_operator)
from .diagnostics import (AdiabaticityReport, adiabaticity_ratio, parity_leakage,
                          scan_adiabaticity, worst_ratio)
from .protocol import (Frame, RampSchedule, SplitProtocol, SplitResult, SweepRow,
                       com_trajectory, run_noninertial, run_split, sweep_velocity)
from .errors import *  # noqa: F401,F403

__version__ = "0.1.0"

"""Reproduction experiments and brute-force oracles."""
from .experiments import (ConvergenceReport, ExperimentConfig, convergence_orders,
                          match_spectrum, matches_significant, run_dissipation,
                          run_example1, run_example2, run_example3, run_example4,
                          run_stability_tables)
from .oracles import (oracle_direct_convolution, oracle_fractional_integral,
                      oracle_periodic_sum)

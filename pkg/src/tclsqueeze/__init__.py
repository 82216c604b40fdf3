"""Cavity-field squeezing in a Jaynes-Cummings model with a non-Markovian leaky cavity."""
from .model import (DampingValues, InitialAtomSpec, ModelParams, ParameterError,
                    damping_f1, damping_f2, damping_values, evolve, gamma_minus, gamma_plus,
                    initial_dressed_state, propagator_coefficients, spectral_density)
from .observables import (EnvelopeSummary, ObservableRecord, QuadratureMoments,
                          atom_excited_population, dressed_to_bare, extract_envelope,
                          quadrature_moments, reduce_field, squeezing_envelope,
                          squeezing_factors, uncertainty_product)
from .oracle import (IntegratorConfig, integrate_master_equation, liouvillian_apply,
                     quad_damping, rate_from_correlation)
from .runs import (RunConfig, SweepSpec, parse_config, run_figures, run_sweep,
                   run_timeseries, run_verify)

__version__ = "0.1.0"

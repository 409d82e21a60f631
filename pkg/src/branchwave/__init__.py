"""Numerical laboratory for wave-packet scattering on branched coverings
of the Euclidean plane, with metric-perturbation and spectral validation
experiments."""

from .geometry import (BranchedGrid, CoveringSpec, SheetPoint, build_disc_grid,
                       build_grid, crossing_parity, distance_to_branch_points,
                       geodesic_distance, geodesic_distance_detailed)
from .packets import (BandProfile, ConeCutoff, CutoffField, PacketSpec,
                      WaveField, build_cutoff, bump_profile,
                      check_localization, lift_to_cover, packet_values,
                      position_values)
from .evolution import (DiscreteHamiltonian, StepperConfig, assemble_euclidean,
                        assemble_metric, evolve, step)
from .metricfield import (SurfaceFunction, d0, dtilde, dtilde_1, dtilde_inf,
                          gauss_curvature, inj_bound_comparison,
                          inj_bound_covering, inj_bound_global,
                          inj_bound_local, inj_bound_punctured, make_surface,
                          membership, r0_default)
from .scattering import (channel_masses, multi_sheet_survey,
                         s_entry_estimate, same_sheet_experiment,
                         transmission_experiment)
from .spectral import (bessel_zero_oracle, branched_disc_eigenvalues,
                       localization_error_decay, stationary_phase_pointwise,
                       tail_mass_decay)

__version__ = "0.1.0"

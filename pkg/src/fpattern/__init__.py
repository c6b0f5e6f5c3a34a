"""Localized steady vortex patterns in a rotating barotropic gas.

Build compactly supported stream-function patterns, reconstruct the
pressure variable that freezes them, verify the defining identities on a
grid, transport a bearing pressure field, integrate the induced center
trajectory, and evolve the full compressible system.
"""

from .errors import ConfigurationError, FPatternError, NumericalError
from .fields import (Grid2D, ScalarField2D, VectorField2D, divergence, gradient,
                     jacobian, laplacian, make_grid, perp_gradient, sample_bilinear)
from .patterns import (Pattern, ProfileSpec, build_axisymmetric, build_sector_vortex,
                       build_shear, build_zero, check_profile, eikonal_lift,
                       quintic_bump)
from .pressure import (LocalField, PhysicalParams, antiderivative_r1,
                       density_from_pi, pi0_path_integral, reconstruct_pi0)
from .verify import (ResidualReport, StabilityResult, check_stability_class,
                     dubreil_jacotin_residual, exclusion_mask, refinement_orders,
                     residual_report)
from .bearing import (BearingState, Trajectory, advect_pi1, discrepancy_Q,
                      integrate_center, sup_grad_norm)
from .evolver import (ConservationLedger, FullState, LedgerEntry, admissible_dt,
                      diagnostics, init_full_state, pattern_correlation, step_full)
from .config import RunConfig, load_config

__version__ = "0.1.0"

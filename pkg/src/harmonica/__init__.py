"""Handle-based harmonic surface deformation with linear energy
regularization: mesh I/O, discrete operators, harmonic guidance, a direct
sparse solver with factorization reuse, distortion metrics, a batch CLI
and an interactive HTTP service."""

from .mesh import (Mesh, EdgeTopology, MeshError, parse_obj, load_obj,
                   write_obj, save_obj, write_ply, save_ply, build_topology)
from .operators import (WeightedNorm, local_gradient, assemble_gradient,
                        assemble_masses, assemble_laplacian,
                        assemble_diff_flat, assemble_diff_curved,
                        edge_rotation, assemble_norm, dump_matrix_market)
from .guidance import (Transform, Handle, HandleSet, HarmonicWeights,
                       GuidanceField, GuidanceError, make_handle_set,
                       solve_harmonic_weights, blend_transforms,
                       build_guidance, constrained_positions,
                       quat_from_axis_angle, quat_to_matrix)
from .solver import (SolverContext, SolverError, Counters, Energies,
                     factorize, solve, total_energies)
from .metrics import (local_energy, deformation_gradient_2x2,
                      singular_values, iso_conf_errors, colormap,
                      beta_sweep, SweepResult, SweepRow, DEFAULT_BETAS)
from .pipeline import DeformationPipeline, DeformResult

__version__ = "0.1.0"

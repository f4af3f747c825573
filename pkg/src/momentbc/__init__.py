"""Hermite moment systems of kinetic gas theory with wall boundary conditions.

Assembles symmetric hyperbolic moment systems from a Hermite-Laguerre
velocity-space basis, builds Maxwell accommodation and Onsager wall
operators, certifies boundary stability through the characteristic
decomposition and solves a heated-channel benchmark.
"""

__version__ = "0.1.0"

from .tensor import (AXES, FULL3D, PLANAR, ComponentBasis, canonical,
                     expansion_matrix, independent_components, multiplicity,
                     multisets, parity)
from .basis import (BasisFunction, BasisSet, GaussianWeight, Polynomial3,
                    build_basis_set, harmonic_tensor, inner_full, inner_half,
                    laguerre_radial, verify_orthogonality)
from .system import (CharacteristicDecomposition, MomentSystem, MomentTheory,
                     assemble_flux, assemble_symmetrizer, assemble_system,
                     bgk_projector, characteristic_decomposition, grad_theory,
                     parity_reflection, theory_from_name, verify_full_symmetry)
from .boundary import (BoundaryOperator, WallData, assemble_mbc, assemble_obc,
                       make_boundary_operator, wall_inhomogeneity)
from .stability import StabilityReport, check_stability, quadratic_form_H
from .channel import (ChannelConfig, ChannelSolution, ErrorProfile,
                      error_profile, reference_solution, solve_steady,
                      source_vector, time_march_energy)

"""kinelab: local integral-geometric invariants of conic germs and Monte
Carlo verification of infinitesimal kinematic formulas."""

__version__ = "0.1.0"

from .config import Config, DEFAULT
from .geometry import (AffineFlat, ConicGerm, PolytopeUnion, Rotation,
                       SimplicialCone, build_cone, build_polytope,
                       flat_cone_union, full_space_germ, germ, rotate_germ,
                       tangent_cone)
from .feasibility import (ConvexCell, FeasibilityVerdict, Status,
                          cone_cell_has_nonzero_point, min_norm_distance,
                          polyhedron_nonempty)
from .euler import (CellUnionQuery, ChiResult, Mode, chi_link,
                    chi_link_section, chi_slice, euler_of_union,
                    full_lattice_euler, stabilized_chi_limit)
from .sampling import (McEstimate, SampleStream, mc_estimate,
                       sample_grassmannian, sample_rotation, sample_sphere)
from .invariants import (Constants, InvariantProfile, ball_volume, beta0_bar,
                         density, invariant_profile, lambda_lim_profile,
                         lambda0_pair, sigma_k, sigma_pair, sigma_profile,
                         sigma_to_lambda_loc, sphere_volume)
from .kinematics import LAWS, VerificationReport, verify, verify_all
from .scene_io import Scene, emit_report, parse_scene

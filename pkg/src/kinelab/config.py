"""Central tolerance and budget configuration.

Every numerical threshold used anywhere in the library lives here so tests
can tighten (or loosen) them in one place.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Config:
    # geometry
    svd_rel_cutoff: float = 1e-9        # rank decisions on generator matrices
    ortho_tol: float = 1e-12            # ||R^T R - I||_max for rotations / flats
    det_tol: float = 1e-10              # |det R - 1| for rotations

    # feasibility
    tol_pivot: float = 1e-11            # simplex pivot threshold
    tol_feas: float = 1e-9              # phase-1 objective counted as zero below this
    tol_degenerate: float = 1e-7        # decision margin band -> DEGENERATE
    witness_tol: float = 1e-8           # NONEMPTY witnesses must satisfy constraints to this
    lp_iter_factor: int = 10            # iteration cap = factor * (vars + constraints)
    dykstra_max_sweeps: int = 100_000
    dykstra_tol: float = 1e-13          # per-sweep movement considered converged
    ball_band: float = 1e-7             # relative band around the radius -> DEGENERATE

    # euler
    subset_budget: int = 1_000_000      # max probed subsets per chi query
    # delta ladder: base * factor**-r. The base trades premature-agreement
    # bias (measure of samples whose stabilization threshold sits below the
    # second rung, ~base/factor) against ladder depth; 0.02 keeps that bias
    # an order below the acceptance tolerances.
    ladder_base: float = 0.02
    ladder_factor: float = 4.0
    ladder_length: int = 8

    # sampling / Monte Carlo
    degeneracy_cap: float = 0.002       # max fraction of degenerate samples
    max_retries: int = 64               # per-sample resample attempts

    # invariants
    inner_samples: int = 256            # nested sphere integral in beta0_bar
    inner_samples_pair: int = 64        # nested integrals in two-germ estimators

    # verification verdicts
    z_pass: float = 3.0
    z_fail: float = 5.0
    abs_tol: float = 0.02

    def replace(self, **kwargs) -> "Config":
        return dataclasses.replace(self, **kwargs)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT = Config()

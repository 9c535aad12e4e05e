"""graphpot: potential theory on finite weighted graphs.

Dirichlet problems, balayage and capacities, Green/Martin kernels with a
numerical boundary atlas, harmonic measure, polarity and thinness
experiments on box lattices, and Monte Carlo cross-checks. Hot loops run in
a compiled extension when available, with a pure-Python twin producing
bit-identical results (set GRAPHPOT_NO_EXT=1 to force it).
"""

__version__ = "0.1.0"

from ._core import BACKEND
from .errors import GraphPotError
from .spaces import (
    Domain,
    ExtendedFunction,
    HarmonicSpace,
    bounded_transform,
    generate,
    glue,
    join,
    meet,
    phi,
    restrict,
    sup_norm,
)
from .dirichlet import (
    DirichletOperator,
    harmonicity_residual,
    harnack_constant,
    monotone_envelope,
    solve_dirichlet,
    superharmonic_deficiency,
    trace,
)
from .balayage import (
    capacity,
    capacity_integral,
    dirichlet_via_balayage,
    equilibrium_potential,
    reduite,
    reduite_oracle,
    riesz_decompose,
)
from .martin import (
    BoundaryAtlas,
    KernelTable,
    compactify,
    dm_metric,
    green_function,
    martin_kernel,
    minimality_test,
    separation_check,
)
from .measure import (
    BoundaryMeasure,
    harmonic_measure,
    martin_representation,
    pushforward_compare,
    represent,
)
from .mc import mc_green, mc_hitting
from .polar import (
    PolarWitness,
    fine_metric,
    lattice_capacity,
    polar_flag,
    polar_witness,
    refinement_family,
    regularity_test,
    thin_at,
    thorn_lattice,
    wiener_series,
)

__all__ = [name for name in dir() if not name.startswith("_")]

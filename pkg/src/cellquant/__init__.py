"""Globally optimal quantizers for binary-input continuous-output channels.

The optimal cells are intervals in the posterior ``r = P(x1 | y)``, so the
search reduces to choosing cut points on the r-sorted output atoms, which a
dynamic program does exactly.
"""

__version__ = "0.1.0"

from cellquant.channel import (  # noqa: E402
    BinaryPrior,
    ChannelSpec,
    DensitySpec,
    PosteriorGrid,
    compute_posterior,
    discretize,
    eval_density,
    gaussian,
    laplace,
    tabulated,
    uniform,
)
from cellquant.constraints import (  # noqa: E402
    EntropyTerm,
    LinearTerm,
    PowerTerm,
    SeparableConstraint,
    ZeroTerm,
    assemble_objective,
    eval_term,
)
from cellquant.dp_solver import BACKEND, SolveResult, solve, sweep_beta  # noqa: E402
from cellquant.measure import (  # noqa: E402
    cell_centroid,
    cell_distortion,
    kl_divergence,
    mutual_information_xz,
    total_distortion,
    verify_identity,
)
from cellquant.quantizer import ConvexCellQuantizer, GeneralQuantizer  # noqa: E402
from cellquant.threshold import (  # noqa: E402
    check_single_threshold,
    map_r_threshold_to_y,
    scan_scalar_threshold,
)

"""Set function minimization with polar and Nemhauser-Wolsey cutting planes."""

from .bruteforce import Constraint, check_cut_validity, membership_Pf, min_enumerate
from .decomp import (
    Decomposition,
    certify,
    decompose,
    decompose_fractional,
    decompose_generic,
    decompose_moments,
    decompose_quadratic,
)
from .nwcuts import nw_cut_1, nw_cut_2, separate_nw
from .polar import (
    LinearCut,
    enumerate_extreme_points,
    greedy_extreme_point,
    lovasz_extension,
    separate_polar,
    verify_exactness,
)
from .setfn import (
    FractionalFunction,
    MomentsFunction,
    QuadraticFunction,
    SetFunction,
    TabularFunction,
    evaluate,
    is_submodular,
    marginal,
    mask_of,
    normalize,
)
from .solver import ModelConfig, SolveReport, branch_and_bound, make_model, root_cut_loop, solve

__version__ = "0.1.0"

"""Net-space averages, anisotropic net norms and block decompositions."""

__version__ = "0.1.0"

from .decomp import Decomposition, Tau, check_zero_means, decompose  # noqa: E402
from .errors import (AnisonetError, DivergenceError, InvalidArgumentError,  # noqa: E402
                     ParseError, UndefinedRatioError, UnsupportedExponentError)
from .grid import Grid1D, Grid2D, load_grid_csv, random_grid, save_grid_csv  # noqa: E402
from .netavg import (NetAverageTable, build_net_average_table, net_average_1d,  # noqa: E402
                     net_average_query)
from .norms import Exponents1D, Exponents2D, QuadratureSpec, net_norm_1d, net_norm_2d  # noqa: E402

__all__ = [
    "AnisonetError", "Decomposition", "DivergenceError", "Exponents1D", "Exponents2D",
    "Grid1D", "Grid2D", "InvalidArgumentError", "NetAverageTable", "ParseError",
    "QuadratureSpec", "Tau", "UndefinedRatioError", "UnsupportedExponentError",
    "build_net_average_table", "check_zero_means", "decompose", "load_grid_csv",
    "net_average_1d", "net_average_query", "net_norm_1d", "net_norm_2d", "random_grid",
    "save_grid_csv",
]

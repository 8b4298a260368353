from .params import (ConverterParams, PerUnitBases, RatingMismatchWarning,
                     per_unit_bases, baseline_params)
from .grid import (GridParams, make_grid, stiff_grid, DEFAULT_SCR,
                   DEFAULT_RATIO_RX, DEMO_SCR, DEMO_RATIO_RX)
from .operating_point import (OperatingPoint, InfeasibleOperatingPoint,
                              solve_operating_point, dq_power)
from .ssop import SSOPMatrices, build_ssop_matrices
from .io import load_params_file

__all__ = [
    'ConverterParams',
    'GridParams',
    'OperatingPoint',
    'PerUnitBases',
    'SSOPMatrices',
    'InfeasibleOperatingPoint',
    'RatingMismatchWarning',
    'per_unit_bases',
    'baseline_params',
    'make_grid',
    'stiff_grid',
    'solve_operating_point',
    'dq_power',
    'build_ssop_matrices',
    'load_params_file',
    'DEFAULT_SCR',
    'DEFAULT_RATIO_RX',
    'DEMO_SCR',
    'DEMO_RATIO_RX',
]

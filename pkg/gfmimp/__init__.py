# noinspection PyUnresolvedReferences,PyProtectedMember
from ._version import __version__
from . import tf, converter, models, sim, index
from .converter import ConverterParams, make_grid, solve_operating_point
from .models import ImpedanceCurve, Tier, ModelTier, sample_curve
from .index import band_index_report

__all__ = [
    'tf',
    'converter',
    'models',
    'sim',
    'index',
    'ConverterParams',
    'ImpedanceCurve',
    'Tier',
    'ModelTier',
    'make_grid',
    'solve_operating_point',
    'sample_curve',
    'band_index_report',
]


def test(verbose=True, runslow=False):
    from pytest import main
    from os.path import dirname, abspath, join
    return main([dirname(abspath(join(__file__, '..'))), "-s"] +
                (['-v'] if verbose else []) +
                (['--runslow'] if runslow else []))

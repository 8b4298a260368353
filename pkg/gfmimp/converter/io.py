import json

from .params import ConverterParams, per_unit_bases
from .grid import make_grid

_GRID_KEYS = ('L_g', 'R_g', 'SCR', 'ratio_RX', 'V_grid')


def _grid_value(name, value, bases):
    if isinstance(value, dict):
        if set(value) - {'value', 'pu'}:
            raise ValueError('Malformed entry for {}: {}'.format(name, value))
        if value.get('pu', False):
            return bases.from_pu(name, float(value['value']))
        return float(value['value'])
    return float(value)


def load_params_file(path):
    """Read converter and grid parameters from a JSON file.

    The document has optional ``"converter"`` and ``"grid"`` objects.
    Converter entries mirror :class:`ConverterParams` field names, grid
    entries are ``L_g``, ``R_g``, ``SCR``, ``ratio_RX`` and ``V_grid``.
    Values are SI numbers or ``{"value": x, "pu": true}``.

    Returns
    -------
    params : ConverterParams
    grid_kwargs : dict
        Keyword arguments for :func:`gfmimp.converter.make_grid`, already
        in SI units.
    """
    with open(path) as f:
        document = json.load(f)
    unknown = set(document) - {'converter', 'grid'}
    if unknown:
        raise ValueError('Unknown sections in parameter file {}: {}'
                         .format(path, sorted(unknown)))
    params = ConverterParams.from_dict(document.get('converter', {}))
    bases = per_unit_bases(params)
    grid_kwargs = {}
    for name, value in document.get('grid', {}).items():
        if name not in _GRID_KEYS:
            raise ValueError('Unknown grid parameter: {}'.format(name))
        grid_kwargs[name] = _grid_value(name, value, bases)
    # fail early on inconsistent combinations
    make_grid(params, **grid_kwargs)
    return params, grid_kwargs

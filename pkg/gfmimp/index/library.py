"""Bundled grid-code band sets for the positive-resistance check."""
import json
from dataclasses import dataclass
from functools import lru_cache

# name: (exclusion half-width, lower edge, upper edge); edges given as
# offsets from f_N are marked relative.
_PRESETS = {
    'nerc': dict(half_width=0., lower=0., upper=300.),
    'fingrid': dict(half_width=3., lower=0., upper=250.),
    'china': dict(half_width=5., lower=1., upper=1000.),
    'unifi': dict(half_width=4., lower=-40., upper=40., relative=True),
}


@dataclass(frozen=True)
class ComplianceBandSet:
    """Frequency bands in which the converter resistance must be
    non-negative.

    Parameters
    ----------
    name : str
    f_N : float
        Fundamental frequency, Hz.
    required_bands : tuple of (float, float)
        Ascending, non-overlapping bands, Hz.
    excluded_band : (float, float) or None
        Band around the fundamental that the code leaves out.
    """
    name: str
    f_N: float
    required_bands: tuple
    excluded_band: tuple = None

    def __post_init__(self):
        bands = tuple((float(lo), float(hi)) for lo, hi in self.required_bands)
        if not bands:
            raise ValueError('Band set {!r} has no required bands'
                             .format(self.name))
        for lo, hi in bands:
            if not 0 <= lo < hi:
                raise ValueError('Invalid band ({}, {}) in {!r}'
                                 .format(lo, hi, self.name))
        for (_, hi), (lo, _) in zip(bands, bands[1:]):
            if lo < hi:
                raise ValueError('Bands of {!r} must be ascending and '
                                 'non-overlapping'.format(self.name))
        object.__setattr__(self, 'required_bands', bands)
        if self.excluded_band is not None:
            object.__setattr__(self, 'excluded_band',
                               tuple(float(x) for x in self.excluded_band))

    def as_dict(self):
        return dict(name=self.name, f_N=self.f_N,
                    required_bands=[list(b) for b in self.required_bands],
                    excluded_band=None if self.excluded_band is None
                    else list(self.excluded_band))


def preset_names():
    return tuple(sorted(_PRESETS))


def bands_around(name, f_N, half_width, lower, upper):
    """Band set requiring ``[lower, upper]`` except
    ``f_N ± half_width``."""
    if half_width < 0:
        raise ValueError('Exclusion half-width must be non-negative, got {}'
                         .format(half_width))
    if half_width == 0:
        return ComplianceBandSet(name, f_N, ((lower, upper),))
    return ComplianceBandSet(
        name, f_N, ((lower, f_N - half_width), (f_N + half_width, upper)),
        excluded_band=(f_N - half_width, f_N + half_width))


@lru_cache(maxsize=32)
def preset(name, f_N=50.):
    """A bundled band set.

    Parameters
    ----------
    name : str
        One of ``nerc``, ``fingrid``, ``china``, ``unifi``.
    f_N : float
        Fundamental frequency, Hz. The UNIFI bands follow it; the other
        codes keep their absolute edges and move the exclusion.

    Returns
    -------
    ComplianceBandSet
    """
    try:
        entry = _PRESETS[name.lower()]
    except KeyError:
        raise ValueError('Unknown compliance preset: {} (known: {})'
                         .format(name, ', '.join(preset_names())))
    lower, upper = entry['lower'], entry['upper']
    if entry.get('relative'):
        lower, upper = f_N + lower, f_N + upper
    return bands_around(name.lower(), float(f_N), entry['half_width'],
                        lower, upper)


def load_band_set(path):
    """Read a custom band set from JSON.

    The document holds ``name``, ``f_N``, ``required_bands`` (list of
    ``[lo, hi]`` pairs, Hz) and optionally ``exclusion_half_width``.
    """
    with open(path) as f:
        data = json.load(f)
    try:
        name = data['name']
        f_N = float(data['f_N'])
        bands = data['required_bands']
    except (KeyError, TypeError, ValueError) as err:
        raise ValueError('Band file {} must define name, f_N and '
                         'required_bands ({})'.format(path, err))
    half_width = data.get('exclusion_half_width')
    excluded = None
    if half_width:
        excluded = (f_N - float(half_width), f_N + float(half_width))
    return ComplianceBandSet(name, f_N, tuple(tuple(b) for b in bands),
                             excluded_band=excluded)

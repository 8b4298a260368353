from dataclasses import dataclass

import numpy as np
import numpy.polynomial.polynomial as npp
from scipy import signal

MIN_POINTS_PER_SIDE = 5
MAX_GRID_STEP = 0.5
# Samples looked through on either side when first differences are zero.
PLATEAU_BRIDGE = 3


class NoCornerError(ValueError):
    """No slope sign change of :math:`|Z_p|` on one or both sides of the
    fundamental.

    Attributes
    ----------
    sides : tuple of str
        ``'below'`` and/or ``'above'``.
    """

    def __init__(self, sides, message=None):
        self.sides = tuple(sides)
        if message is None:
            message = ('no corner detected {} f_N: the magnitude has no '
                       'local minimum there (flat curve, no peak at the '
                       'fundamental, or insufficient span)'
                       .format(' and '.join(self.sides)))
        super().__init__(message)


@dataclass(frozen=True)
class ExclusionBand:
    """Corner frequencies and exclusion bandwidth, Hz."""
    f_a: float
    f_b: float
    f_N: float
    delta_f1: float
    delta_f2: float
    delta_f: float


def _fundamental(curve, f_N):
    if f_N is None:
        f_N = curve.f_N
    if f_N is None:
        raise ValueError('Fundamental frequency is neither given nor '
                         'recorded in the curve metadata')
    return float(f_N)


def _check_resolution(freqs, f_N):
    below = np.count_nonzero(freqs < f_N)
    above = np.count_nonzero(freqs > f_N)
    if min(below, above) < MIN_POINTS_PER_SIDE:
        raise ValueError('Corner detection needs at least {} points on each '
                         'side of f_N = {} Hz, got {} below and {} above'
                         .format(MIN_POINTS_PER_SIDE, f_N, below, above))
    step = float(np.max(np.diff(freqs)))
    if step > MAX_GRID_STEP + 1e-12:
        raise ValueError('Corner detection needs a grid step of at most {} '
                         'Hz, got {:g} Hz'.format(MAX_GRID_STEP, step))


def _first_change(mags, k, direction):
    """First nonzero difference ``mags[k + j*direction] - mags[k]``
    within the plateau bridge, or 0."""
    for j in range(1, PLATEAU_BRIDGE + 2):
        neighbour = k + j * direction
        if not 0 <= neighbour < len(mags):
            return 0.
        change = mags[neighbour] - mags[k]
        if change != 0:
            return change
    return 0.


def _is_local_minimum(mags, k):
    return _first_change(mags, k, -1) > 0 and _first_change(mags, k, 1) > 0


def _refine(freqs, mags, k):
    """Vertex of the parabola through samples ``k-1, k, k+1``, clamped to
    that bracket."""
    lo, hi = k - 1, k + 1
    if lo < 0 or hi >= len(freqs):
        return float(freqs[k])
    x = freqs[lo:hi + 1] - freqs[k]
    c = npp.polyfit(x, mags[lo:hi + 1], 2)
    if c[2] <= 0:
        return float(freqs[k])
    vertex = -c[1] / (2 * c[2])
    return float(freqs[k] + np.clip(vertex, x[0], x[2]))


def find_corner_frequencies(curve, f_N=None, median_filter=False):
    """Local minima of :math:`|Z_p|` nearest below and above `f_N`.

    A sample is a corner when the magnitude falls into it and rises after
    it; runs of equal samples are looked through for up to three samples.
    Each side is searched only within its own samples, nearest to the
    fundamental first, and the minimum is refined to the vertex of the
    parabola through it and its two neighbours.

    Parameters
    ----------
    curve : ImpedanceCurve
    f_N : float, optional
        Fundamental frequency, Hz; taken from the curve metadata by
        default.
    median_filter : bool
        Apply a 3-point median filter to the magnitude first.

    Returns
    -------
    tuple of float
        ``(f_a, f_b)``.

    Raises
    ------
    NoCornerError
        Naming the side(s) without a local minimum.
    ValueError
        If the grid is too coarse or too short around `f_N`.
    """
    f_N = _fundamental(curve, f_N)
    freqs = np.asarray(curve.freqs, dtype=float)
    _check_resolution(freqs, f_N)
    mags = np.asarray(curve.magnitude, dtype=float)
    if median_filter:
        mags = signal.medfilt(mags, 3)

    corners = {}
    for side, mask in (('below', freqs < f_N), ('above', freqs > f_N)):
        side_f = freqs[mask]
        side_m = mags[mask]
        order = range(len(side_f) - 2, 0, -1) if side == 'below' \
            else range(1, len(side_f) - 1)
        for k in order:
            if _is_local_minimum(side_m, k):
                corners[side] = _refine(side_f, side_m, k)
                break
    missing = [side for side in ('below', 'above') if side not in corners]
    if missing:
        raise NoCornerError(missing)
    return corners['below'], corners['above']


def exclusion_bandwidth(f_a, f_b, f_N):
    """Distances of the corners from the fundamental and their maximum.

    Raises
    ------
    ValueError
        Unless ``f_a < f_N < f_b``.
    """
    if not f_a < f_N < f_b:
        raise ValueError('Corner frequencies must bracket the fundamental, '
                         'got f_a = {}, f_N = {}, f_b = {}'
                         .format(f_a, f_N, f_b))
    delta_f1 = f_N - f_a
    delta_f2 = f_b - f_N
    return ExclusionBand(f_a=float(f_a), f_b=float(f_b), f_N=float(f_N),
                         delta_f1=float(delta_f1), delta_f2=float(delta_f2),
                         delta_f=float(max(delta_f1, delta_f2)))


def peak_characterize(curve, f_a, f_b):
    """Largest sampled :math:`|Z_p|` on ``[f_a, f_b]`` and its frequency.

    The peak of a model with a pole at the fundamental depends on how
    close the grid gets to it.

    Returns
    -------
    f_peak : float
    z_peak : float
        Magnitude, Ohm.
    """
    freqs = curve.freqs
    inside = np.flatnonzero((freqs >= f_a) & (freqs <= f_b))
    if not len(inside):
        raise ValueError('No samples between {} and {} Hz'.format(f_a, f_b))
    mags = curve.magnitude[inside]
    k = inside[int(np.argmax(mags))]
    return float(freqs[k]), float(curve.magnitude[k])

from dataclasses import dataclass, asdict

import numpy as np

DEFAULT_SCR = 10.
DEFAULT_RATIO_RX = 0.1
# Weak grid used by the damping-step instability demonstration.
DEMO_SCR = 2.
DEMO_RATIO_RX = 0.05


@dataclass(frozen=True)
class GridParams:
    """Thevenin equivalent of the grid seen from the converter terminal.

    Both parameterizations are stored; build instances with
    :func:`make_grid` so that they stay consistent.
    """
    L_g: float
    R_g: float
    SCR: float
    ratio_RX: float
    V_grid: float

    def __post_init__(self):
        if self.L_g < 0 or self.R_g < 0:
            raise ValueError('Grid impedance must be non-negative, got '
                             'L_g={}, R_g={}'.format(self.L_g, self.R_g))
        if not self.SCR > 0:
            raise ValueError('SCR must be positive, got {}'.format(self.SCR))
        if self.ratio_RX < 0:
            raise ValueError('R/X ratio must be non-negative, got {}'
                             .format(self.ratio_RX))
        if not self.V_grid > 0:
            raise ValueError('Grid voltage must be positive, got {}'
                             .format(self.V_grid))

    @property
    def is_stiff(self):
        return self.L_g == 0 and self.R_g == 0

    def impedance(self, omega):
        """Complex grid impedance :math:`R_g + j\\omega L_g`."""
        return self.R_g + 1j * omega * self.L_g

    def as_dict(self):
        return asdict(self)


def make_grid(p, *, L_g=None, R_g=None, SCR=None, ratio_RX=None,
              V_grid=None):
    """Build grid parameters from either impedances or (SCR, R/X).

    With neither pair given, the defaults SCR = 10 and R/X = 0.1 apply.
    The reactance is :math:`X_g = V_{LL}^2 / (SCR \\cdot S_N)` at the rated
    frequency, where :math:`V_{LL} = \\sqrt{1.5} V_N` is the rms
    line-to-line voltage.

    Parameters
    ----------
    p : ConverterParams
        Provides ratings for the SCR definition.
    L_g, R_g : float, optional
        Grid inductance (H) and resistance (Ohm).
    SCR, ratio_RX : float, optional
        Short-circuit ratio and resistance-to-reactance ratio. SCR may be
        ``inf`` for a stiff grid.
    V_grid : float, optional
        Grid source amplitude, defaults to :math:`V_N`.

    Returns
    -------
    GridParams
    """
    by_impedance = L_g is not None or R_g is not None
    by_ratio = SCR is not None or ratio_RX is not None
    if by_impedance and by_ratio:
        raise ValueError('Specify either (L_g, R_g) or (SCR, ratio_RX), '
                         'not both')
    if V_grid is None:
        V_grid = p.V_N
    z_scale = 1.5 * p.V_N ** 2 / p.S_N

    if by_impedance:
        L_g = 0. if L_g is None else float(L_g)
        R_g = 0. if R_g is None else float(R_g)
        X_g = p.omega_N * L_g
        SCR = z_scale / X_g if X_g > 0 else np.inf
        if X_g > 0:
            ratio_RX = R_g / X_g
        else:
            ratio_RX = np.inf if R_g > 0 else 0.
    else:
        SCR = DEFAULT_SCR if SCR is None else float(SCR)
        ratio_RX = DEFAULT_RATIO_RX if ratio_RX is None else float(ratio_RX)
        if not SCR > 0:
            raise ValueError('SCR must be positive, got {}'.format(SCR))
        X_g = z_scale / SCR
        L_g = X_g / p.omega_N
        R_g = ratio_RX * X_g
    return GridParams(L_g=L_g, R_g=R_g, SCR=SCR, ratio_RX=ratio_RX,
                      V_grid=float(V_grid))


def stiff_grid(p, V_grid=None):
    return make_grid(p, L_g=0., R_g=0., V_grid=V_grid)

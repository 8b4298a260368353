import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

NEWTON_MAXITER = 50
NEWTON_MAXHALVINGS = 30
# Power balance residual, p.u. of S_N.
POWER_TOL = 1e-10


class InfeasibleOperatingPoint(RuntimeError):
    """Raised when the power-flow solve does not converge.

    Attributes
    ----------
    residual : float
        Final power-balance residual in p.u.
    """

    def __init__(self, residual, message=None):
        self.residual = residual
        super().__init__(message or 'infeasible operating point, final '
                         'residual {:.3e} p.u.'.format(residual))


@dataclass(frozen=True)
class OperatingPoint:
    """Steady state of the converter in the PCC-voltage-aligned frame.

    The PCC voltage lies on the d axis (``V_q0 = 0``). ``theta_0`` is the
    angle of the PCC voltage with respect to the grid source.
    """
    V_d0: float
    V_q0: float
    I_d0: float
    I_q0: float
    P_0: float
    Q_0: float
    theta_0: float

    @property
    def pf(self):
        """Power factor :math:`P/\\sqrt{P^2 + Q^2}`.

        Signed like the active power, so it is negative when the converter
        absorbs active power; the reactive direction is not encoded. Equal
        to 1 at no load.
        """
        apparent = np.hypot(self.P_0, self.Q_0)
        if apparent == 0:
            return 1.
        return self.P_0 / apparent

    @property
    def v_pcc(self):
        return complex(self.V_d0, self.V_q0)

    @property
    def i_out(self):
        return complex(self.I_d0, self.I_q0)

    @classmethod
    def from_voltage_and_power(cls, V_d0, P, Q, theta_0=0.):
        I_d0 = 2 * P / (3 * V_d0)
        I_q0 = -2 * Q / (3 * V_d0)
        return cls(V_d0=float(V_d0), V_q0=0., I_d0=I_d0, I_q0=I_q0,
                   P_0=1.5 * V_d0 * I_d0, Q_0=-1.5 * V_d0 * I_q0,
                   theta_0=float(theta_0))

    @classmethod
    def rated(cls, p):
        """Rated unity-power-factor point, :math:`V_{d0} = V_N`,
        :math:`I_{d0} = I_N`."""
        return cls(V_d0=p.V_N, V_q0=0., I_d0=p.I_N, I_q0=0.,
                   P_0=1.5 * p.V_N * p.I_N, Q_0=0., theta_0=0.)


def dq_power(v, i):
    """Active and reactive power of complex dq voltage and current,
    :math:`P = 1.5(v_d i_d + v_q i_q)`, :math:`Q = 1.5(v_q i_d - v_d i_q)`.
    """
    s = 1.5 * v * np.conj(i)
    return s.real, s.imag


def _power_residual(p, g, V, theta, P, Q):
    z_g = g.impedance(p.omega_N)
    i = (V - g.V_grid * np.exp(-1j * theta)) / z_g
    P_calc, Q_calc = dq_power(V, i)
    return abs(complex(P_calc - P, Q_calc - Q)) / p.S_N


def solve_operating_point(p, g, P, Q):
    """Steady-state operating point for requested terminal powers.

    Solves the two-bus balance
    :math:`V_{d0} - Z_g \\cdot 2(P - jQ)/(3 V_{d0}) = V_g e^{-j\\theta_0}`
    by damped Newton iteration, starting from :math:`\\theta_0 = 0`,
    :math:`V_{d0} = V_g`.

    Parameters
    ----------
    p : ConverterParams
    g : GridParams
    P, Q : float
        Active (W) and reactive (Var) power delivered to the grid.

    Returns
    -------
    OperatingPoint

    Raises
    ------
    InfeasibleOperatingPoint
        If the iteration does not reach a power residual of 1e-10 p.u.
        within 50 iterations.
    """
    P, Q = float(P), float(Q)
    if g.is_stiff:
        return OperatingPoint.from_voltage_and_power(g.V_grid, P, Q)

    z_g = g.impedance(p.omega_N)
    load = z_g * 2 * complex(P, -Q) / 3

    def mismatch(x):
        V, theta = x
        return V - load / V - g.V_grid * np.exp(-1j * theta)

    x = np.array([g.V_grid, 0.])
    f = mismatch(x)
    residual = _power_residual(p, g, x[0], x[1], P, Q)
    for iteration in range(NEWTON_MAXITER):
        if residual < POWER_TOL:
            break
        V, theta = x
        d_V = 1 + load / V ** 2
        d_theta = 1j * g.V_grid * np.exp(-1j * theta)
        jacobian = np.array([[d_V.real, d_theta.real],
                             [d_V.imag, d_theta.imag]])
        try:
            step = np.linalg.solve(jacobian, [-f.real, -f.imag])
        except np.linalg.LinAlgError:
            raise InfeasibleOperatingPoint(residual)
        damping = 1.
        for _ in range(NEWTON_MAXHALVINGS):
            x_new = x + damping * step
            if x_new[0] > 0:
                f_new = mismatch(x_new)
                if abs(f_new) < abs(f):
                    break
            damping /= 2
        else:
            raise InfeasibleOperatingPoint(residual)
        x, f = x_new, f_new
        residual = _power_residual(p, g, x[0], x[1], P, Q)
        log.debug('Newton iteration %d: V=%.6f theta=%.6f residual=%.3e',
                  iteration, x[0], x[1], residual)
    if residual >= POWER_TOL:
        raise InfeasibleOperatingPoint(residual)
    return OperatingPoint.from_voltage_and_power(x[0], P, Q, theta_0=x[1])

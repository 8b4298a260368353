import cmath
import logging
import warnings

import numpy as np
import scipy.linalg

from ..converter import make_grid
from ..sim.averaged import AveragedModel, ControlStack, SteadyStateError
from ..tf import PoleError
from .tiers import ImpedanceModel, ModelTier, Tier

log = logging.getLogger(__name__)

# Finite-difference step relative to each state/input base.
RELATIVE_STEP = 1e-6
# Largest normalized state derivative accepted as steady state, per
# fundamental period.
STEADY_STATE_TOL = 1e-6


class NumericModel(ImpedanceModel):
    """Linearized converter admittance as a state-space model.

    The converter is cut at its terminals: the input is the PCC voltage
    and the output the converter current, both in the grid-synchronous
    frame aligned with the steady PCC voltage. With
    :math:`Y(s) = C (sI - A)^{-1} B + D`, the impedance is
    :math:`Z(s) = -Y(s)^{-1}` (current counted positive out of the
    converter).

    Attributes
    ----------
    A, B, C, D : numpy.ndarray
        Real state-space matrices over the active states.
    state_names : tuple of str
    stack : ControlStack
    op : OperatingPoint
    """

    def __init__(self, tier, p, A, B, C, D, stack, op, state_names):
        super().__init__(tier, p)
        self.A = A
        self.B = B
        self.C = C
        self.D = D
        self.stack = stack
        self.op = op
        self.state_names = tuple(state_names)

    def admittance(self, s):
        """dq admittance at a single Laplace variable `s`."""
        n = self.A.shape[0]
        if n == 0:
            return self.D.astype(complex)
        with warnings.catch_warnings():
            warnings.simplefilter('error', scipy.linalg.LinAlgWarning)
            try:
                x = scipy.linalg.solve(s * np.eye(n) - self.A, self.B)
            except (scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning):
                raise PoleError(s)
        return self.C @ x + self.D

    def dq_matrix(self, s):
        s_arr = np.asarray(s, dtype=complex)
        out = np.empty(s_arr.shape + (2, 2), dtype=complex)
        for index, value in np.ndenumerate(s_arr):
            y = self.admittance(complex(value))
            det = y[0, 0] * y[1, 1] - y[0, 1] * y[1, 0]
            scale = np.max(np.abs(y))
            if scale == 0 or abs(det) < 1e-12 * scale ** 2:
                raise PoleError(complex(value))
            out[index] = -np.array([[y[1, 1], -y[0, 1]],
                                    [-y[1, 0], y[0, 0]]]) / det
        return out

    def eigenvalues(self):
        """Eigenvalues of the converter dynamics with the PCC voltage
        held fixed."""
        if self.A.shape[0] == 0:
            return np.array([], dtype=complex)
        return np.sort_complex(scipy.linalg.eigvals(self.A))

    def op_dict(self):
        op = self.op
        return dict(V_d0=op.V_d0, V_q0=op.V_q0, I_d0=op.I_d0, I_q0=op.I_q0,
                    P_0=op.P_0, Q_0=op.Q_0, theta_0=op.theta_0)

    def __repr__(self):
        return '<NumericModel {} ({} states)>'.format(self.stack.name,
                                                      len(self.state_names))


def _terminal_dynamics(model, theta_0, power_gain=1., P_0=0.):
    """State derivative and output current of the converter cut at its
    terminals, as functions of the active states and the PCC voltage
    (real and imaginary part, synchronous frame aligned with the
    steady PCC voltage).

    The active power loop sees :math:`P_0 + g (P - P_0)` with g the
    `power_gain`.
    """
    p = model.params
    scaled = power_gain != 1. and model.stack.power_loop

    def evaluate(x, u):
        rotation = cmath.exp(1j * (x[2] - theta_0))
        v_conv = complex(u[0], u[1]) / rotation
        omega = model.converter_frequency(x, v_conv)
        shed = 0.
        if scaled:
            power = 1.5 * (v_conv * complex(x[0], -x[1])).real
            shed = (1. - power_gain) * (power - P_0)
            if model.algebraic_omega:
                omega += shed / p.D_p
        rates = model.rates(x, v_conv, omega)
        if shed and not model.algebraic_omega:
            rates[3] += shed / p.J
        i_out = complex(x[0], x[1]) * rotation
        return rates, (i_out.real, i_out.imag)
    return evaluate


def full_impedance_numeric(p, g=None, op=None, stack=None, ssop=None):
    """Impedance model obtained by linearizing the averaged converter
    model about an operating point.

    Parameters
    ----------
    p : ConverterParams
    g : GridParams, optional
        Only used to solve the operating point when `op` is omitted; the
        linearized model is the converter alone.
    op : OperatingPoint
    stack : ControlStack or str, optional
        Control loops to include, all by default.
    ssop : SSOPMatrices, optional
        Its :math:`B_{Vo,v}(2,1)` entry over :math:`V_{d0}^2` scales the
        power feedback of the active power loop; zeroing it removes the
        loop's coupling.

    Returns
    -------
    NumericModel

    Raises
    ------
    SteadyStateError
        If the averaged model is not at rest at `op`.
    """
    stack = ControlStack(stack or ControlStack.FULL)
    if g is None:
        g = make_grid(p)
    if op is None:
        from ..converter import solve_operating_point
        op = solve_operating_point(p, g, p.P_ref, p.Q_ref)
    model, x0 = AveragedModel.at_operating_point(p, g, op, stack)
    power_gain = 1.
    if ssop is not None:
        power_gain = ssop.B_Vo_v[1, 0] / op.V_d0 ** 2
    evaluate = _terminal_dynamics(model, op.theta_0, power_gain, op.P_0)
    u0 = [op.V_d0, op.V_q0]

    rates, _ = evaluate(x0, u0)
    worst = max(abs(rates[k]) / model.bases[k] for k in model.active)
    worst /= p.omega_N
    if worst > STEADY_STATE_TOL:
        raise SteadyStateError('averaged model not at rest at the operating '
                               'point (normalized rate {:.2e})'.format(worst))

    active = model.active
    n = len(active)
    A = np.zeros((n, n))
    B = np.zeros((n, 2))
    C = np.zeros((2, n))
    D = np.zeros((2, 2))

    def central(column_of, perturb, h):
        plus_rates, plus_out = evaluate(*perturb(h))
        minus_rates, minus_out = evaluate(*perturb(-h))
        column_of([(plus_rates[k] - minus_rates[k]) / (2 * h)
                   for k in active],
                  [(a - b) / (2 * h) for a, b in zip(plus_out, minus_out)])

    for col, k in enumerate(active):
        h = RELATIVE_STEP * model.bases[k]

        def perturb(step, k=k):
            x = list(x0)
            x[k] += step
            return x, u0

        def store(dx, dy, col=col):
            A[:, col] = dx
            C[:, col] = dy
        central(store, perturb, h)

    for col in range(2):
        h = RELATIVE_STEP * p.V_N

        def perturb(step, col=col):
            u = list(u0)
            u[col] += step
            return x0, u

        def store(dx, dy, col=col):
            B[:, col] = dx
            D[:, col] = dy
        central(store, perturb, h)

    log.debug('linearized %s stack: %d states, power gain %g', stack.name, n,
              power_gain)
    tier = ModelTier(Tier.FULL_NUMERIC, inertia_enabled=p.J > 0,
                     ssop=ssop, stack=stack)
    return NumericModel(tier, p, A, B, C, D, stack, op, model.state_names)

import cmath
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .integrate import rk4_step

log = logging.getLogger(__name__)

STATE_NAMES = ('i_d', 'i_q', 'theta', 'omega', 'xi_Vd', 'xi_Vq', 'xi_Id',
               'xi_Iq', 'xi_Q')
DEFAULT_DT = 1e-5
MAX_DT = 50e-6
# States beyond this many base units count as divergence.
DIVERGENCE_LIMIT = 100.
SETTLE_TOL = 1e-6


class SimulationDiverged(RuntimeError):
    """Raised when a state leaves the plausible range.

    Attributes
    ----------
    t : float
        Simulation time of the offending step, s.
    """

    def __init__(self, t, state_name=None):
        self.t = t
        self.state_name = state_name
        super().__init__('simulation diverged at t = {:.6f} s ({})'
                         .format(t, state_name))


class SteadyStateError(RuntimeError):
    pass


class ControlStack(enum.Enum):
    """Control loops active in the averaged converter model.

    ``CCL`` runs the current loop on a fixed reference, ``VCL`` adds the
    voltage loop, ``APCL`` adds the active power loop (fixed voltage
    magnitude reference) and ``FULL`` adds the reactive power loop.
    """
    CCL = 'ccl'
    VCL = 'vcl'
    APCL = 'apcl'
    FULL = 'full'

    @property
    def voltage_loop(self):
        return self is not ControlStack.CCL

    @property
    def power_loop(self):
        return self in (ControlStack.APCL, ControlStack.FULL)

    @property
    def reactive_loop(self):
        return self is ControlStack.FULL


@dataclass(frozen=True)
class AveragedModelState:
    """State of the averaged converter model.

    Currents and controller states are in the converter frame, which
    rotates at ``omega`` and leads the grid-synchronous frame by
    ``theta``.
    """
    i_d: float
    i_q: float
    theta: float
    omega: float
    xi_Vd: float
    xi_Vq: float
    xi_Id: float
    xi_Iq: float
    xi_Q: float

    def to_list(self):
        return [getattr(self, name) for name in STATE_NAMES]

    @classmethod
    def from_list(cls, values):
        return cls(*(float(v) for v in values))


@dataclass(frozen=True)
class ControlReferences:
    """Set points of the averaged model.

    ``V_ref`` is the voltage magnitude reference of stacks without the
    reactive power loop, ``i_ref_d``/``i_ref_q`` the current reference of
    the current-loop-only stack.
    """
    P_ref: float
    Q_ref: float
    V_ref: float
    i_ref_d: float = 0.
    i_ref_q: float = 0.


class ConstantSource:
    """Grid source of constant amplitude in the synchronous frame."""

    def __init__(self, V_grid):
        self.V_grid = V_grid

    def __call__(self, t):
        return self.V_grid


class AveragedModel:
    """Switching-free model of the converter behind :math:`L_f`,
    connected to a Thevenin grid.

    The converter is an ideal controlled voltage source. Its current
    loop feeds the filter reactance forward, so that in the converter
    frame

    .. math::

        L_f \\frac{di}{dt} = G_I (i_{ref} - i) - v,

    with :math:`i_{ref} = G_V (V_{ref} - v)` when the voltage loop is
    active. The active power loop integrates
    :math:`J \\dot\\omega = P_{ref} - P - D_p (\\omega - \\omega_N)` and the
    angle :math:`\\dot\\theta = \\omega - \\omega_N`; with :math:`J = 0` the
    frequency is algebraic. The reactive power loop sets
    :math:`V_{ref} = V_N + \\xi_Q` with
    :math:`\\dot\\xi_Q = K_q (Q_{ref} - Q + K_v (V_N - |v|))`.

    The PCC voltage follows from the grid branch
    :math:`v = v_g + R_g i + L_g (di/dt + j\\omega i)`, solved together with
    the controller in closed form.

    Parameters
    ----------
    p : ConverterParams
    g : GridParams
    stack : ControlStack
    references : ControlReferences, optional
        Defaults to ``P_ref``, ``Q_ref`` of `p` and :math:`V_{ref} = V_N`.
    """

    def __init__(self, p, g, stack=ControlStack.FULL, references=None):
        stack = ControlStack(stack)
        if p.L_f <= 0:
            raise ValueError('The averaged model needs L_f > 0')
        if p.k_iI <= 0 or (stack.voltage_loop and p.k_iV <= 0):
            raise ValueError('The averaged model needs positive integral '
                             'gains in the active control loops')
        self.params = p
        self.grid = g
        self.stack = stack
        if references is None:
            references = ControlReferences(P_ref=p.P_ref, Q_ref=p.Q_ref,
                                           V_ref=p.V_N)
        self.references = references
        self._i_ref = complex(references.i_ref_d, references.i_ref_q)
        self._alpha = g.L_g / (p.L_f + g.L_g)
        self._kappa = p.k_pI * p.k_pV if stack.voltage_loop else 0.
        self._algebraic_omega = stack.power_loop and p.J == 0
        k_iV = p.k_iV if p.k_iV > 0 else 1.
        self.bases = (p.I_N, p.I_N, 1., p.omega_N, p.I_N / k_iV,
                      p.I_N / k_iV, p.V_N / p.k_iI, p.V_N / p.k_iI, p.V_N)
        self.active = tuple(k for k, name in enumerate(STATE_NAMES)
                            if self._is_active(name))

    def _is_active(self, name):
        if name in ('theta', 'omega'):
            if not self.stack.power_loop:
                return False
            return name == 'theta' or not self._algebraic_omega
        if name in ('xi_Vd', 'xi_Vq'):
            return self.stack.voltage_loop
        if name == 'xi_Q':
            return self.stack.reactive_loop
        return True

    @property
    def algebraic_omega(self):
        """True when the frequency follows the power without inertia."""
        return self._algebraic_omega

    @property
    def state_names(self):
        return tuple(STATE_NAMES[k] for k in self.active)

    @classmethod
    def at_operating_point(cls, p, g, op, stack=ControlStack.FULL):
        """Model whose references hold `op`, with its equilibrium state.

        Returns
        -------
        model : AveragedModel
        state : list of float
        """
        references = ControlReferences(
            P_ref=op.P_0,
            Q_ref=op.Q_0 - p.K_v * (p.V_N - op.V_d0),
            V_ref=op.V_d0,
            i_ref_d=op.I_d0,
            i_ref_q=op.I_q0,
        )
        model = cls(p, g, stack, references)
        return model, model.equilibrium(op)

    def with_damping(self, D_p):
        """Same model with another active power damping."""
        return AveragedModel(self.params.replace(D_p=D_p), self.grid,
                             self.stack, self.references)

    def equilibrium(self, op):
        """Steady state holding `op` with this model's references."""
        p = self.params
        i_0 = complex(op.I_d0, op.I_q0)
        xi_V = i_0 / p.k_iV if self.stack.voltage_loop else 0j
        return [op.I_d0, op.I_q0, op.theta_0, p.omega_N,
                xi_V.real, xi_V.imag, op.V_d0 / p.k_iI, 0.,
                op.V_d0 - p.V_N if self.stack.reactive_loop else 0.]

    def _voltage_reference(self, x):
        if self.stack.reactive_loop:
            return self.params.V_N + x[8]
        return self.references.V_ref

    def _drive(self, x, omega):
        """Converter voltage command without its PCC-voltage term."""
        p = self.params
        i = complex(x[0], x[1])
        if self.stack.voltage_loop:
            i_ref = p.k_pV * self._voltage_reference(x) + \
                p.k_iV * complex(x[4], x[5])
        else:
            i_ref = self._i_ref
        return (p.k_pI * (i_ref - i) + p.k_iI * complex(x[6], x[7]) +
                1j * omega * p.L_f * i)

    def _pcc_voltage(self, x, v_grid_conv, omega):
        alpha = self._alpha
        i = complex(x[0], x[1])
        u = self._drive(x, omega)
        return (((1. - alpha) * (v_grid_conv + self.grid.R_g * i) +
                 alpha * u) / (1. + alpha * self._kappa))

    def terminal_voltage(self, x, v_grid):
        """PCC voltage (converter frame) and converter frequency.

        Parameters
        ----------
        x : sequence of float
            Full state.
        v_grid : complex
            Grid source phasor in the synchronous frame.
        """
        p = self.params
        v_grid_conv = v_grid * cmath.exp(-1j * x[2])
        if not self.stack.power_loop:
            omega = p.omega_N
        elif not self._algebraic_omega:
            omega = x[3]
        else:
            # P is affine in omega through the filter feedforward
            i_conj = complex(x[0], -x[1])
            v_a = self._pcc_voltage(x, v_grid_conv, p.omega_N)
            v_b = self._pcc_voltage(x, v_grid_conv, p.omega_N + 1.)
            p_a = 1.5 * (v_a * i_conj).real
            p_b = 1.5 * (v_b * i_conj).real
            d_omega = (self.references.P_ref - p_a) / (p.D_p + p_b - p_a)
            return v_a + (v_b - v_a) * d_omega, p.omega_N + d_omega
        return self._pcc_voltage(x, v_grid_conv, omega), omega

    def converter_frequency(self, x, v):
        """Converter frequency for a given PCC voltage `v` (converter
        frame)."""
        p = self.params
        if not self.stack.power_loop:
            return p.omega_N
        if not self._algebraic_omega:
            return x[3]
        power = 1.5 * (v * complex(x[0], -x[1])).real
        return p.omega_N + (self.references.P_ref - power) / p.D_p

    def rates(self, x, v, omega):
        """State derivatives for PCC voltage `v` (converter frame) and
        converter frequency `omega`."""
        p = self.params
        stack = self.stack
        i = complex(x[0], x[1])
        if stack.voltage_loop:
            e_v = self._voltage_reference(x) - v
            i_ref = p.k_pV * e_v + p.k_iV * complex(x[4], x[5])
        else:
            e_v = 0j
            i_ref = self._i_ref
        e_i = i_ref - i
        v_c = p.k_pI * e_i + p.k_iI * complex(x[6], x[7]) + \
            1j * omega * p.L_f * i
        di = (v_c - v) / p.L_f - 1j * omega * i
        power = 1.5 * v * i.conjugate()
        if stack.power_loop:
            d_theta = omega - p.omega_N
            if self._algebraic_omega:
                d_omega = 0.
            else:
                d_omega = (self.references.P_ref - power.real -
                           p.D_p * d_theta) / p.J
        else:
            d_theta = d_omega = 0.
        if stack.reactive_loop:
            d_xi_q = p.K_q * (self.references.Q_ref - power.imag +
                              p.K_v * (p.V_N - abs(v)))
        else:
            d_xi_q = 0.
        return [di.real, di.imag, d_theta, d_omega, e_v.real, e_v.imag,
                e_i.real, e_i.imag, d_xi_q]

    def derivatives(self, x, v_grid):
        """State derivatives of the grid-connected model."""
        v, omega = self.terminal_voltage(x, v_grid)
        return self.rates(x, v, omega)

    def measure(self, x, v_grid):
        """PCC voltage and converter current in the synchronous frame,
        with active and reactive power and frequency.

        Returns
        -------
        tuple
            ``(v, i, P, Q, omega)``.
        """
        v, omega = self.terminal_voltage(x, v_grid)
        i = complex(x[0], x[1])
        rotation = cmath.exp(1j * x[2])
        power = 1.5 * v * i.conjugate()
        return v * rotation, i * rotation, power.real, power.imag, omega

    def check_bounds(self, x, t):
        for k in self.active:
            value = x[k]
            if not math.isfinite(value) or \
                    abs(value) > DIVERGENCE_LIMIT * self.bases[k]:
                raise SimulationDiverged(t, STATE_NAMES[k])

    def normalized_change(self, x_old, x_new):
        return max(abs(x_new[k] - x_old[k]) / self.bases[k]
                   for k in self.active)


def step_model(model, state, t, dt, source):
    """One RK4 step of the grid-connected averaged model.

    Parameters
    ----------
    model : AveragedModel
    state : numpy.ndarray
    t : float
        Time at the start of the step, s.
    dt : float
        Step, at most 50 us.
    source : callable
        Grid source phasor in the synchronous frame as a function of
        time.

    Returns
    -------
    numpy.ndarray

    Raises
    ------
    SimulationDiverged
        If any active state exceeds 100 times its base.
    """
    if not 0 < dt <= MAX_DT:
        raise ValueError('Integration step must be in (0, {}] s, got {}'
                         .format(MAX_DT, dt))
    new_state = rk4_step(lambda tau, x: model.derivatives(x, source(tau)),
                         t, state, dt)
    model.check_bounds(new_state, t + dt)
    return new_state


class Simulator:
    """Fixed-step time-domain simulation of an :class:`AveragedModel`.

    Time is counted in whole steps from `t0`, so runs with identical
    inputs are bit-identical.
    """

    def __init__(self, model, state, dt=DEFAULT_DT, t0=0., source=None):
        if not 0 < dt <= MAX_DT:
            raise ValueError('Integration step must be in (0, {}] s, got {}'
                             .format(MAX_DT, dt))
        self.model = model
        self.state = np.array(state, dtype=float)
        self.dt = dt
        self.t0 = t0
        self.steps = 0
        self.source = source or ConstantSource(model.grid.V_grid)

    @property
    def t(self):
        return self.t0 + self.steps * self.dt

    def step(self):
        self.state = step_model(self.model, self.state, self.t, self.dt,
                                self.source)
        self.steps += 1

    def advance(self, n_steps):
        for _ in range(n_steps):
            self.step()

    def measure(self):
        return self.model.measure(self.state, self.source(self.t))

    def settle(self, max_time=5., tol=SETTLE_TOL):
        """Run until the states change by less than `tol` (in base
        units) over one fundamental period.

        Returns
        -------
        float
            Time spent settling, s.

        Raises
        ------
        ValueError
            If `max_time` is not positive.
        SteadyStateError
            If the states are still moving after `max_time`.
        """
        if not max_time > 0:
            raise ValueError('max_time must be positive, got {}'
                             .format(max_time))
        period = 2 * math.pi / self.model.params.omega_N
        n_period = max(1, int(round(period / self.dt)))
        start = self.t
        while self.t - start < max_time:
            previous = self.state
            self.advance(n_period)
            change = self.model.normalized_change(previous, self.state)
            if change < tol:
                log.debug('settled after %.3f s (change %.2e)',
                          self.t - start, change)
                return self.t - start
        raise SteadyStateError(
            'steady state not reached within {} s (last change per period '
            '{:.2e})'.format(max_time, change))

    def snapshot(self):
        return AveragedModelState.from_list(self.state)

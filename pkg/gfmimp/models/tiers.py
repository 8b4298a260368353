import abc
import enum
from dataclasses import dataclass

import numpy as np

from ..converter import (OperatingPoint, SSOPMatrices, build_ssop_matrices,
                         make_grid, solve_operating_point)
from ..tf import RationalTF, TFMatrix2x2, positive_sequence
from .curves import Frame, ImpedanceCurve, default_grid

# Coupling factor of the linearized power 1.5 (v_d i_d + v_q i_q).
AMPLITUDE_POWER_SCALE = 1.5
# The same with V_N read as the rms line-to-line rating, V_LL^2 = 1.5 V_N^2.
NAMEPLATE_POWER_SCALE = AMPLITUDE_POWER_SCALE ** 3


class Tier(enum.Enum):
    CCL_ONLY = 'ccl'
    CCL_VCL = 'vcl'
    APCL_SIMPLIFIED = 'apcl'
    FULL_NUMERIC = 'full'

    @classmethod
    def from_name(cls, name):
        """Look up a tier by short name (``ccl``, ``vcl``, ``apcl``,
        ``full``) or tag."""
        for tier in cls:
            if name.lower() in (tier.value, tier.name.lower()):
                return tier
        raise ValueError('Unknown model tier: {}'.format(name))


@dataclass(frozen=True, eq=False)
class ModelTier:
    """Selection of an impedance model and its options.

    Parameters
    ----------
    tag : Tier
    inertia_enabled : bool
        When false the active power loop is droop-only (J = 0).
    ssop : SSOPMatrices, optional
        Coupling matrices replacing the rated-point defaults of the
        simplified active-power-loop model. For ``FULL_NUMERIC`` the
        :math:`B_{Vo,v}(2,1)` entry rescales the power feedback of the
        linearized active power loop relative to :math:`V_{d0}^2`.
    power_scale : float
        Factor on the (2, 1) coupling entry of ``APCL_SIMPLIFIED``. 1
        keeps the term as :math:`V_N^2 G_p T`;
        :data:`AMPLITUDE_POWER_SCALE` matches the power measurement
        :math:`P = 1.5(v_d i_d + v_q i_q)` of the averaged model. The
        default :data:`NAMEPLATE_POWER_SCALE` reads :math:`V_N` as the
        rms line-to-line rating on top of that.
    stack : ControlStack, optional
        Control loops of the linearized model (``FULL_NUMERIC`` only),
        all loops by default.
    """
    tag: Tier
    inertia_enabled: bool = True
    ssop: SSOPMatrices = None
    power_scale: float = NAMEPLATE_POWER_SCALE
    stack: object = None

    def __post_init__(self):
        object.__setattr__(self, 'tag', Tier(self.tag))
        if self.ssop is not None and self.tag not in (Tier.APCL_SIMPLIFIED,
                                                      Tier.FULL_NUMERIC):
            raise ValueError(
                'SSOP override applies to the {} and {} tiers only'
                .format(Tier.APCL_SIMPLIFIED.name, Tier.FULL_NUMERIC.name))
        if self.stack is not None and self.tag is not Tier.FULL_NUMERIC:
            raise ValueError('A control stack applies to {} only'
                             .format(Tier.FULL_NUMERIC.name))
        if not self.power_scale > 0:
            raise ValueError('power_scale must be positive, got {}'
                             .format(self.power_scale))

    @property
    def has_fundamental_pole(self):
        return self.tag in (Tier.CCL_ONLY, Tier.APCL_SIMPLIFIED,
                            Tier.FULL_NUMERIC)


def ccl_impedance(p):
    """Current-loop impedance :math:`sL_f + k_{pI} + k_{iI}/s`."""
    return RationalTF([p.k_iI, p.k_pI, p.L_f], [0., 1.]) if p.k_iI \
        else RationalTF([p.k_pI, p.L_f])


def vcl_impedance(p):
    """Impedance with cascaded voltage and current loops.

    .. math::

        Z_V = \\frac{s(s^2 L_f + s k_{pI} + k_{iI})}
                   {s^2(k_{pI} k_{pV} + 1) + s(k_{pI} k_{iV} + k_{iI} k_{pV})
                    + k_{iI} k_{iV}}
    """
    num = [0., p.k_iI, p.k_pI, p.L_f]
    den = [p.k_iI * p.k_iV,
           p.k_pI * p.k_iV + p.k_iI * p.k_pV,
           p.k_pI * p.k_pV + 1.]
    return RationalTF(num, den)


def assembled_vcl_impedance(p):
    """:math:`(Z_f + G_I)/(1 + G_V G_I)` built by transfer-function
    arithmetic, without any cancellation."""
    z_f = p.L_f * RationalTF.s()
    g_i = RationalTF.pi(p.k_pI, p.k_iI)
    g_v = RationalTF.pi(p.k_pV, p.k_iV)
    return (z_f + g_i) / (1 + g_v * g_i)


def voltage_loop_transfer(p):
    """Closed voltage loop :math:`G_V G_I / (1 + G_V G_I)`, reduced."""
    g_i = RationalTF.pi(p.k_pI, p.k_iI)
    g_v = RationalTF.pi(p.k_pV, p.k_iV)
    open_loop = g_v * g_i
    return (open_loop / (1 + open_loop)).reduce()


def apcl_gain(p, inertia_enabled=True):
    """Angle response of the active power loop to a power error.

    :math:`G_p = 1/(s(Js + D_p))`, or :math:`1/(s D_p)` without inertia.
    """
    if inertia_enabled and p.J > 0:
        return RationalTF(1., [0., p.D_p, p.J])
    return RationalTF(1., [0., p.D_p])


def apcl_simplified_matrix(p, B_override=None, inertia_enabled=True,
                           power_scale=1.):
    """Simplified dq impedance matrix with the active power loop.

    The diagonal holds :func:`vcl_impedance`, the (2, 1) entry the
    coupling :math:`B \\, G_p \\, G_V G_I/(1 + G_V G_I)` with
    :math:`B = B_{Vo,v}(2,1)`, which is :math:`V_N^2` unless overridden.

    Parameters
    ----------
    p : ConverterParams
    B_override : SSOPMatrices, optional
    inertia_enabled : bool
    power_scale : float
        Factor on the coupling entry; 1 gives the literal expansion with
        :math:`V_N^2`.

    Returns
    -------
    TFMatrix2x2
    """
    z_v = vcl_impedance(p)
    if B_override is None:
        coupling = p.V_N ** 2
    else:
        coupling = B_override.B_Vo_v[1, 0]
    coupling *= power_scale
    if coupling == 0:
        z_21 = RationalTF(0.)
    else:
        z_21 = coupling * apcl_gain(p, inertia_enabled) * \
            voltage_loop_transfer(p)
    return TFMatrix2x2([[z_v, 0.], [z_21, z_v]])


def shifted_s(f, f_N):
    """dq-frame Laplace variable for stationary frequency `f`."""
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ValueError('Frequencies must be non-negative')
    return 2j * np.pi * (f - f_N)


def dq_to_positive_sequence(m, f, f_N):
    """Positive-sequence stationary-frame impedance of a dq model.

    Entries are evaluated at :math:`s = j 2\\pi (f - f_N)` and combined as
    :math:`\\frac{1}{2}(Z_{11} + Z_{22}) + \\frac{j}{2}(Z_{21} - Z_{12})`.
    A scalar transfer function is treated as a diagonal matrix.

    Parameters
    ----------
    m : RationalTF or TFMatrix2x2 or ImpedanceModel
    f : float or array_like
        Stationary-frame frequency, Hz.
    f_N : float
        Fundamental frequency, Hz.

    Raises
    ------
    gfmimp.tf.PoleError
        If the shifted frequency is a pole of any entry.
    """
    s = shifted_s(f, f_N)
    if isinstance(m, RationalTF):
        return m.evaluate(s)
    if isinstance(m, TFMatrix2x2):
        return m.positive_sequence(s)
    return positive_sequence(m.dq_matrix(s))


class ImpedanceModel(metaclass=abc.ABCMeta):
    """A converter impedance model in the dq frame."""

    def __init__(self, tier, p):
        self.tier = tier
        self.params = p

    @abc.abstractmethod
    def dq_matrix(self, s):
        """Complex 2x2 dq impedance at Laplace variable(s) `s`, with
        shape ``np.shape(s) + (2, 2)``."""
        pass

    def positive_sequence(self, f):
        return dq_to_positive_sequence(self, f, self.params.f_N)

    def __repr__(self):
        return '<{} {}>'.format(self.__class__.__name__, self.tier.tag.name)


class AnalyticModel(ImpedanceModel):
    """Impedance model backed by a rational transfer function or a
    matrix of them."""

    def __init__(self, tier, p, tf):
        super().__init__(tier, p)
        self.tf = tf

    def dq_matrix(self, s):
        if isinstance(self.tf, TFMatrix2x2):
            return self.tf.evaluate(s)
        value = self.tf.evaluate(s)
        out = np.zeros(np.shape(s) + (2, 2), dtype=complex)
        out[..., 0, 0] = value
        out[..., 1, 1] = value
        return out

    def positive_sequence(self, f):
        return dq_to_positive_sequence(self.tf, f, self.params.f_N)


def build_model(tier, p, g=None, op=None):
    """Impedance model of a tier.

    Parameters
    ----------
    tier : ModelTier or Tier or str
    p : ConverterParams
    g : GridParams, optional
        Used by ``FULL_NUMERIC`` to solve the operating point when `op`
        is not given; default grid otherwise.
    op : OperatingPoint, optional
        Linearization point of ``FULL_NUMERIC``; by default the point
        delivering ``P_ref``, ``Q_ref`` into `g`.

    Returns
    -------
    ImpedanceModel
    """
    if isinstance(tier, str):
        tier = Tier.from_name(tier)
    if isinstance(tier, Tier):
        tier = ModelTier(tier)
    if tier.tag is Tier.CCL_ONLY:
        return AnalyticModel(tier, p, ccl_impedance(p))
    if tier.tag is Tier.CCL_VCL:
        return AnalyticModel(tier, p, vcl_impedance(p))
    if tier.tag is Tier.APCL_SIMPLIFIED:
        return AnalyticModel(tier, p, apcl_simplified_matrix(
            p, tier.ssop, tier.inertia_enabled, tier.power_scale))
    from .numeric import full_impedance_numeric
    if tier.inertia_enabled:
        params = p
    else:
        params = p.replace(J=0.)
    if op is None:
        op = solve_operating_point(params, g or make_grid(params),
                                   params.P_ref, params.Q_ref)
    return full_impedance_numeric(params, g, op, stack=tier.stack,
                                  ssop=tier.ssop)


def sample_curve(tier, p, g=None, op=None, grid=None):
    """Sample a model's positive-sequence impedance over a frequency grid.

    Parameters
    ----------
    tier : ModelTier or Tier or str
    p : ConverterParams
    g : GridParams, optional
    op : OperatingPoint, optional
        See :func:`build_model`.
    grid : array_like, optional
        Frequencies in Hz; 1-100 Hz in 0.1 Hz steps without :math:`f_N`
        by default.

    Returns
    -------
    ImpedanceCurve
        Provenance is the tier tag. Deterministic for fixed inputs.
    """
    model = build_model(tier, p, g, op)
    tier = model.tier
    if grid is None:
        grid = default_grid(p.f_N)
    grid = np.asarray(grid, dtype=float)
    values = model.positive_sequence(grid)
    steps = np.diff(grid)
    metadata = dict(
        f_N=p.f_N,
        fundamental_pole=tier.has_fundamental_pole,
        inertia_enabled=tier.inertia_enabled,
        power_scale=tier.power_scale,
        grid_step=float(steps.min()) if len(steps) else None,
    )
    if tier.ssop is not None:
        metadata['ssop_override'] = tier.ssop.as_dict()
    if tier.has_fundamental_pole:
        metadata['note'] = ('model has a pole at f_N; the sampled peak '
                            'depends on grid resolution')
    if tier.tag is Tier.FULL_NUMERIC:
        metadata['stack'] = model.stack.name
        metadata['operating_point'] = model.op_dict()
    extra = [tier.tag.name, tier.inertia_enabled, tier.power_scale]
    if g is not None:
        extra.append(g.as_dict())
    return ImpedanceCurve(grid, values, Frame.POSITIVE_SEQ_STATIONARY,
                          provenance=tier.tag.name,
                          params_digest=p.digest(*extra),
                          metadata=metadata)


def ssop_ablation(p, step=0.1, inertia_enabled=True):
    """Effect of zeroing each coupling matrix on the impedance peak.

    Evaluates the simplified model at :math:`f_N \\pm` `step` with the
    rated-point coupling matrices, and with each matrix zeroed in turn.

    Returns
    -------
    dict
        Maps ``'none'`` and each matrix name to
        ``(|Z(f_N - step)|, |Z(f_N + step)|)``.
    """
    op = OperatingPoint.rated(p)
    base = build_ssop_matrices(op, p)
    freqs = np.array([p.f_N - step, p.f_N + step])
    cases = [('none', base)] + [(name, base.zeroed(name))
                                for name in SSOPMatrices.names()]
    result = {}
    for name, matrices in cases:
        matrix = apcl_simplified_matrix(p, matrices, inertia_enabled)
        magnitude = np.abs(dq_to_positive_sequence(matrix, freqs, p.f_N))
        result[name] = (float(magnitude[0]), float(magnitude[1]))
    return result

import hashlib
import json
import warnings
from dataclasses import dataclass, asdict, replace, fields

import numpy as np

# Converter parameters of the 200 kVA reference unit, SI units.
baseline_params = dict(
    S_N=200e3,
    V_N=563.,
    I_N=236.,
    omega_N=100 * np.pi,
    J=2546.,
    D_p=31832.,
    K_v=4438.,
    K_q=0.01,
    k_pV=0.04,
    k_iV=347.,
    k_pI=1.26,
    k_iI=420.,
    L_f=300e-6,
    P_ref=200e3,
    Q_ref=0.,
    V_dc=1300.,
)

_RATINGS = ('S_N', 'V_N', 'I_N', 'omega_N')
_NONNEGATIVE = ('J', 'K_v', 'K_q', 'k_pV', 'k_iV', 'k_pI', 'k_iI', 'L_f',
                'V_dc')
RATING_TOLERANCE = 0.01


class RatingMismatchWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ConverterParams:
    """Parameters of a grid-forming converter, SI units.

    Voltages and currents are peak phase amplitudes, powers follow the
    amplitude-invariant dq convention :math:`P = 1.5 (v_d i_d + v_q i_q)`.
    Defaults are those of :data:`baseline_params`.
    """
    S_N: float = baseline_params['S_N']
    V_N: float = baseline_params['V_N']
    I_N: float = baseline_params['I_N']
    omega_N: float = baseline_params['omega_N']
    J: float = baseline_params['J']
    D_p: float = baseline_params['D_p']
    K_v: float = baseline_params['K_v']
    K_q: float = baseline_params['K_q']
    k_pV: float = baseline_params['k_pV']
    k_iV: float = baseline_params['k_iV']
    k_pI: float = baseline_params['k_pI']
    k_iI: float = baseline_params['k_iI']
    L_f: float = baseline_params['L_f']
    P_ref: float = baseline_params['P_ref']
    Q_ref: float = baseline_params['Q_ref']
    V_dc: float = baseline_params['V_dc']

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value):
                raise ValueError('Converter parameter {} must be finite, '
                                 'got {}'.format(f.name, value))
            object.__setattr__(self, f.name, float(value))
        for name in _RATINGS:
            if getattr(self, name) <= 0:
                raise ValueError('Rating {} must be positive, got {}'
                                 .format(name, getattr(self, name)))
        for name in _NONNEGATIVE:
            if getattr(self, name) < 0:
                raise ValueError('Converter parameter {} must be '
                                 'non-negative, got {}'
                                 .format(name, getattr(self, name)))
        if self.D_p <= 0:
            raise ValueError('Damping D_p must be positive, got {}'
                             .format(self.D_p))

    @property
    def f_N(self):
        """Fundamental frequency in Hz."""
        return self.omega_N / (2 * np.pi)

    @property
    def rating_mismatch(self):
        """Relative mismatch between :math:`1.5 V_N I_N` and
        :math:`S_N`."""
        return abs(1.5 * self.V_N * self.I_N - self.S_N) / self.S_N

    def replace(self, **kwargs):
        for name in kwargs:
            if name not in baseline_params:
                raise ValueError('Unknown converter parameter: {}'
                                 .format(name))
        return replace(self, **kwargs)

    def as_dict(self):
        return asdict(self)

    def digest(self, *extra):
        """Short stable identifier of the parameter set (and of any
        extra JSON-serializable objects)."""
        payload = json.dumps([self.as_dict()] + list(extra), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]

    @classmethod
    def from_dict(cls, data):
        """Build parameters from a mapping as found in a parameter file.

        Each value is either a number in SI units, or a mapping
        ``{"value": x, "pu": true}``, converted with the bases of the
        ratings in the same mapping (or the default ratings).

        Raises
        ------
        ValueError
            On unknown keys, or a per-unit flag on a rating.
        """
        for name in data:
            if name not in baseline_params:
                raise ValueError('Unknown converter parameter: {}'
                                 .format(name))
        raw = {}
        pu = {}
        for name, value in data.items():
            if isinstance(value, dict):
                if set(value) - {'value', 'pu'}:
                    raise ValueError('Malformed entry for {}: {}'
                                     .format(name, value))
                if value.get('pu', False):
                    pu[name] = float(value['value'])
                else:
                    raw[name] = float(value['value'])
            else:
                raw[name] = float(value)
        for name in pu:
            if name in _RATINGS:
                raise ValueError('Rating {} cannot be given in per unit'
                                 .format(name))
        ratings = cls(**{k: v for k, v in raw.items() if k in _RATINGS})
        bases = per_unit_bases(ratings)
        raw.update({name: bases.from_pu(name, value)
                    for name, value in pu.items()})
        params = cls(**raw)
        if params.rating_mismatch > RATING_TOLERANCE:
            warnings.warn(
                '1.5*V_N*I_N = {:.0f} VA differs from S_N = {:.0f} VA by '
                'more than {:.0%}'.format(1.5 * params.V_N * params.I_N,
                                          params.S_N, RATING_TOLERANCE),
                RatingMismatchWarning)
        return params


@dataclass(frozen=True)
class PerUnitBases:
    """Base quantities for per-unit conversion.

    The power base is :math:`S_N`, the voltage base :math:`V_N` (peak
    phase) and the frequency base :math:`\\omega_N`. Impedances are based
    on :math:`1.5 V_N^2 / S_N`, consistent with the amplitude-invariant
    power convention.
    """
    S_base: float
    V_base: float
    I_base: float
    omega_base: float
    Z_base: float
    L_base: float
    J_base: float
    D_base: float
    Kv_base: float
    Kq_base: float

    # parameter name -> base attribute
    _based = dict(
        J='J_base',
        D_p='D_base',
        K_v='Kv_base',
        K_q='Kq_base',
        L_f='L_base',
        k_pI='Z_base',
        k_pV='Y_base',
        P_ref='S_base',
        Q_ref='S_base',
        V_dc='V_base',
        L_g='L_base',
        R_g='Z_base',
        V_grid='V_base',
    )

    @property
    def Y_base(self):
        return 1. / self.Z_base

    def base_of(self, name):
        try:
            return getattr(self, self._based[name])
        except KeyError:
            raise ValueError('Quantity {} has no per-unit base'
                             .format(name))

    def to_pu(self, name, value):
        return value / self.base_of(name)

    def from_pu(self, name, value):
        return value * self.base_of(name)


def per_unit_bases(p):
    """Per-unit base set of a converter.

    Parameters
    ----------
    p : ConverterParams

    Returns
    -------
    PerUnitBases
        With :math:`J_{base} = D_{base} = S_N/\\omega_N`,
        :math:`K_{v,base} = S_N/V_N` and :math:`K_{q,base} = V_N/S_N`.
    """
    Z_base = 1.5 * p.V_N ** 2 / p.S_N
    return PerUnitBases(
        S_base=p.S_N,
        V_base=p.V_N,
        I_base=p.S_N / (1.5 * p.V_N),
        omega_base=p.omega_N,
        Z_base=Z_base,
        L_base=Z_base / p.omega_N,
        J_base=p.S_N / p.omega_N,
        D_base=p.S_N / p.omega_N,
        Kv_base=p.S_N / p.V_N,
        Kq_base=p.V_N / p.S_N,
    )

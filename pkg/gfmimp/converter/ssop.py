from dataclasses import dataclass, fields, replace

import numpy as np

# Factors of the (2, 1) entry of each coupling matrix: 'V' is the PCC
# voltage, 'I' the converter current.
SSOP_FACTORS = dict(
    B_Vo_i=('V', 'I'),
    B_Ic_i=('I', 'I'),
    B_Vc_i=('V', 'I'),
    B_Vo_v=('V', 'V'),
    B_Ic_v=('V', 'I'),
    B_Vc_v=('V', 'V'),
)


def _readonly(matrix):
    matrix = np.array(matrix, dtype=float)
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, eq=False)
class SSOPMatrices:
    """The six steady-state operating-point coupling matrices.

    ``extrapolated`` is set when the entries were generalized away from
    the rated unity-power-factor point and are diagnostic only.
    """
    B_Vo_i: np.ndarray
    B_Ic_i: np.ndarray
    B_Vc_i: np.ndarray
    B_Vo_v: np.ndarray
    B_Ic_v: np.ndarray
    B_Vc_v: np.ndarray
    extrapolated: bool = False

    def __post_init__(self):
        for name in SSOP_FACTORS:
            matrix = _readonly(getattr(self, name))
            if matrix.shape != (2, 2):
                raise ValueError('{} must be 2x2, got shape {}'
                                 .format(name, matrix.shape))
            object.__setattr__(self, name, matrix)

    @staticmethod
    def names():
        return tuple(SSOP_FACTORS)

    def zeroed(self, name):
        """Copy with the named matrix replaced by the zero matrix."""
        if name not in SSOP_FACTORS:
            raise ValueError('Unknown SSOP matrix: {}'.format(name))
        return replace(self, **{name: np.zeros((2, 2))})

    def as_dict(self):
        return {f.name: getattr(self, f.name).tolist()
                if f.name in SSOP_FACTORS else getattr(self, f.name)
                for f in fields(self)}


def build_ssop_matrices(op, p=None):
    """Coupling matrices at an operating point.

    Only the second row is populated: entry (2, 1) is the product of the
    d-axis steady-state factors, entry (2, 2) the negated product of the
    q-axis factors. At the rated unity-power-factor point this gives
    :math:`V_N I_N, I_N^2, V_N I_N, V_N^2, V_N I_N, V_N^2` at (2, 1) and
    zeros elsewhere.

    Parameters
    ----------
    op : OperatingPoint
    p : ConverterParams, optional
        When given, the result is flagged as extrapolated unless `op` is
        the rated unity-power-factor point of `p`. Without it only unity
        power factor is checked.

    Returns
    -------
    SSOPMatrices
    """
    d = dict(V=op.V_d0, I=op.I_d0)
    q = dict(V=op.V_q0, I=op.I_q0)
    matrices = {}
    for name, (x, y) in SSOP_FACTORS.items():
        matrices[name] = np.array([[0., 0.],
                                   [d[x] * d[y], -(q[x] * q[y])]])
    unity = op.V_q0 == 0 and op.I_q0 == 0
    if p is None:
        rated = unity
    else:
        rated = (unity and np.isclose(op.V_d0, p.V_N, rtol=1e-9, atol=0) and
                 np.isclose(op.I_d0, p.I_N, rtol=1e-9, atol=0))
    return SSOPMatrices(extrapolated=not rated, **matrices)

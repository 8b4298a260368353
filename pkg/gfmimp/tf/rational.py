import numpy as np
from numpy.polynomial import polynomial as npp

from .polynomial import Polynomial

# Evaluation refuses |den(s)| below this fraction of the denominator scale.
POLE_TOL = 1e-12
# Root matching tolerance of RationalTF.reduce.
CANCEL_RTOL = 1e-9


class PoleError(ZeroDivisionError):
    """Raised when a rational function is evaluated at one of its poles.

    Attributes
    ----------
    s : complex
        The offending value of the Laplace variable.
    """

    def __init__(self, s):
        self.s = s
        super().__init__('evaluation at pole: s = {}'.format(s))


class RationalTF:
    """Ratio of two real polynomials in the Laplace variable :math:`s`.

    The denominator is kept monic (leading coefficient 1). Arithmetic
    never cancels common factors, use :meth:`reduce` for that.

    Parameters
    ----------
    num : Polynomial or array_like or float
        Numerator, ascending coefficients.
    den : Polynomial or array_like or float, optional
        Denominator, ascending coefficients. Default is 1.

    Raises
    ------
    ZeroDivisionError
        If the denominator is identically zero.
    """
    __slots__ = ('_num', '_den')

    def __init__(self, num, den=1.):
        num = Polynomial.coerce(num)
        den = Polynomial.coerce(den)
        if den.is_zero:
            raise ZeroDivisionError('zero denominator')
        lead = den.leading
        if lead != 1.:
            num = num.scale(1. / lead)
            den = den.scale(1. / lead)
        self._num = num
        self._den = den

    @classmethod
    def coerce(cls, value):
        if isinstance(value, RationalTF):
            return value
        if isinstance(value, Polynomial):
            return cls(value)
        return cls(float(value))

    @classmethod
    def s(cls):
        """The Laplace variable itself."""
        return cls([0., 1.])

    @classmethod
    def pi(cls, kp, ki):
        """PI controller :math:`k_p + k_i / s`."""
        if ki == 0:
            return cls(kp)
        return cls([ki, kp], [0., 1.])

    @property
    def num(self):
        return self._num

    @property
    def den(self):
        return self._den

    @property
    def is_zero(self):
        return self._num.is_zero

    def evaluate(self, s):
        """Evaluate the rational function at complex :math:`s`.

        Parameters
        ----------
        s : complex or array_like of complex
            Laplace variable, rad/s.

        Returns
        -------
        complex or numpy.ndarray

        Raises
        ------
        PoleError
            If :math:`|den(s)|` falls below
            ``1e-12 * max|den coeff| * max(1, |s|**deg)`` at any point.
        """
        s_arr = np.asarray(s, dtype=complex)
        den = npp.polyval(s_arr, self._den.coeffs)
        scale = POLE_TOL * np.max(np.abs(self._den.coeffs)) * \
            np.maximum(1., np.abs(s_arr) ** self._den.degree)
        at_pole = np.abs(den) < scale
        if np.any(at_pole):
            bad = s_arr[at_pole] if s_arr.ndim else s_arr
            raise PoleError(complex(np.ravel(bad)[0]))
        value = npp.polyval(s_arr, self._num.coeffs) / den
        if s_arr.ndim == 0:
            return complex(value)
        return value

    __call__ = evaluate

    def poles(self):
        """Roots of the denominator (empty if it is a constant)."""
        return self._den.roots()

    def zeros(self):
        return self._num.roots()

    def reduce(self, rtol=CANCEL_RTOL):
        """Cancel common factors of numerator and denominator.

        Common powers of :math:`s` are removed exactly. Remaining roots
        are matched pairwise with relative tolerance `rtol`; if any match,
        both polynomials are rebuilt from their surviving roots.

        Parameters
        ----------
        rtol : float
            Relative tolerance for treating a zero and a pole as equal.

        Returns
        -------
        RationalTF
        """
        if self._num.is_zero:
            return RationalTF(0.)
        common = min(self._num.origin_multiplicity,
                     self._den.origin_multiplicity)
        num = self._num.shift_down(common)
        den = self._den.shift_down(common)

        zeros = list(num.roots())
        poles = list(den.roots())
        kept_zeros = []
        for z in zeros:
            match = next((k for k, p in enumerate(poles)
                          if abs(z - p) <= rtol * max(1., abs(z), abs(p))),
                         None)
            if match is None:
                kept_zeros.append(z)
            else:
                del poles[match]
        if len(kept_zeros) == len(zeros):
            return RationalTF(num, den)
        return RationalTF(
            num.leading * np.real(npp.polyfromroots(kept_zeros)),
            np.real(npp.polyfromroots(poles)))

    def parallel(self, other):
        """Parallel combination :math:`ab / (a + b)`."""
        other = RationalTF.coerce(other)
        return (self * other) / (self + other)

    def __add__(self, other):
        return rtf_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return RationalTF(-self._num, self._den)

    def __sub__(self, other):
        return rtf_add(self, -RationalTF.coerce(other))

    def __rsub__(self, other):
        return rtf_add(-self, other)

    def __mul__(self, other):
        return rtf_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return rtf_div(self, other)

    def __rtruediv__(self, other):
        return rtf_div(other, self)

    def __eq__(self, other):
        if not isinstance(other, RationalTF):
            return NotImplemented
        return self._num == other._num and self._den == other._den

    def __hash__(self):
        return hash((self._num, self._den))

    def __repr__(self):
        return '<{} num={} den={}>'.format(
            self.__class__.__name__,
            list(self._num.coeffs), list(self._den.coeffs))


def rtf_add(a, b):
    a, b = RationalTF.coerce(a), RationalTF.coerce(b)
    if a.den == b.den:
        return RationalTF(a.num + b.num, a.den)
    return RationalTF(a.num * b.den + b.num * a.den, a.den * b.den)


def rtf_mul(a, b):
    a, b = RationalTF.coerce(a), RationalTF.coerce(b)
    return RationalTF(a.num * b.num, a.den * b.den)


def rtf_div(a, b):
    """Quotient of two rational functions.

    Raises
    ------
    ZeroDivisionError
        If `b` is the zero rational.
    """
    a, b = RationalTF.coerce(a), RationalTF.coerce(b)
    if b.is_zero:
        raise ZeroDivisionError('zero denominator')
    return RationalTF(a.num * b.den, a.den * b.num)

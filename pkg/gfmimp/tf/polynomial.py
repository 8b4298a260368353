import numpy as np
from numpy.polynomial import polynomial as npp

# Newton polish of companion-matrix roots stops at this residual,
# relative to the largest coefficient.
ROOT_POLISH_TOL = 1e-10
ROOT_POLISH_MAXITER = 20


class Polynomial:
    """Real polynomial in the Laplace variable :math:`s`.

    Coefficients are stored in ascending powers of :math:`s`, trailing
    (highest-order) zeros stripped. The zero polynomial is stored as a
    single zero coefficient. Instances are immutable.

    Parameters
    ----------
    coeffs : array_like of float
        Coefficients, ascending powers of :math:`s`.
    """
    __slots__ = ('_coeffs',)

    def __init__(self, coeffs):
        coeffs = np.array(coeffs, dtype=float, ndmin=1)
        if coeffs.ndim != 1:
            raise ValueError(
                'Polynomial coefficients must be a one-dimensional '
                'sequence, got shape {}'.format(coeffs.shape))
        if not np.all(np.isfinite(coeffs)):
            raise ValueError('Polynomial coefficients must be finite, got {}'
                             .format(coeffs))
        nonzero, = np.nonzero(coeffs)
        if len(nonzero) == 0:
            coeffs = np.zeros(1)
        else:
            coeffs = coeffs[:nonzero[-1] + 1].copy()
        coeffs.setflags(write=False)
        self._coeffs = coeffs

    @classmethod
    def coerce(cls, value):
        if isinstance(value, Polynomial):
            return value
        return cls(value)

    @property
    def coeffs(self):
        """Read-only coefficient array, ascending powers of :math:`s`."""
        return self._coeffs

    @property
    def degree(self):
        """Index of the last nonzero coefficient (0 for the zero
        polynomial)."""
        return len(self._coeffs) - 1

    @property
    def is_zero(self):
        return len(self._coeffs) == 1 and self._coeffs[0] == 0.

    @property
    def leading(self):
        return self._coeffs[-1]

    @property
    def origin_multiplicity(self):
        """Number of roots exactly at :math:`s = 0`."""
        if self.is_zero:
            return 0
        nonzero, = np.nonzero(self._coeffs)
        return int(nonzero[0])

    def __call__(self, s):
        return npp.polyval(s, self._coeffs)

    def scale(self, factor):
        return Polynomial(self._coeffs * factor)

    def shift_down(self, n):
        """Divide by :math:`s^n`, which must divide the polynomial
        exactly."""
        if n > self.origin_multiplicity and not self.is_zero:
            raise ValueError('s^{} does not divide {!r}'.format(n, self))
        return Polynomial(self._coeffs[n:]) if n else self

    def roots(self):
        """All complex roots, from companion-matrix eigenvalues polished
        by Newton iteration.

        Returns
        -------
        numpy.ndarray
            Complex roots sorted by real then imaginary part. Empty for
            constant polynomials.
        """
        if self.degree < 1:
            return np.zeros(0, dtype=complex)
        roots = npp.polyroots(self._coeffs).astype(complex)
        derivative = npp.polyder(self._coeffs)
        scale = np.max(np.abs(self._coeffs))
        for k, root in enumerate(roots):
            for _ in range(ROOT_POLISH_MAXITER):
                value = npp.polyval(root, self._coeffs)
                if abs(value) <= ROOT_POLISH_TOL * scale:
                    break
                slope = npp.polyval(root, derivative)
                if slope == 0:
                    break
                root = root - value / slope
            roots[k] = root
        return np.sort_complex(roots)

    def __add__(self, other):
        return poly_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-self._coeffs)

    def __sub__(self, other):
        return poly_add(self, -Polynomial.coerce(other))

    def __rsub__(self, other):
        return poly_add(-self, other)

    def __mul__(self, other):
        return poly_mul(self, other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self._coeffs, other._coeffs)

    def __hash__(self):
        return hash(self._coeffs.tobytes())

    def __repr__(self):
        return '<{} {}>'.format(self.__class__.__name__,
                                ', '.join(repr(c) for c in self._coeffs))


def poly_add(a, b):
    """Coefficient-wise sum of two polynomials."""
    a, b = Polynomial.coerce(a), Polynomial.coerce(b)
    return Polynomial(npp.polyadd(a.coeffs, b.coeffs))


def poly_mul(a, b):
    """Product of two polynomials (coefficient convolution)."""
    a, b = Polynomial.coerce(a), Polynomial.coerce(b)
    return Polynomial(npp.polymul(a.coeffs, b.coeffs))

import numpy as np

from .rational import RationalTF


def positive_sequence(z_dq):
    """Positive-sequence combination of a dq impedance matrix.

    .. math::

        Z_p = \\frac{1}{2}(Z_{11} + Z_{22}) + \\frac{j}{2}(Z_{21} - Z_{12})

    Parameters
    ----------
    z_dq : array_like, shape (..., 2, 2)
        Complex dq matrices (rows are d/q outputs, columns d/q inputs).

    Returns
    -------
    complex or numpy.ndarray
    """
    z_dq = np.asarray(z_dq, dtype=complex)
    if z_dq.shape[-2:] != (2, 2):
        raise ValueError('Expected trailing shape (2, 2), got {}'
                         .format(z_dq.shape))
    return (0.5 * (z_dq[..., 0, 0] + z_dq[..., 1, 1]) +
            0.5j * (z_dq[..., 1, 0] - z_dq[..., 0, 1]))


class TFMatrix2x2:
    """A 2x2 matrix of rational transfer functions in the dq frame.

    Parameters
    ----------
    entries : nested sequence, 2x2
        Entries, convertible to :class:`RationalTF`. Plain numbers are
        accepted, zero becomes the zero rational.
    """
    __slots__ = ('_entries',)

    def __init__(self, entries):
        rows = tuple(tuple(RationalTF.coerce(e) for e in row)
                     for row in entries)
        if len(rows) != 2 or any(len(row) != 2 for row in rows):
            raise ValueError('TFMatrix2x2 needs exactly 2x2 entries')
        self._entries = rows

    @classmethod
    def diagonal(cls, tf):
        """Matrix with `tf` on both diagonal entries, zero elsewhere."""
        return cls([[tf, 0.], [0., tf]])

    def __getitem__(self, index):
        i, j = index
        return self._entries[i][j]

    @property
    def entries(self):
        return self._entries

    @property
    def is_diagonal(self):
        return self[0, 1].is_zero and self[1, 0].is_zero

    def evaluate(self, s):
        """Complex matrix value(s) at `s`.

        Returns
        -------
        numpy.ndarray
            Shape ``np.shape(s) + (2, 2)``.

        Raises
        ------
        gfmimp.tf.PoleError
            If `s` is at a pole of any nonzero entry.
        """
        s = np.asarray(s, dtype=complex)
        out = np.zeros(s.shape + (2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                entry = self._entries[i][j]
                if not entry.is_zero:
                    out[..., i, j] = entry.evaluate(s)
        return out

    __call__ = evaluate

    def positive_sequence(self, s):
        """Positive-sequence combination of the matrix at dq-frame `s`."""
        return positive_sequence(self.evaluate(s))

    def __repr__(self):
        return '<{} diagonal={}>'.format(self.__class__.__name__,
                                         self.is_diagonal)

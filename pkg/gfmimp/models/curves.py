import enum
import json
from pathlib import Path

import numpy as np
import pandas as pd

CSV_COLUMNS = ('freq_hz', 're_ohm', 'im_ohm', 'mag_ohm', 'phase_deg')
DEFAULT_GRID = (1., 100., 0.1)


class CurveFormatError(ValueError):
    """Malformed impedance curve file.

    Attributes
    ----------
    line : int or None
        One-based line number in the file (the header is line 1).
    """

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        if line is not None:
            message = '{}, line {}: {}'.format(path, line, message)
        super().__init__(message)


class Frame(enum.Enum):
    POSITIVE_SEQ_STATIONARY = 'positive_seq_stationary'
    DQ_SCALAR = 'dq_scalar'


class ImpedanceCurve:
    """Sampled impedance over a strictly increasing frequency grid.

    Parameters
    ----------
    freqs : array_like of float
        Frequencies in Hz, strictly increasing.
    values : array_like of complex
        Impedance in Ohm at each frequency.
    frame : Frame
        Frame the values are expressed in.
    provenance : str
        Model tier tag, ``"scan"`` or ``"measured:<path>"``.
    params_digest : str, optional
        Identifier of the parameter set that produced the curve.
    metadata : dict, optional
        JSON-serializable extra information.
    """

    def __init__(self, freqs, values, frame=Frame.POSITIVE_SEQ_STATIONARY,
                 provenance='', params_digest='', metadata=None):
        freqs = np.array(freqs, dtype=float, ndmin=1)
        values = np.array(values, dtype=complex, ndmin=1)
        if freqs.ndim != 1 or freqs.shape != values.shape:
            raise ValueError('Frequencies and values must be 1D and of the '
                             'same length, got shapes {} and {}'
                             .format(freqs.shape, values.shape))
        if np.any(np.diff(freqs) <= 0):
            raise ValueError('Curve frequencies must be strictly increasing')
        freqs.setflags(write=False)
        values.setflags(write=False)
        self.freqs = freqs
        self.values = values
        self.frame = Frame(frame)
        self.provenance = provenance
        self.params_digest = params_digest
        self.metadata = dict(metadata or {})

    def __len__(self):
        return len(self.freqs)

    def __repr__(self):
        if len(self):
            span = '{:g}-{:g} Hz'.format(self.freqs[0], self.freqs[-1])
        else:
            span = 'empty'
        return '<{} {} points, {}, {}>'.format(
            self.__class__.__name__, len(self), span, self.provenance)

    @property
    def magnitude(self):
        return np.abs(self.values)

    @property
    def phase_deg(self):
        return np.degrees(np.angle(self.values))

    @property
    def resistance(self):
        return self.values.real

    @property
    def f_N(self):
        return self.metadata.get('f_N')

    def scaled(self, factor):
        """Copy with all values multiplied by `factor`."""
        return ImpedanceCurve(self.freqs, self.values * factor, self.frame,
                              self.provenance, self.params_digest,
                              self.metadata)

    def to_frame(self):
        return pd.DataFrame({
            'freq_hz': self.freqs,
            're_ohm': self.values.real,
            'im_ohm': self.values.imag,
            'mag_ohm': self.magnitude,
            'phase_deg': self.phase_deg,
        }, columns=list(CSV_COLUMNS))

    def sidecar(self):
        return dict(
            provenance=self.provenance,
            params_digest=self.params_digest,
            frame=self.frame.value,
            columns=list(CSV_COLUMNS),
            metadata=self.metadata,
        )

    def to_csv(self, path):
        """Write the curve as CSV plus a JSON sidecar next to it.

        Returns
        -------
        tuple of pathlib.Path
            CSV and sidecar paths.
        """
        path = Path(path)
        self.to_frame().to_csv(path, index=False, lineterminator='\n')
        sidecar_path = path.with_suffix('.json')
        with open(sidecar_path, 'w') as f:
            json.dump(self.sidecar(), f, indent=2, sort_keys=True)
            f.write('\n')
        return path, sidecar_path

    @classmethod
    def from_csv(cls, path):
        """Read a curve from CSV, see :func:`ingest_measured_curve`."""
        return ingest_measured_curve(path)


def ingest_measured_curve(path):
    """Read an impedance curve from a CSV file.

    Required columns are ``freq_hz``, ``re_ohm`` and ``im_ohm``;
    magnitude and phase columns are recomputed if present. A JSON sidecar
    with the same stem, if any, supplies frame and metadata.

    Returns
    -------
    ImpedanceCurve
        With provenance ``"measured:<path>"``.

    Raises
    ------
    CurveFormatError
        On a malformed row, a non-finite value, or frequencies that are
        not strictly increasing. The error names the first offending line.
    """
    path = Path(path)
    try:
        table = pd.read_csv(path, dtype=str, keep_default_na=False,
                            skipinitialspace=True)
    except pd.errors.ParserError as err:
        raise CurveFormatError('malformed row ({})'.format(err), path=path)
    except pd.errors.EmptyDataError:
        raise CurveFormatError('empty file', path=path)
    missing = [c for c in CSV_COLUMNS[:3] if c not in table.columns]
    if missing:
        raise CurveFormatError('missing columns {}'.format(missing), line=1,
                               path=path)
    columns = {}
    for name in CSV_COLUMNS[:3]:
        numbers = pd.to_numeric(table[name], errors='coerce')
        bad = ~np.isfinite(numbers.to_numpy(dtype=float))
        if bad.any():
            row = int(np.argmax(bad))
            raise CurveFormatError(
                'non-finite or malformed {} value {!r}'.format(
                    name, table[name].iloc[row]), line=row + 2, path=path)
        columns[name] = numbers.to_numpy(dtype=float)
    # exact decimal round trip
    exact = pd.read_csv(path, usecols=list(CSV_COLUMNS[:3]),
                        float_precision='round_trip', skipinitialspace=True)
    freqs = exact['freq_hz'].to_numpy(dtype=float)
    steps = np.diff(freqs)
    if np.any(steps <= 0):
        row = int(np.argmax(steps <= 0)) + 1
        kind = 'duplicate' if steps[row - 1] == 0 else 'non-monotone'
        raise CurveFormatError('{} frequency {!r}'.format(kind, freqs[row]),
                               line=row + 2, path=path)
    values = exact['re_ohm'].to_numpy(dtype=float) + \
        1j * exact['im_ohm'].to_numpy(dtype=float)

    frame = Frame.POSITIVE_SEQ_STATIONARY
    metadata = {}
    params_digest = ''
    sidecar_path = path.with_suffix('.json')
    if sidecar_path.exists():
        with open(sidecar_path) as f:
            sidecar = json.load(f)
        frame = Frame(sidecar.get('frame', frame.value))
        metadata = dict(sidecar.get('metadata', {}))
        params_digest = sidecar.get('params_digest', '')
        metadata['source_provenance'] = sidecar.get('provenance', '')
    return ImpedanceCurve(freqs, values, frame,
                          provenance='measured:{}'.format(path),
                          params_digest=params_digest, metadata=metadata)


def frequency_grid(start, stop, step, exclude=None):
    """Uniform frequency grid including both ends.

    Parameters
    ----------
    start, stop, step : float
        Range in Hz; `stop` is included when it lies on the grid.
    exclude : float, optional
        Frequency removed from the grid if it is a grid point (typically
        :math:`f_N`).

    Returns
    -------
    numpy.ndarray
    """
    if step <= 0:
        raise ValueError('Grid step must be positive, got {}'.format(step))
    if stop < start:
        raise ValueError('Grid stop {} is below start {}'.format(stop, start))
    if start < 0:
        raise ValueError('Grid start must be non-negative, got {}'
                         .format(start))
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    grid = np.round(start + step * np.arange(count), 10)
    if exclude is not None:
        grid = grid[np.abs(grid - exclude) > 1e-6 * step]
    return grid


def parse_range(text):
    """Parse ``"start:stop:step"`` into a tuple of floats."""
    parts = text.split(':')
    if len(parts) != 3:
        raise ValueError('Frequency range must read start:stop:step, got {!r}'
                         .format(text))
    try:
        return tuple(float(x) for x in parts)
    except ValueError:
        raise ValueError('Frequency range must read start:stop:step, got {!r}'
                         .format(text))


def default_grid(f_N):
    return frequency_grid(*DEFAULT_GRID, exclude=f_N)


def negative_resistance_spans(curve):
    """Contiguous sample intervals where :math:`Re\\{Z\\} < 0`.

    Returns
    -------
    list of tuple
        ``(f_first, f_last)`` of each run of negative-resistance samples.
    """
    negative = curve.resistance < 0
    spans = []
    start = None
    for k, flag in enumerate(negative):
        if flag and start is None:
            start = k
        elif not flag and start is not None:
            spans.append((float(curve.freqs[start]),
                          float(curve.freqs[k - 1])))
            start = None
    if start is not None:
        spans.append((float(curve.freqs[start]), float(curve.freqs[-1])))
    return spans

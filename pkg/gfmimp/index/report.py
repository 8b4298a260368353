import json
import logging
from dataclasses import dataclass, field

from tabulate import tabulate

from ..models import Frame, Tier, negative_resistance_spans, sample_curve
from .compliance import compliance_check, overall_verdict
from .corners import (exclusion_bandwidth, find_corner_frequencies,
                      peak_characterize, MAX_GRID_STEP, PLATEAU_BRIDGE)

log = logging.getLogger(__name__)


@dataclass
class BandIndexReport:
    """Exclusion-bandwidth index of an impedance curve.

    All frequencies in Hz; ``Z_peak`` is a magnitude in Ohm.
    """
    f_a: float
    f_b: float
    f_N: float
    delta_f1: float
    delta_f2: float
    delta_f: float
    f_peak: float
    Z_peak: float
    method_notes: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    bands: object = None
    provenance: str = ''
    params_digest: str = ''
    negative_resistance: list = field(default_factory=list)

    @property
    def stationary_exclusion(self):
        """Band to leave out of a stationary-frame resistance check."""
        return self.f_N - self.delta_f, self.f_N + self.delta_f

    @property
    def rotating_exclusion(self):
        """Same band for an impedance expressed in the dq frame."""
        return 0., self.delta_f

    @property
    def compliance(self):
        if not self.verdicts:
            return None
        return overall_verdict(self.verdicts)

    def to_dict(self):
        out = dict(
            f_a=self.f_a, f_b=self.f_b, f_N=self.f_N,
            delta_f1=self.delta_f1, delta_f2=self.delta_f2,
            delta_f=self.delta_f, f_peak=self.f_peak, Z_peak=self.Z_peak,
            exclusion_stationary_hz=list(self.stationary_exclusion),
            exclusion_rotating_hz=list(self.rotating_exclusion),
            method_notes=self.method_notes,
            provenance=self.provenance,
            params_digest=self.params_digest,
            negative_resistance_hz=[list(s) for s in self.negative_resistance],
        )
        if self.bands is not None:
            out['bands'] = self.bands.as_dict()
            out['verdicts'] = [v.as_dict() for v in self.verdicts]
            out['compliance'] = self.compliance.value
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + '\n'

    def summary(self):
        """Plain-text summary of the index and any band verdicts."""
        rows = [
            ('f_a', '{:.2f} Hz'.format(self.f_a)),
            ('f_b', '{:.2f} Hz'.format(self.f_b)),
            ('delta_f1', '{:.2f} Hz'.format(self.delta_f1)),
            ('delta_f2', '{:.2f} Hz'.format(self.delta_f2)),
            ('delta_f', '{:.2f} Hz'.format(self.delta_f)),
            ('peak', '{:.4g} Ohm at {:.2f} Hz'.format(self.Z_peak,
                                                      self.f_peak)),
        ]
        text = [tabulate(rows, headers=('quantity', 'value'))]
        lo, hi = self.stationary_exclusion
        text.append('')
        text.append('Exclude {:.2f}-{:.2f} Hz from stationary-frame '
                    'resistance checks (0-{:.2f} Hz in the dq frame).'
                    .format(lo, hi, self.delta_f))
        if self.negative_resistance:
            text.append('Negative resistance over {}.'.format(', '.join(
                '{:.2f}-{:.2f} Hz'.format(*s)
                for s in self.negative_resistance)))
        if self.method_notes.get('fundamental_pole'):
            text.append('The model has a pole at f_N; the peak value '
                        'depends on the grid resolution.')
        if self.bands is not None:
            rows = [('{:g}-{:g} Hz'.format(*v.band), v.verdict.value,
                     '' if v.first_violation is None
                     else '{:.2f} Hz'.format(v.first_violation))
                    for v in self.verdicts]
            text.append('')
            text.append(tabulate(rows, headers=('band', 'verdict',
                                                'first violation')))
            text.append('{}: {}'.format(self.bands.name,
                                        self.compliance.value))
        return '\n'.join(text) + '\n'


def band_index_report(curve, f_N=None, bands=None, median_filter=False):
    """Run the exclusion-bandwidth procedure on a curve.

    Parameters
    ----------
    curve : ImpedanceCurve
    f_N : float, optional
        Taken from the curve metadata by default.
    bands : ComplianceBandSet, optional
        Also check these bands.
    median_filter : bool
        Median-prefilter the magnitude before corner detection.

    Returns
    -------
    BandIndexReport

    Raises
    ------
    NoCornerError
    ValueError
        If the curve is not a positive-sequence stationary-frame curve.
    """
    if curve.frame is not Frame.POSITIVE_SEQ_STATIONARY:
        raise ValueError('Corner detection needs a {} curve, got {}'.format(
            Frame.POSITIVE_SEQ_STATIONARY.value, curve.frame.value))
    if f_N is None:
        f_N = curve.f_N
    f_a, f_b = find_corner_frequencies(curve, f_N, median_filter)
    band = exclusion_bandwidth(f_a, f_b, f_N)
    f_peak, z_peak = peak_characterize(curve, f_a, f_b)
    steps = curve.freqs[1:] - curve.freqs[:-1]
    notes = dict(
        grid_step_hz=float(steps.min()),
        max_grid_step_hz=MAX_GRID_STEP,
        plateau_bridge=PLATEAU_BRIDGE,
        refinement='3-point parabola',
        median_filter=bool(median_filter),
        fundamental_pole=bool(curve.metadata.get('fundamental_pole', False)),
    )
    verdicts = compliance_check(curve, bands) if bands is not None else []
    log.debug('corners %.3f / %.3f Hz, delta_f %.3f Hz', f_a, f_b,
              band.delta_f)
    return BandIndexReport(
        f_a=band.f_a, f_b=band.f_b, f_N=band.f_N,
        delta_f1=band.delta_f1, delta_f2=band.delta_f2,
        delta_f=band.delta_f, f_peak=f_peak, Z_peak=z_peak,
        method_notes=notes, verdicts=verdicts, bands=bands,
        provenance=curve.provenance, params_digest=curve.params_digest,
        negative_resistance=negative_resistance_spans(curve))


def sensitivity(p, rel_step=0.1, tier=Tier.APCL_SIMPLIFIED, grid=None):
    """Change of the exclusion bandwidth per relative change of D_p and
    of J, by central differences on the analytic model.

    Returns
    -------
    dict
        ``delta_f`` at `p`, ``D_p`` and ``J`` (Hz per unit relative
        change) and ``more_sensitive`` naming the larger of the two.
    """
    def delta_f(params):
        curve = sample_curve(tier, params, grid=grid)
        f_a, f_b = find_corner_frequencies(curve, params.f_N)
        return exclusion_bandwidth(f_a, f_b, params.f_N).delta_f

    result = dict(delta_f=delta_f(p), rel_step=rel_step)
    for name in ('D_p', 'J'):
        value = getattr(p, name)
        up = delta_f(p.replace(**{name: value * (1 + rel_step)}))
        down = delta_f(p.replace(**{name: value * (1 - rel_step)}))
        result[name] = (up - down) / (2 * rel_step)
    result['more_sensitive'] = 'J' if abs(result['J']) > abs(result['D_p']) \
        else 'D_p'
    return result

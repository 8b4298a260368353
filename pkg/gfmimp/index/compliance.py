import enum
from dataclasses import dataclass, field

import numpy as np

# Gaps between samples wider than this many median steps count as
# unmeasured.
GAP_FACTOR = 1.5


class Verdict(enum.Enum):
    PASS = 'pass'
    FAIL = 'fail'
    UNTESTED = 'untested'


@dataclass
class BandVerdict:
    """Outcome of the resistance check in one required band.

    Verdicts use the samples only: a band passes when
    :math:`Re\\{Z_p\\} \\geq 0` at every sample inside it, and parts of the
    band without samples are listed as untested.
    """
    band: tuple
    verdict: Verdict
    n_samples: int = 0
    first_violation: float = None
    violations: list = field(default_factory=list)
    untested: list = field(default_factory=list)

    def as_dict(self):
        return dict(band=list(self.band), verdict=self.verdict.value,
                    n_samples=self.n_samples,
                    first_violation_hz=self.first_violation,
                    violations_hz=[list(v) for v in self.violations],
                    untested_hz=[list(u) for u in self.untested])


def _runs(freqs, flags):
    runs, start = [], None
    for k, flag in enumerate(flags):
        if flag and start is None:
            start = k
        elif not flag and start is not None:
            runs.append((float(freqs[start]), float(freqs[k - 1])))
            start = None
    if start is not None:
        runs.append((float(freqs[start]), float(freqs[-1])))
    return runs


def _uncovered(freqs, lo, hi):
    """Parts of ``[lo, hi]`` the samples `freqs` (inside the band) do not
    cover."""
    if not len(freqs):
        return [(lo, hi)]
    spans = []
    if freqs[0] > lo:
        spans.append((lo, float(freqs[0])))
    if len(freqs) > 2:
        steps = np.diff(freqs)
        limit = GAP_FACTOR * np.median(steps)
        for k in np.flatnonzero(steps > limit):
            spans.append((float(freqs[k]), float(freqs[k + 1])))
    if freqs[-1] < hi:
        spans.append((float(freqs[-1]), hi))
    return spans


def compliance_check(curve, bands):
    """Check non-negative resistance over each required band.

    Parameters
    ----------
    curve : ImpedanceCurve
    bands : ComplianceBandSet

    Returns
    -------
    list of BandVerdict
        One per required band, in order.
    """
    freqs = curve.freqs
    resistance = curve.resistance
    verdicts = []
    for lo, hi in bands.required_bands:
        inside = (freqs >= lo) & (freqs <= hi)
        band_f = freqs[inside]
        negative = resistance[inside] < 0
        untested = _uncovered(band_f, lo, hi)
        if not len(band_f):
            verdict = BandVerdict((lo, hi), Verdict.UNTESTED,
                                  untested=untested)
        elif negative.any():
            verdict = BandVerdict(
                (lo, hi), Verdict.FAIL, n_samples=len(band_f),
                first_violation=float(band_f[np.argmax(negative)]),
                violations=_runs(band_f, negative), untested=untested)
        else:
            verdict = BandVerdict((lo, hi), Verdict.PASS,
                                  n_samples=len(band_f), untested=untested)
        verdicts.append(verdict)
    return verdicts


def overall_verdict(verdicts):
    """``FAIL`` if any band fails, ``PASS`` if at least one band was
    tested and none failed, ``UNTESTED`` otherwise."""
    outcomes = {v.verdict for v in verdicts}
    if Verdict.FAIL in outcomes:
        return Verdict.FAIL
    if Verdict.PASS in outcomes:
        return Verdict.PASS
    return Verdict.UNTESTED

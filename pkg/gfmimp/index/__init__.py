from .corners import (ExclusionBand, NoCornerError, find_corner_frequencies,
                      exclusion_bandwidth, peak_characterize)
from .library import (ComplianceBandSet, preset, preset_names, bands_around,
                      load_band_set)
from .compliance import (BandVerdict, Verdict, compliance_check,
                         overall_verdict)
from .report import BandIndexReport, band_index_report, sensitivity

__all__ = [
    'BandIndexReport',
    'BandVerdict',
    'ComplianceBandSet',
    'ExclusionBand',
    'NoCornerError',
    'Verdict',
    'find_corner_frequencies',
    'exclusion_bandwidth',
    'peak_characterize',
    'compliance_check',
    'overall_verdict',
    'preset',
    'preset_names',
    'bands_around',
    'load_band_set',
    'band_index_report',
    'sensitivity',
]

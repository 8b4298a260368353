from .curves import (ImpedanceCurve, Frame, CurveFormatError,
                     ingest_measured_curve, frequency_grid, parse_range,
                     default_grid, negative_resistance_spans)
from .tiers import (Tier, ModelTier, ImpedanceModel, AnalyticModel,
                    ccl_impedance, vcl_impedance, assembled_vcl_impedance,
                    voltage_loop_transfer, apcl_gain, apcl_simplified_matrix,
                    dq_to_positive_sequence, shifted_s, build_model,
                    sample_curve, ssop_ablation, AMPLITUDE_POWER_SCALE,
                    NAMEPLATE_POWER_SCALE)
from .numeric import NumericModel, full_impedance_numeric

__all__ = [
    'AMPLITUDE_POWER_SCALE',
    'NAMEPLATE_POWER_SCALE',
    'ImpedanceCurve',
    'Frame',
    'CurveFormatError',
    'Tier',
    'ModelTier',
    'ImpedanceModel',
    'AnalyticModel',
    'NumericModel',
    'ingest_measured_curve',
    'frequency_grid',
    'parse_range',
    'default_grid',
    'negative_resistance_spans',
    'ccl_impedance',
    'vcl_impedance',
    'assembled_vcl_impedance',
    'voltage_loop_transfer',
    'apcl_gain',
    'apcl_simplified_matrix',
    'dq_to_positive_sequence',
    'shifted_s',
    'build_model',
    'sample_curve',
    'ssop_ablation',
    'full_impedance_numeric',
]

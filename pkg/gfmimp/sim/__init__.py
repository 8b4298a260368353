from .averaged import (AveragedModel, AveragedModelState, ControlReferences,
                       ControlStack, Simulator, SimulationDiverged,
                       SteadyStateError, step_model)
from .integrate import rk4_step
from .scan import (ScanConfig, ScanResult, NonlinearContaminationWarning,
                   PartialCurveWarning, run_scan, scan_sweep, resolve_workers)
from .demo import (DampingEvent, DemoReport, run_instability_demo,
                   amplitude_spectrum, parse_schedule, schedule_from_pu,
                   DEMO_POWER_PU)

__all__ = [
    'DEMO_POWER_PU',
    'AveragedModel',
    'AveragedModelState',
    'ControlReferences',
    'ControlStack',
    'Simulator',
    'ScanConfig',
    'ScanResult',
    'DampingEvent',
    'DemoReport',
    'SimulationDiverged',
    'SteadyStateError',
    'NonlinearContaminationWarning',
    'PartialCurveWarning',
    'step_model',
    'rk4_step',
    'run_scan',
    'scan_sweep',
    'resolve_workers',
    'run_instability_demo',
    'amplitude_spectrum',
    'parse_schedule',
    'schedule_from_pu',
]

import cmath
import logging
import math
import multiprocessing
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..models.curves import Frame, ImpedanceCurve
from .averaged import (AveragedModel, ControlStack, Simulator, DEFAULT_DT,
                       MAX_DT, SimulationDiverged, SteadyStateError)

log = logging.getLogger(__name__)

MAX_AMPLITUDE = 0.05
CONTAMINATION_LIMIT = 0.1
WORKERS_ENV = 'GFMIMP_WORKERS'


class NonlinearContaminationWarning(UserWarning):
    pass


class PartialCurveWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ScanConfig:
    """Settings of a single-frequency perturbation scan.

    Parameters
    ----------
    f_pert : float
        Perturbation frequency, Hz (stationary frame).
    amplitude : float
        Perturbation amplitude as a fraction of :math:`V_N`, in
        (0, 0.05].
    settle_time : float
        Time between switching the perturbation on and the start of the
        capture window, s.
    capture_periods : int
        Minimum capture length in perturbation periods.
    dt : float
        Largest integration step, s; the step actually used divides the
        capture window.
    mirror : bool
        Also inject at the mirror frequency :math:`2 f_N - f` and solve
        the two-by-two relation between the two frequencies. Its first
        entry is the impedance of the converter alone, independent of
        the grid. Off by default: a single injection gives the terminal
        ratio :math:`V/(-I)` only.
    """
    f_pert: float
    amplitude: float = 0.01
    settle_time: float = 2.
    capture_periods: int = 20
    dt: float = DEFAULT_DT
    mirror: bool = False

    def __post_init__(self):
        if not self.f_pert > 0:
            raise ValueError('Perturbation frequency must be positive, got {}'
                             .format(self.f_pert))
        if not 0 < self.amplitude <= MAX_AMPLITUDE:
            raise ValueError('Perturbation amplitude must be in (0, {}], got '
                             '{}'.format(MAX_AMPLITUDE, self.amplitude))
        if not 0 < self.dt <= MAX_DT:
            raise ValueError('Integration step must be in (0, {}] s, got {}'
                             .format(MAX_DT, self.dt))
        if self.capture_periods < 1:
            raise ValueError('capture_periods must be at least 1, got {}'
                             .format(self.capture_periods))
        if self.settle_time < 0:
            raise ValueError('settle_time must be non-negative, got {}'
                             .format(self.settle_time))

    def capture_window(self, f_N):
        """Capture window and the integration step that divides it.

        The measurement runs in the grid-synchronous frame, where the
        perturbation appears at the slip frequency :math:`f - f_N`. The
        window is the shortest whole number of slip periods lasting at
        least ``capture_periods / f_pert``.

        Returns
        -------
        n_steps : int
        dt : float
        duration : float
        """
        slip = abs(self.f_pert - f_N)
        if slip < 1e-9:
            raise ValueError('A perturbation at the fundamental frequency '
                             '{} Hz cannot be separated'.format(f_N))
        n_slip = math.ceil(self.capture_periods / self.f_pert * slip - 1e-9)
        duration = max(n_slip, 1) / slip
        n_steps = math.ceil(duration / self.dt - 1e-9)
        return n_steps, duration / n_steps, duration


@dataclass(frozen=True)
class ScanResult:
    """Outcome of a perturbation scan at one frequency.

    ``V_phasor`` and ``I_phasor`` are the deviations at ``f_pert`` under
    the injection at ``f_pert``; the ``*_coupled`` phasors belong to the
    mirror frequency :math:`2 f_N - f` under the same injection. Current
    counts positive out of the converter.

    ``Z_p`` is always the terminal ratio ``V_phasor / (-I_phasor)`` of the
    injection at ``f_pert``. With the mirror injection, ``Z_mirror`` holds
    the two-by-two matrix between both frequencies and ``Z_pp`` its first
    entry, the positive-sequence impedance of the converter alone.
    """
    f_pert: float
    Z_p: complex
    V_phasor: complex
    I_phasor: complex
    thd_residual: float
    V_coupled: complex = 0j
    I_coupled: complex = 0j
    Z_mirror: tuple = None
    Z_pp: complex = None
    dt: float = DEFAULT_DT
    window: float = 0.
    warnings: tuple = ()

    @property
    def impedance(self):
        """``Z_pp`` when measured, ``Z_p`` otherwise."""
        return self.Z_p if self.Z_pp is None else self.Z_pp


class PerturbedSource:
    """Grid source with a positive-sequence series perturbation.

    In the synchronous frame the perturbation is a phasor rotating at the
    slip frequency, switched on at `t_on`.
    """

    def __init__(self, V_grid, amplitude, slip_omega, t_on=0.):
        self.V_grid = V_grid
        self.amplitude = amplitude
        self.slip_omega = slip_omega
        self.t_on = t_on

    def __call__(self, t):
        if t < self.t_on:
            return self.V_grid
        return self.V_grid + self.amplitude * cmath.exp(
            1j * self.slip_omega * (t - self.t_on))


def _residual(energy, n, *phasors):
    """Share of the deviation energy left unexplained by `phasors`."""
    if energy == 0:
        return 0.
    explained = n * sum(abs(x) ** 2 for x in phasors)
    return max(0., 1. - explained / energy)


def _inject(p, g, op, cfg, stack, slip_omega, n_capture, dt):
    """One injection at `slip_omega` in the synchronous frame.

    Returns the deviation phasors at ``+slip_omega`` and ``-slip_omega``
    of the PCC voltage and of the current, and the unexplained share.
    """
    model, state = AveragedModel.at_operating_point(p, g, op, stack)
    sim = Simulator(model, state, dt)
    sim.settle()
    t_on = sim.t
    sim.source = PerturbedSource(g.V_grid, cfg.amplitude * p.V_N,
                                 slip_omega, t_on)
    sim.advance(int(math.ceil(cfg.settle_time / dt - 1e-9)))

    align = cmath.exp(-1j * op.theta_0)
    v_0 = op.v_pcc
    i_0 = op.i_out
    omega = abs(slip_omega)
    sums = np.zeros(6, dtype=complex)
    energy_v = energy_i = 0.
    for _ in range(n_capture):
        v, i, _, _, _ = sim.measure()
        dv = v * align - v_0
        di = i * align - i_0
        kernel = cmath.exp(-1j * omega * (sim.t - t_on))
        sums += (dv * kernel, di * kernel,
                 dv * kernel.conjugate(), di * kernel.conjugate(), dv, di)
        energy_v += abs(dv) ** 2
        energy_i += abs(di) ** 2
        sim.step()
    V_up, I_up, V_down, I_down, V_dc, I_dc = sums / n_capture
    residual = max(_residual(energy_v, n_capture, V_up, V_down, V_dc),
                   _residual(energy_i, n_capture, I_up, I_down, I_dc))
    return V_up, I_up, V_down, I_down, residual


def run_scan(p, g, op, cfg, stack=ControlStack.FULL):
    """Measure the positive-sequence impedance at one frequency.

    The model starts at the equilibrium of `op` and is settled, then a
    series voltage perturbation at ``cfg.f_pert`` is added to the grid
    source. After ``cfg.settle_time`` the deviations of PCC voltage and
    converter current from `op` are projected onto the perturbation
    and onto its mirror over the capture window (frame aligned with the
    steady PCC voltage).

    With ``cfg.mirror`` a second run injects at :math:`2 f_N - f` and the
    two runs give the matrix

    .. math::

        \\begin{pmatrix} V_f \\\\ \\bar V_m \\end{pmatrix} =
        -Z \\begin{pmatrix} I_f \\\\ \\bar I_m \\end{pmatrix},

    whose first entry is the positive-sequence impedance of the
    converter alone. A single injection through a grid impedance mixes
    in the mirror-frequency response whenever the converter couples the
    two frequencies.

    Parameters
    ----------
    p : ConverterParams
    g : GridParams
    op : OperatingPoint
    cfg : ScanConfig
    stack : ControlStack

    Returns
    -------
    ScanResult

    Raises
    ------
    SimulationDiverged, SteadyStateError
    """
    f_N = p.f_N
    n_capture, dt, duration = cfg.capture_window(f_N)
    slip_omega = 2 * math.pi * (cfg.f_pert - f_N)
    above = slip_omega > 0

    V_up, I_up, V_down, I_down, thd = _inject(p, g, op, cfg, stack,
                                              slip_omega, n_capture, dt)
    if above:
        V_p, I_p, V_c, I_c = V_up, I_up, V_down, I_down
    else:
        V_p, I_p, V_c, I_c = V_down, I_down, V_up, I_up

    z_p = V_p / -I_p
    z_mirror = z_pp = None
    if cfg.mirror:
        V_up2, I_up2, V_down2, I_down2, thd2 = _inject(
            p, g, op, cfg, stack, -slip_omega, n_capture, dt)
        thd = max(thd, thd2)
        if above:
            V_p2, I_p2, V_c2, I_c2 = V_up2, I_up2, V_down2, I_down2
        else:
            V_p2, I_p2, V_c2, I_c2 = V_down2, I_down2, V_up2, I_up2
        v_mat = np.array([[V_p, V_p2], [np.conj(V_c), np.conj(V_c2)]])
        i_mat = np.array([[I_p, I_p2], [np.conj(I_c), np.conj(I_c2)]])
        try:
            z = -v_mat @ np.linalg.inv(i_mat)
        except np.linalg.LinAlgError:
            raise ZeroDivisionError('mirror-frequency currents at {} Hz are '
                                    'linearly dependent'.format(cfg.f_pert))
        z_mirror = tuple(complex(x) for x in z.ravel())
        z_pp = z_mirror[0]

    flags = ()
    if thd > CONTAMINATION_LIMIT:
        flags = ('nonlinear contamination',)
        warnings.warn('nonlinear contamination at {} Hz: residual {:.3f}'
                      .format(cfg.f_pert, thd), NonlinearContaminationWarning)
    return ScanResult(f_pert=cfg.f_pert, Z_p=complex(z_p), V_phasor=V_p,
                      I_phasor=I_p, thd_residual=thd, V_coupled=V_c,
                      I_coupled=I_c, Z_mirror=z_mirror, Z_pp=z_pp, dt=dt,
                      window=duration, warnings=flags)


def resolve_workers(workers=None, tasks=None):
    """Size of the worker pool, capped by ``GFMIMP_WORKERS``."""
    cap = os.environ.get(WORKERS_ENV)
    if cap is not None:
        try:
            cap = int(cap)
        except ValueError:
            raise ValueError('{} must be an integer, got {!r}'
                             .format(WORKERS_ENV, cap))
        if cap < 1:
            raise ValueError('{} must be positive, got {}'
                             .format(WORKERS_ENV, cap))
    if workers is None:
        workers = cap or os.cpu_count() or 1
    elif cap is not None:
        workers = min(workers, cap)
    if tasks is not None:
        workers = min(workers, max(tasks, 1))
    return max(int(workers), 1)


def _scan_point(p, g, op, cfg, stack):
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', NonlinearContaminationWarning)
        try:
            return run_scan(p, g, op, cfg, stack), None
        except (SimulationDiverged, SteadyStateError, ValueError,
                ZeroDivisionError) as err:
            return None, str(err)


def scan_sweep(p, g, op, freqs, cfg=None, stack=ControlStack.FULL,
               workers=None):
    """Scan a list of frequencies into an impedance curve.

    Each frequency runs in its own simulator; with more than one worker
    the points are spread over a process pool.

    Parameters
    ----------
    p, g, op :
        As for :func:`run_scan`.
    freqs : array_like of float
        Strictly increasing frequencies, Hz.
    cfg : ScanConfig, optional
        Template whose ``f_pert`` is replaced per point.
    stack : ControlStack
    workers : int, optional
        Pool size, by default ``GFMIMP_WORKERS`` or the number of cores.

    Returns
    -------
    ImpedanceCurve
        Provenance ``"scan"``, values :attr:`ScanResult.impedance`. Points
        that failed are left out and listed in ``metadata['failed']``;
        the curve is then marked partial.
    """
    freqs = [float(f) for f in freqs]
    if cfg is None:
        cfg = ScanConfig(f_pert=freqs[0])
    configs = [replace(cfg, f_pert=f) for f in freqs]
    workers = resolve_workers(workers, len(freqs))
    args = [(p, g, op, c, stack) for c in configs]
    if workers == 1:
        outcomes = [_scan_point(*a) for a in args]
    else:
        log.info('scanning %d frequencies on %d workers', len(freqs),
                 workers)
        context = multiprocessing.get_context('spawn')
        with ProcessPoolExecutor(max_workers=workers,
                                 mp_context=context) as pool:
            outcomes = list(pool.map(_scan_point, *zip(*args)))

    kept, values, residuals, failed, contaminated = [], [], [], {}, []
    for f, (result, error) in zip(freqs, outcomes):
        if error is not None:
            failed[repr(f)] = error
            continue
        kept.append(f)
        values.append(result.impedance)
        residuals.append(result.thd_residual)
        if result.warnings:
            contaminated.append(f)
    if contaminated:
        warnings.warn('nonlinear contamination at {} Hz'.format(contaminated),
                      NonlinearContaminationWarning)
    if failed:
        warnings.warn('partial curve: {} of {} points failed'
                      .format(len(failed), len(freqs)), PartialCurveWarning)
    metadata = dict(
        f_N=p.f_N,
        stack=ControlStack(stack).name,
        amplitude=cfg.amplitude,
        settle_time=cfg.settle_time,
        capture_periods=cfg.capture_periods,
        mirror=cfg.mirror,
        quantity='converter' if cfg.mirror else 'terminal ratio',
        dt=cfg.dt,
        thd_residual=residuals,
        contaminated=contaminated,
        failed=failed,
        partial=bool(failed),
        operating_point=dict(V_d0=op.V_d0, I_d0=op.I_d0, I_q0=op.I_q0,
                             P_0=op.P_0, Q_0=op.Q_0, theta_0=op.theta_0),
    )
    return ImpedanceCurve(kept, values, Frame.POSITIVE_SEQ_STATIONARY,
                          provenance='scan',
                          params_digest=p.digest(g.as_dict(),
                                                 metadata['operating_point'],
                                                 metadata['stack']),
                          metadata=metadata)

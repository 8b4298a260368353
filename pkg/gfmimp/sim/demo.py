import cmath
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import fft, signal

from ..converter import (make_grid, per_unit_bases, solve_operating_point,
                         DEMO_SCR, DEMO_RATIO_RX)
from .averaged import AveragedModel, ControlStack, Simulator, \
    SimulationDiverged

log = logging.getLogger(__name__)

# (time s, D_p in p.u.)
DEFAULT_SCHEDULE_PU = ((1.0, 2.5), (4.0, 50.))
# Active power dispatched on the weak demo grid, p.u. of S_N.
DEMO_POWER_PU = 0.7
# Shortest analysis window that gets spectra, fundamental periods.
MIN_WINDOW_PERIODS = 2
DEMO_DT = 5e-5
SAMPLE_RATE = 2000.
# Grid phase step applied at every damping change, rad.
PHASE_KICK = 0.05
# Time skipped after an event before spectra and envelopes are taken, s.
SETTLE_SKIP = 0.5
DETECTION_LEVEL = 0.01
QUIET_LEVEL_DB = -60.
PAIR_TOLERANCE = 0.5
# Oscillation frequencies seen on a hardware test bench for a comparable
# damping step.
BENCH_REFERENCE_HZ = dict(power=11.3, sub=38.7, super=61.3)

TIMESERIES_COLUMNS = ('t_s', 'p_w', 'q_var', 'vd_v', 'vq_v', 'id_a', 'iq_a',
                      'omega_rads')
SPECTRUM_COLUMNS = ('freq_hz', 'mag', 'phase_deg')


@dataclass(frozen=True)
class DampingEvent:
    t: float
    D_p: float


def schedule_from_pu(p, pairs):
    """Damping events from ``(time, D_p in p.u.)`` pairs."""
    base = per_unit_bases(p).D_base
    return [DampingEvent(float(t), float(d) * base) for t, d in pairs]


def parse_schedule(text, p):
    """Parse ``"1.0:2.5,4.0:50"`` (time s : D_p p.u.) into events."""
    pairs = []
    for item in text.split(','):
        item = item.strip()
        if not item:
            continue
        try:
            t, d = item.split(':')
            pairs.append((float(t), float(d)))
        except ValueError:
            raise ValueError('Schedule entries must read time:D_p_pu, got {!r}'
                             .format(item))
    return schedule_from_pu(p, pairs)


class PhaseKickSource:
    """Grid source whose phase steps by a fixed angle at given times."""

    def __init__(self, V_grid, times, kick):
        self.V_grid = V_grid
        self.times = tuple(times)
        self.kick = kick

    def __call__(self, t):
        steps = sum(1 for t_k in self.times if t >= t_k)
        if steps == 0:
            return self.V_grid
        return self.V_grid * cmath.exp(1j * self.kick * steps)


@dataclass
class DemoReport:
    """Waveforms, spectra and findings of a damping-step run."""
    timeseries: pd.DataFrame
    spectra: dict
    findings: dict
    phase_a: pd.DataFrame = field(repr=False, default=None)


def amplitude_spectrum(x, fs):
    """Single-sided Hann-windowed amplitude spectrum of a real signal.

    Returns
    -------
    pandas.DataFrame
        Columns ``freq_hz``, ``mag`` (amplitude of a sinusoid on a bin)
        and ``phase_deg``.
    """
    x = np.asarray(x, dtype=float)
    window = signal.get_window('hann', len(x), fftbins=True)
    spectrum = fft.rfft(x * window) * 2 / np.sum(window)
    return pd.DataFrame({
        'freq_hz': fft.rfftfreq(len(x), 1 / fs),
        'mag': np.abs(spectrum),
        'phase_deg': np.degrees(np.angle(spectrum)),
    }, columns=list(SPECTRUM_COLUMNS))


def _refined_peak(spectrum, lo, hi):
    """Largest local maximum of ``mag`` inside (lo, hi), refined by a
    three-point parabola. Returns ``(freq, mag)`` or ``(None, 0.)``."""
    freqs = spectrum['freq_hz'].to_numpy()
    mags = spectrum['mag'].to_numpy()
    peaks, _ = signal.find_peaks(mags)
    peaks = [k for k in peaks if lo < freqs[k] < hi]
    if not peaks:
        return None, 0.
    k = max(peaks, key=lambda k: mags[k])
    y0, y1, y2 = mags[k - 1], mags[k], mags[k + 1]
    denom = y0 - 2 * y1 + y2
    offset = 0.5 * (y0 - y2) / denom if denom != 0 else 0.
    step = freqs[1] - freqs[0]
    return float(freqs[k] + offset * step), float(y1)


def _window(frame, t_start, t_stop, f_N, fs):
    """Rows of `frame` in a window of whole fundamental periods."""
    period = 1. / f_N
    length = math.floor((t_stop - t_start) / period + 1e-9) * period
    n = max(int(round(length * fs)), 0)
    first = int(np.searchsorted(frame['t_s'].to_numpy(), t_start - 0.5 / fs))
    return frame.iloc[first:first + n]


def run_instability_demo(p, g=None, schedule=None, t_end=None, dt=DEMO_DT,
                         stack=ControlStack.FULL, sample_rate=SAMPLE_RATE,
                         kick=PHASE_KICK, power=None):
    """Simulate damping steps of the active power loop and analyse the
    resulting oscillation.

    Parameters
    ----------
    p : ConverterParams
    g : GridParams, optional
        Weak grid (SCR 2, R/X 0.05) by default.
    schedule : sequence of DampingEvent, optional
        Strictly increasing event times. By default the damping drops
        from its initial value to 2.5 p.u. at 1 s and returns to 50 p.u.
        at 4 s. An empty schedule runs an undisturbed steady state.
    t_end : float, optional
        End of the run, 2 s after the last event by default (3 s without
        events).
    dt : float
        Integration step, s.
    stack : ControlStack
    sample_rate : float
        Rate of the recorded waveforms, Hz.
    kick : float
        Grid phase step at every event, rad.
    power : float, optional
        Active power reference during the run, W; 0.7 p.u. by default.

    Returns
    -------
    DemoReport
        A diverging run is reported in ``findings['diverged']``, not
        raised. When it diverges before the analysis window there are no
        spectra.
    """
    if g is None:
        g = make_grid(p, SCR=DEMO_SCR, ratio_RX=DEMO_RATIO_RX)
    if schedule is None:
        schedule = schedule_from_pu(p, DEFAULT_SCHEDULE_PU)
    schedule = list(schedule)
    times = [e.t for e in schedule]
    if any(t <= 0 for t in times) or \
            any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError('Schedule times must be positive and strictly '
                         'increasing, got {}'.format(times))
    if t_end is None:
        t_end = times[-1] + 2. if times else 3.
    if times and t_end <= times[-1]:
        raise ValueError('t_end {} must follow the last event at {}'
                         .format(t_end, times[-1]))

    if power is None:
        power = DEMO_POWER_PU * p.S_N
    p = p.replace(P_ref=float(power))
    f_N = p.f_N
    op = solve_operating_point(p, g, p.P_ref, p.Q_ref)
    current_pu = abs(op.i_out) / p.I_N
    if current_pu > 1.:
        log.warning('demo operating point draws %.2f p.u. current',
                    current_pu)
    model, state = AveragedModel.at_operating_point(p, g, op, stack)
    sim = Simulator(model, state, dt,
                    source=PhaseKickSource(g.V_grid, times, kick))
    decimation = max(1, int(round(1. / (sample_rate * dt))))
    fs = 1. / (decimation * dt)
    event_steps = [int(round(t / dt)) for t in times]
    n_total = int(round(t_end / dt))
    align = cmath.exp(-1j * op.theta_0)

    rows, phase_a = [], []
    diverged_at = None
    pending = list(zip(event_steps, schedule))
    try:
        for n in range(n_total + 1):
            while pending and pending[0][0] == n:
                _, event = pending.pop(0)
                log.info('t = %.3f s: D_p -> %.1f', event.t, event.D_p)
                sim.model = sim.model.with_damping(event.D_p)
            if n % decimation == 0:
                v, i, P, Q, omega = sim.measure()
                t = sim.t
                rows.append((t, P, Q, (v * align).real, (v * align).imag,
                             (i * align).real, (i * align).imag, omega))
                rotation = cmath.exp(1j * p.omega_N * t)
                phase_a.append((t, (v * rotation).real, (i * rotation).real))
            if n < n_total:
                sim.step()
    except SimulationDiverged as err:
        diverged_at = err.t
        log.warning('%s', err)

    timeseries = pd.DataFrame(rows, columns=list(TIMESERIES_COLUMNS))
    phase_a = pd.DataFrame(phase_a, columns=['t_s', 'v_a', 'i_a'])
    t_last = timeseries['t_s'].iloc[-1]

    # analysis window: first event (or the whole undisturbed run)
    if times:
        t_start = times[0] + SETTLE_SKIP
        t_stop = min(times[1] if len(times) > 1 else t_end, t_last)
    else:
        t_start = min(SETTLE_SKIP, t_end / 2)
        t_stop = t_last
    window = _window(phase_a, t_start, t_stop, f_N, fs)
    if len(window) < MIN_WINDOW_PERIODS * fs / f_N:
        log.warning('no spectra: analysis window %.3f-%.3f s holds %d '
                    'samples', t_start, t_stop, len(window))
        spectra = {}
        findings = _truncated_findings(diverged_at, t_start, t_stop, f_N)
    else:
        p_w = _window(timeseries, t_start, t_stop, f_N, fs)['p_w']
        spectra = dict(
            p=amplitude_spectrum(p_w - p_w.mean(), fs),
            v_a=amplitude_spectrum(window['v_a'], fs),
            i_a=amplitude_spectrum(window['i_a'], fs),
        )
        findings = _findings(p, spectra, timeseries, schedule, f_N, fs,
                             diverged_at, t_start, t_stop)
    findings['operating_point'] = dict(
        P_w=op.P_0, Q_var=op.Q_0, V_pu=op.V_d0 / p.V_N, I_pu=current_pu)
    return DemoReport(timeseries=timeseries, spectra=spectra,
                      findings=findings, phase_a=phase_a)


def _findings(p, spectra, timeseries, schedule, f_N, fs, diverged_at,
              t_start, t_stop):
    resolution = float(spectra['i_a']['freq_hz'].iloc[1])
    guard = 2.5 * resolution

    f_power, a_power = _refined_peak(spectra['p'], 0.2, f_N)
    current = spectra['i_a']
    fundamental = float(current['mag'].iloc[
        int(np.argmin(np.abs(current['freq_hz'] - f_N)))])
    f_sub, a_sub = _refined_peak(current, 1., f_N - guard)
    f_super, a_super = _refined_peak(current, f_N + guard, 2 * f_N - 1.)

    off_fundamental = current[np.abs(current['freq_hz'] - f_N) > guard]
    worst = float(off_fundamental['mag'].max()) if len(off_fundamental) \
        else 0.
    spur_db = 20 * math.log10(worst / fundamental) if worst > 0 else -np.inf

    detected = a_power > DETECTION_LEVEL * p.S_N and f_sub is not None \
        and f_super is not None
    findings = dict(
        analysis_window_s=[float(t_start), float(t_stop)],
        resolution_hz=resolution,
        oscillation_detected=bool(detected),
        power_oscillation_hz=f_power,
        power_oscillation_w=a_power,
        sub_synchronous_hz=f_sub,
        super_synchronous_hz=f_super,
        sub_level_db=_db(a_sub, fundamental),
        super_level_db=_db(a_super, fundamental),
        largest_spur_db=spur_db,
        quiet=bool(spur_db < QUIET_LEVEL_DB),
        diverged=diverged_at is not None,
        t_diverged=diverged_at,
        bench_reference_hz=BENCH_REFERENCE_HZ,
    )
    if f_sub is not None and f_super is not None:
        error = abs(f_sub + f_super - 2 * f_N)
        findings['pair_error_hz'] = error
        findings['coupled_pair'] = bool(error < PAIR_TOLERANCE)
    findings['growth_rate_per_s'] = _growth_rate(timeseries, t_start, t_stop)
    findings.update(_recovery(p, timeseries, schedule, diverged_at))
    return findings


def _truncated_findings(diverged_at, t_start, t_stop, f_N):
    return dict(
        analysis_window_s=[float(t_start), float(t_stop)],
        resolution_hz=None,
        oscillation_detected=False,
        diverged=diverged_at is not None,
        t_diverged=diverged_at,
        diverged_before_window=diverged_at is not None and
        diverged_at < t_start + MIN_WINDOW_PERIODS / f_N,
        recovered=False if diverged_at is not None else None,
        recovery_rms_w=[],
        bench_reference_hz=BENCH_REFERENCE_HZ,
    )


def _db(amplitude, reference):
    if amplitude <= 0 or reference <= 0:
        return None
    return 20 * math.log10(amplitude / reference)


def _growth_rate(timeseries, t_start, t_stop):
    """Exponential rate of the active power oscillation envelope, from
    the rms of the first and last thirds of the window."""
    span = (t_stop - t_start) / 3
    if span <= 0:
        return None
    t = timeseries['t_s']
    power = timeseries['p_w']

    def rms(a, b):
        chunk = power[(t >= a) & (t < b)]
        return float(np.sqrt(np.mean((chunk - chunk.mean()) ** 2)))

    first = rms(t_start, t_start + span)
    last = rms(t_stop - span, t_stop)
    if first == 0 or last == 0:
        return None
    return math.log(last / first) / (2 * span)


def _recovery(p, timeseries, schedule, diverged_at, blocks=5, length=1.):
    """Active power deviation over consecutive blocks after the damping
    is restored; recovered when it does not increase from block to
    block."""
    restore = next((e for e in reversed(schedule) if e.D_p >= p.D_p), None)
    if restore is None or len(schedule) < 2:
        return dict(recovered=None, recovery_rms_w=[])
    if diverged_at is not None:
        return dict(recovered=False, recovery_rms_w=[])
    t = timeseries['t_s']
    deviation = timeseries['p_w'] - p.P_ref
    edges = restore.t + np.linspace(0., length, blocks + 1)
    values = []
    for a, b in zip(edges[:-1], edges[1:]):
        chunk = deviation[(t >= a) & (t < b)]
        values.append(float(np.sqrt(np.mean(chunk ** 2))))
    recovered = all(b <= a for a, b in zip(values, values[1:]))
    return dict(recovered=recovered, recovery_rms_w=values)

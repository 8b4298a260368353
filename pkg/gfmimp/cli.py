"""Command-line front end: ``gfmimp <curve|index|sweep|scan|check|demo>``.

Every run writes its outputs and a ``manifest.json`` echoing the fully
resolved configuration into the output directory. Exit codes: 0 success,
2 configuration error, 3 model error, 4 no corner detected, 5 compliance
failure.
"""
import argparse
import datetime
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import scipy.linalg
from pytools import product
from tabulate import tabulate

from ._version import __version__
from .converter import (ConverterParams, GridParams, InfeasibleOperatingPoint,
                        load_params_file, make_grid, per_unit_bases,
                        solve_operating_point, DEMO_SCR, DEMO_RATIO_RX)
from .index import (NoCornerError, Verdict, band_index_report,
                    compliance_check, load_band_set, overall_verdict, preset,
                    sensitivity)
from .models import (ModelTier, Tier, frequency_grid, ingest_measured_curve,
                     parse_range, sample_curve, NAMEPLATE_POWER_SCALE)
from .sim import (ControlStack, ScanConfig, SimulationDiverged,
                  SteadyStateError, parse_schedule, run_instability_demo,
                  scan_sweep, DEMO_POWER_PU)
from .tf import PoleError

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MODEL = 3
EXIT_NO_CORNER = 4
EXIT_NONCOMPLIANT = 5

DEFAULT_GRID = '1:100:0.1'
DEFAULT_SCAN_FREQS = '30:70:0.5'
DEFAULT_SCHEDULE = '1.0:2.5,4.0:50'
DEFAULT_DP_VALUES = (10., 20., 30., 40., 50.)
DEFAULT_J_VALUES = (1., 2., 4., 8.)
DEFAULT_PF_VALUES = (1., 0.95, 0.9)
MANIFEST = 'manifest.json'

MODEL_ERRORS = (PoleError, InfeasibleOperatingPoint, SteadyStateError,
                SimulationDiverged, scipy.linalg.LinAlgError)
CONFIG_ERRORS = (ValueError, OSError, KeyError)


class ConfigError(ValueError):
    pass


def _float_list(text):
    try:
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            'expected a comma-separated list of numbers, got {!r}'
            .format(text))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--params', metavar='PATH',
                        help='JSON parameter file (SI, or {"value", "pu"})')
    common.add_argument('--out', metavar='DIR', default=None,
                        help='output directory (default: current directory)')
    common.add_argument('--from-manifest', metavar='PATH',
                        help='re-run the configuration recorded in a '
                             'manifest')
    common.add_argument('--dp-pu', type=float, metavar='X',
                        help='active power damping D_p, p.u.')
    common.add_argument('--j-pu', type=float, metavar='X',
                        help='inertia J, p.u.')
    common.add_argument('--no-inertia', action='store_true',
                        help='droop-only active power loop (J = 0)')
    common.add_argument('--pf', type=float, metavar='PF',
                        help='operate at rated apparent power with this '
                             'power factor')
    common.add_argument('--scr', type=float, help='grid short-circuit ratio')
    common.add_argument('--rx', type=float, help='grid R/X ratio')
    common.add_argument('-v', '--verbose', action='count', default=0)

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument('--tier', default=None,
                        help='model tier: ccl, vcl, apcl or full')
    source.add_argument('--curve', metavar='PATH',
                        help='measured or exported curve CSV instead of a '
                             'model tier')
    source.add_argument('--grid', default=DEFAULT_GRID,
                        metavar='START:STOP:STEP',
                        help='frequency grid of model curves, Hz')
    source.add_argument('--power-scale', type=float,
                        default=NAMEPLATE_POWER_SCALE,
                        help='factor on the coupling entry of the apcl tier '
                             '(default %(default)g; 1.5 matches the '
                             'linearized averaged model)')

    bands = argparse.ArgumentParser(add_help=False)
    bands.add_argument('--preset', help='compliance preset: nerc, fingrid, '
                                        'china or unifi')
    bands.add_argument('--bands', metavar='PATH',
                       help='custom band set JSON')

    scan = argparse.ArgumentParser(add_help=False)
    scan.add_argument('--freqs', default=DEFAULT_SCAN_FREQS,
                      metavar='START:STOP:STEP',
                      help='scan frequencies, Hz (f_N excluded)')
    scan.add_argument('--amplitude', type=float, default=0.01,
                      help='perturbation amplitude, fraction of V_N')
    scan.add_argument('--stack', default='full',
                      help='control stack: ccl, vcl, apcl or full')
    scan.add_argument('--settle-time', type=float, default=2.)
    scan.add_argument('--capture-periods', type=int, default=20)
    scan.add_argument('--dt', type=float, default=1e-5)
    scan.add_argument('--workers', type=int, default=None)
    scan.add_argument('--mirror', action='store_true',
                      help='also inject at 2 f_N - f and report the '
                           'converter impedance instead of V/(-I)')

    parser = argparse.ArgumentParser(
        prog='gfmimp',
        description='Impedance peak and exclusion bandwidth of grid-forming '
                    'converters.')
    parser.add_argument('--version', action='version', version=__version__)
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    p = commands.add_parser('curve', parents=[common, source],
                            help='sample model impedance curves')
    p.set_defaults(handler=cmd_curve)

    p = commands.add_parser('index', parents=[common, source, bands],
                            help='exclusion-bandwidth report of a curve')
    p.add_argument('--median-filter', action='store_true')
    p.set_defaults(handler=cmd_index)

    p = commands.add_parser('sweep', parents=[common, source, scan],
                            help='exclusion bandwidth over parameter sweeps')
    p.add_argument('--dp-values', type=_float_list, metavar='LIST',
                   help='D_p values, p.u.')
    p.add_argument('--j-values', type=_float_list, metavar='LIST',
                   help='J values, p.u.')
    p.add_argument('--pf-values', type=_float_list, metavar='LIST')
    p.add_argument('--scr-values', type=_float_list, metavar='LIST')
    p.add_argument('--rx-values', type=_float_list, metavar='LIST')
    p.set_defaults(handler=cmd_sweep)

    p = commands.add_parser('scan', parents=[common, scan],
                            help='simulated frequency scan')
    p.set_defaults(handler=cmd_scan)

    p = commands.add_parser('check', parents=[common, source, bands],
                            help='positive-resistance compliance check')
    p.set_defaults(handler=cmd_check)

    p = commands.add_parser('demo', parents=[common],
                            help='damping-step instability demonstration')
    p.add_argument('--schedule', default=DEFAULT_SCHEDULE,
                   metavar='T:DP,...',
                   help='damping events, time s : D_p p.u.')
    p.add_argument('--no-schedule', action='store_true',
                   help='undisturbed run')
    p.add_argument('--t-end', type=float, default=None)
    p.add_argument('--dt', type=float, default=5e-5)
    p.add_argument('--power-pu', type=float, default=DEMO_POWER_PU,
                   help='active power dispatch, p.u. of S_N '
                        '(default %(default)g)')
    p.set_defaults(handler=cmd_demo)
    return parser


class Run:
    """Resolved inputs and output bookkeeping of one command."""

    def __init__(self, args):
        self.args = args
        self.out = Path(args.out or '.')
        self.outputs = []
        self.resolved = {}

    # inputs

    def params(self):
        args = self.args
        if getattr(args, 'converter', None):
            p = ConverterParams(**args.converter)
        elif args.params:
            p, _ = load_params_file(args.params)
        else:
            p = ConverterParams()
        bases = per_unit_bases(p)
        changes = {}
        if args.dp_pu is not None:
            changes['D_p'] = bases.from_pu('D_p', args.dp_pu)
        if args.j_pu is not None:
            changes['J'] = bases.from_pu('J', args.j_pu)
        if args.pf is not None:
            if not 0 < args.pf <= 1:
                raise ConfigError('Power factor must be in (0, 1], got {}'
                                  .format(args.pf))
            changes['P_ref'] = p.S_N * args.pf
            changes['Q_ref'] = p.S_N * math.sqrt(1 - args.pf ** 2)
        p = p.replace(**changes)
        self.resolved['converter'] = p.as_dict()
        return p

    def grid(self, p, demo=False):
        args = self.args
        if getattr(args, 'grid_params', None):
            g = GridParams(**args.grid_params)
        else:
            kwargs = {}
            if args.params:
                _, kwargs = load_params_file(args.params)
            if args.scr is not None or args.rx is not None:
                kwargs = {k: v for k, v in kwargs.items()
                          if k not in ('L_g', 'R_g', 'SCR', 'ratio_RX')}
                if args.scr is not None:
                    kwargs['SCR'] = args.scr
                if args.rx is not None:
                    kwargs['ratio_RX'] = args.rx
            if demo and not kwargs.keys() & {'L_g', 'R_g', 'SCR',
                                             'ratio_RX'}:
                kwargs.update(SCR=DEMO_SCR, ratio_RX=DEMO_RATIO_RX)
            g = make_grid(p, **kwargs)
        self.resolved['grid'] = g.as_dict()
        return g

    def tier(self, name=None):
        args = self.args
        tag = Tier.from_name(name or args.tier or 'apcl')
        return ModelTier(tag, inertia_enabled=not args.no_inertia,
                         power_scale=args.power_scale
                         if tag is Tier.APCL_SIMPLIFIED else 1.)

    def model_curve(self, tier, p, g):
        start, stop, step = parse_range(self.args.grid)
        exclude = p.f_N if tier.has_fundamental_pole else None
        grid = frequency_grid(start, stop, step, exclude=exclude)
        op = None
        if tier.tag is Tier.FULL_NUMERIC:
            params = p if tier.inertia_enabled else p.replace(J=0.)
            op = solve_operating_point(params, g, params.P_ref, params.Q_ref)
        return sample_curve(tier, p, g, op, grid)

    def source_curve(self, p, g):
        """Curve named by ``--curve``, else the model curve of
        ``--tier``."""
        if self.args.curve:
            if self.args.tier:
                raise ConfigError('Give either --tier or --curve, not both')
            return ingest_measured_curve(self.args.curve)
        return self.model_curve(self.tier(), p, g)

    def band_set(self, f_N):
        args = self.args
        if args.preset and args.bands:
            raise ConfigError('Give either --preset or --bands, not both')
        if args.bands:
            return load_band_set(args.bands)
        if args.preset:
            return preset(args.preset, f_N)
        return None

    def scan_config(self):
        args = self.args
        return ScanConfig(f_pert=1., amplitude=args.amplitude,
                          settle_time=args.settle_time,
                          capture_periods=args.capture_periods, dt=args.dt,
                          mirror=args.mirror)

    def scan_freqs(self, f_N):
        return frequency_grid(*parse_range(self.args.freqs), exclude=f_N)

    # outputs

    def path(self, name):
        self.out.mkdir(parents=True, exist_ok=True)
        self.outputs.append(name)
        return self.out / name

    def write_text(self, name, text):
        with open(self.path(name), 'w') as f:
            f.write(text)

    def write_json(self, name, data):
        self.write_text(name, json.dumps(data, indent=2, sort_keys=True,
                                         default=_jsonable) + '\n')

    def write_table(self, name, frame):
        frame.to_csv(self.path(name), index=False, lineterminator='\n')

    def write_curve(self, name, curve):
        curve.to_csv(self.path(name + '.csv'))
        self.outputs.append(name + '.json')

    def write_manifest(self, exit_code):
        config = {k: v for k, v in vars(self.args).items()
                  if k not in ('handler', 'from_manifest', 'converter',
                               'grid_params')}
        config['converter'] = self.resolved.get('converter')
        config['grid_params'] = self.resolved.get('grid')
        manifest = dict(
            command=self.args.command,
            config=config,
            outputs=sorted(set(self.outputs)),
            exit_code=exit_code,
            version=__version__,
            created=datetime.datetime.now(datetime.timezone.utc)
            .isoformat(timespec='seconds'),
        )
        self.out.mkdir(parents=True, exist_ok=True)
        with open(self.out / MANIFEST, 'w') as f:
            json.dump(manifest, f, indent=2, sort_keys=True, default=_jsonable)
            f.write('\n')


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, 'value'):
        return value.value
    raise TypeError('{!r} is not JSON serializable'.format(value))


def cmd_curve(run):
    p = run.params()
    g = run.grid(p)
    names = (run.args.tier or 'ccl,vcl,apcl').split(',')
    for name in names:
        tier = run.tier(name.strip())
        curve = run.model_curve(tier, p, g)
        run.write_curve('curve_{}'.format(tier.tag.value), curve)
        log.info('%s: %d points', tier.tag.name, len(curve))
    return EXIT_OK


def cmd_index(run):
    p = run.params()
    g = run.grid(p)
    curve = run.source_curve(p, g)
    f_N = curve.f_N or p.f_N
    bands = run.band_set(f_N)
    try:
        report = band_index_report(curve, f_N, bands,
                                   median_filter=run.args.median_filter)
    except NoCornerError as err:
        run.write_json('report.json', dict(error=str(err),
                                           sides=list(err.sides)))
        raise
    run.write_text('report.json', report.to_json())
    run.write_text('report.txt', report.summary())
    sys.stdout.write(report.summary())
    return EXIT_OK


def _sweep_axes(args, scanned):
    axes = []
    for name, values in (('dp_pu', args.dp_values), ('j_pu', args.j_values),
                         ('pf', args.pf_values), ('scr', args.scr_values),
                         ('rx', args.rx_values)):
        if values:
            axes.append((name, values))
    if not axes:
        if scanned:
            axes = [('pf', list(DEFAULT_PF_VALUES))]
        else:
            axes = [('dp_pu', list(DEFAULT_DP_VALUES)),
                    ('j_pu', list(DEFAULT_J_VALUES))]
    return axes


def _sweep_points(axes):
    points = [{}]
    for name, values in axes:
        points = [dict(point, **{name: v}) for point in points
                  for v in values]
    return points


def cmd_sweep(run):
    args = run.args
    scanned = (args.tier or 'apcl').lower() == 'scan'
    base = run.params()
    base_grid = run.grid(base)
    bases = per_unit_bases(base)
    axes = _sweep_axes(args, scanned)
    if not scanned and {'pf', 'scr', 'rx'} & {name for name, _ in axes}:
        tier = run.tier()
        if tier.tag is not Tier.FULL_NUMERIC:
            raise ConfigError('Operating-point sweeps need the scan or full '
                              'tier')
    count = product(len(values) for _, values in axes)
    log.info('sweeping %d points over %s', count,
             ', '.join(name for name, _ in axes))

    rows = []
    for point in _sweep_points(axes):
        row = dict(point)
        try:
            changes = {}
            if 'dp_pu' in point:
                changes['D_p'] = bases.from_pu('D_p', point['dp_pu'])
            if 'j_pu' in point:
                changes['J'] = bases.from_pu('J', point['j_pu'])
            if 'pf' in point:
                changes['P_ref'] = base.S_N * point['pf']
                changes['Q_ref'] = base.S_N * math.sqrt(1 - point['pf'] ** 2)
            p = base.replace(**changes)
            if 'scr' in point or 'rx' in point:
                g = make_grid(p, SCR=point.get('scr', base_grid.SCR),
                              ratio_RX=point.get('rx', base_grid.ratio_RX),
                              V_grid=base_grid.V_grid)
            else:
                g = base_grid
            if scanned:
                op = solve_operating_point(p, g, p.P_ref, p.Q_ref)
                curve = scan_sweep(p, g, op, run.scan_freqs(p.f_N),
                                   run.scan_config(),
                                   ControlStack(args.stack),
                                   workers=args.workers)
            else:
                curve = run.model_curve(run.tier(), p, g)
            report = band_index_report(curve, p.f_N)
            row.update(delta_f=report.delta_f, f_a=report.f_a,
                       f_b=report.f_b, Z_peak=report.Z_peak,
                       f_peak=report.f_peak, error='')
        except (NoCornerError,) + MODEL_ERRORS as err:
            log.warning('sweep point %s failed: %s', point, err)
            row.update(delta_f=np.nan, f_a=np.nan, f_b=np.nan,
                       Z_peak=np.nan, f_peak=np.nan, error=str(err))
        rows.append(row)

    columns = [name for name, _ in axes] + ['delta_f', 'f_a', 'f_b',
                                            'Z_peak', 'f_peak', 'error']
    table = pd.DataFrame(rows, columns=columns)
    run.write_table('sweep.csv', table)
    sys.stdout.write(tabulate(table, headers='keys', showindex=False,
                              floatfmt='.3f') + '\n')
    axis_names = {name for name, _ in axes}
    if not scanned and axis_names & {'dp_pu', 'j_pu'}:
        try:
            run.write_json('sensitivity.json',
                           sensitivity(base, tier=run.tier().tag))
        except (NoCornerError,) + MODEL_ERRORS as err:
            log.warning('sensitivity not computed: %s', err)
    return EXIT_OK


def cmd_scan(run):
    args = run.args
    p = run.params()
    g = run.grid(p)
    op = solve_operating_point(p, g, p.P_ref, p.Q_ref)
    curve = scan_sweep(p, g, op, run.scan_freqs(p.f_N), run.scan_config(),
                       ControlStack(args.stack), workers=args.workers)
    run.write_curve('curve_scan', curve)
    return EXIT_OK


def cmd_check(run):
    p = run.params()
    g = run.grid(p)
    curve = run.source_curve(p, g)
    f_N = curve.f_N or p.f_N
    bands = run.band_set(f_N)
    if bands is None:
        raise ConfigError('check needs --preset or --bands')
    verdicts = compliance_check(curve, bands)
    overall = overall_verdict(verdicts)
    run.write_json('verdicts.json', dict(
        bands=bands.as_dict(),
        verdicts=[v.as_dict() for v in verdicts],
        compliance=overall.value,
        provenance=curve.provenance,
    ))
    rows = [('{:g}-{:g} Hz'.format(*v.band), v.verdict.value,
             '' if v.first_violation is None
             else '{:.2f} Hz'.format(v.first_violation)) for v in verdicts]
    sys.stdout.write(tabulate(rows, headers=('band', 'verdict',
                                             'first violation')) + '\n')
    sys.stdout.write('{}: {}\n'.format(bands.name, overall.value))
    return EXIT_NONCOMPLIANT if overall is Verdict.FAIL else EXIT_OK


def cmd_demo(run):
    args = run.args
    p = run.params()
    g = run.grid(p, demo=True)
    if args.no_schedule:
        schedule = []
    else:
        schedule = parse_schedule(args.schedule, p)
    report = run_instability_demo(p, g, schedule, t_end=args.t_end,
                                  dt=args.dt, power=args.power_pu * p.S_N)
    run.write_table('timeseries.csv', report.timeseries)
    for name, spectrum in sorted(report.spectra.items()):
        run.write_table('spectrum_{}.csv'.format(name), spectrum)
    run.write_json('findings.json', report.findings)
    text = tabulate(sorted((k, _summary_value(v))
                           for k, v in report.findings.items()),
                    headers=('finding', 'value'))
    run.write_text('findings.txt', text + '\n')
    sys.stdout.write(text + '\n')
    return EXIT_OK


def _summary_value(value):
    if isinstance(value, float):
        return '{:.4g}'.format(value)
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True, default=_jsonable)
    return str(value)


def _replay(args, parser):
    with open(args.from_manifest) as f:
        manifest = json.load(f)
    if manifest.get('command') != args.command:
        raise ConfigError('Manifest {} records command {!r}, not {!r}'
                          .format(args.from_manifest, manifest.get('command'),
                                  args.command))
    defaults = vars(parser.parse_args([args.command]))
    config = dict(defaults, **manifest['config'])
    if args.out is not None:
        config['out'] = args.out
    config['from_manifest'] = args.from_manifest
    return argparse.Namespace(**config)


def _configure_logging(verbosity):
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbosity, 2)]
    logging.basicConfig(level=level,
                        format='%(levelname)s %(name)s: %(message)s')
    logging.captureWarnings(True)


def main(argv=None):
    """Run the command line; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        if args.from_manifest:
            args = _replay(args, parser)
    except CONFIG_ERRORS as err:
        sys.stderr.write('gfmimp: configuration error: {}\n'.format(err))
        return EXIT_CONFIG
    run = Run(args)
    try:
        code = args.handler(run)
    except NoCornerError as err:
        sys.stderr.write(
            'gfmimp: {}\nThe curve shows no impedance peak bracketed by '
            'local minima around f_N; without an active power loop the '
            'converter has none.\n'.format(err))
        code = EXIT_NO_CORNER
    except MODEL_ERRORS as err:
        sys.stderr.write('gfmimp: model error: {}\n'.format(err))
        code = EXIT_MODEL
    except CONFIG_ERRORS as err:
        sys.stderr.write('gfmimp: configuration error: {}\n'.format(err))
        code = EXIT_CONFIG
    run.write_manifest(code)
    return code


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()

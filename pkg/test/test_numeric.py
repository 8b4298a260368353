import itertools
import math

import numpy as np
import pytest

from gfmimp.converter import (ConverterParams, OperatingPoint,
                              build_ssop_matrices, make_grid, per_unit_bases,
                              solve_operating_point, stiff_grid)
from gfmimp.models import (AMPLITUDE_POWER_SCALE, Tier, ModelTier,
                           NumericModel, build_model,
                           ccl_impedance, frequency_grid,
                           full_impedance_numeric, sample_curve,
                           vcl_impedance)
from gfmimp.index import band_index_report
from gfmimp.models.tiers import dq_to_positive_sequence
from gfmimp.sim import ControlStack, SteadyStateError
from gfmimp.tf import PoleError


@pytest.fixture
def params():
    return ConverterParams()


def in_pu(p, **values):
    bases = per_unit_bases(p)
    return p.replace(**{name: bases.from_pu(name, value)
                        for name, value in values.items()})


def gap_db(a, b, grid):
    ratio = np.abs(a.positive_sequence(grid)) / \
        np.abs(b.positive_sequence(grid))
    return np.abs(20 * np.log10(ratio))


@pytest.fixture
def freqs():
    grid = frequency_grid(30., 70., 0.5, exclude=50.)
    return grid


class TestLinearizedInnerLoops:
    @pytest.mark.parametrize('stack,closed_form', [
        (ControlStack.CCL, ccl_impedance),
        (ControlStack.VCL, vcl_impedance),
    ])
    def test_matches_closed_form(self, params, freqs, stack, closed_form):
        op = OperatingPoint.rated(params)
        model = full_impedance_numeric(params, stiff_grid(params), op,
                                       stack=stack)
        numeric = model.positive_sequence(freqs)
        analytic = dq_to_positive_sequence(closed_form(params), freqs,
                                           params.f_N)
        np.testing.assert_allclose(numeric, analytic, rtol=1e-3)

    def test_inner_loops_do_not_couple(self, params):
        op = OperatingPoint.rated(params)
        model = full_impedance_numeric(params, op=op, stack='vcl')
        z = model.dq_matrix(2j * np.pi * 7.)
        assert abs(z[0, 1]) < 1e-6 * abs(z[0, 0])
        assert abs(z[1, 0]) < 1e-6 * abs(z[0, 0])

    def test_state_selection(self, params):
        op = OperatingPoint.rated(params)
        ccl = full_impedance_numeric(params, op=op, stack=ControlStack.CCL)
        assert ccl.state_names == ('i_d', 'i_q', 'xi_Id', 'xi_Iq')
        full = full_impedance_numeric(params, op=op)
        assert full.state_names == ('i_d', 'i_q', 'theta', 'omega', 'xi_Vd',
                                    'xi_Vq', 'xi_Id', 'xi_Iq', 'xi_Q')
        assert isinstance(full, NumericModel)
        assert full.A.shape == (9, 9)
        assert full.B.shape == (9, 2)


class TestLinearizedPowerLoop:
    def test_close_to_simplified_model(self, params):
        op = OperatingPoint.rated(params)
        grid = frequency_grid(40., 60., 0.1, exclude=50.)
        grid = grid[np.abs(grid - 50.) >= 0.2 - 1e-9]
        numeric = full_impedance_numeric(params, stiff_grid(params), op,
                                         stack=ControlStack.APCL)
        simplified = build_model(
            ModelTier(Tier.APCL_SIMPLIFIED,
                      power_scale=AMPLITUDE_POWER_SCALE), params)
        assert np.all(gap_db(numeric, simplified, grid) < 0.5)

    def test_full_stack_near_fundamental(self, params):
        grid = frequency_grid(47.5, 53.5, 0.1, exclude=50.)
        grid = grid[np.abs(grid - 50.) >= 0.2 - 1e-9]
        full = build_model(Tier.FULL_NUMERIC, params)
        simplified = build_model(
            ModelTier(Tier.APCL_SIMPLIFIED,
                      power_scale=AMPLITUDE_POWER_SCALE), params)
        assert np.all(gap_db(full, simplified, grid) < 2.)
        below = frequency_grid(45., 49.5, 0.5)
        assert np.any(full.positive_sequence(below).real < 0)
        assert np.any(simplified.positive_sequence(below).real < 0)

    def test_coupling_removed_collapses_to_voltage_loop(self, params, freqs):
        op = OperatingPoint.rated(params)
        rated = build_ssop_matrices(op, params)
        model = full_impedance_numeric(params, stiff_grid(params), op,
                                       stack=ControlStack.APCL,
                                       ssop=rated.zeroed('B_Vo_v'))
        assert model.tier.ssop is not None
        analytic = dq_to_positive_sequence(vcl_impedance(params), freqs,
                                           params.f_N)
        np.testing.assert_allclose(model.positive_sequence(freqs), analytic,
                                   rtol=1e-3)

    @pytest.mark.parametrize('stack', [ControlStack.APCL, ControlStack.FULL])
    def test_negative_resistance_below_fundamental(self, params, stack):
        op = OperatingPoint.rated(params)
        model = full_impedance_numeric(params, op=op, stack=stack)
        grid = frequency_grid(45., 49.9, 0.1)
        assert np.any(model.positive_sequence(grid).real < 0)

    def test_pole_at_fundamental(self, params):
        op = OperatingPoint.rated(params)
        model = full_impedance_numeric(params, op=op, stack='apcl')
        with pytest.raises(PoleError):
            model.positive_sequence(50.)

    def test_without_inertia(self, params):
        model = build_model(ModelTier(Tier.FULL_NUMERIC,
                                      inertia_enabled=False), params)
        assert 'omega' not in model.state_names
        assert model.params.J == 0.
        assert not model.tier.inertia_enabled
        values = model.positive_sequence(np.array([45., 55.]))
        assert np.all(np.isfinite(values))


class TestFullNumeric:
    def test_peak_insensitive_to_damping(self, params):
        peaks = []
        for d in (10., 20., 50.):
            model = build_model(Tier.FULL_NUMERIC, in_pu(params, D_p=d))
            peaks.append(abs(model.positive_sequence(50.01)))
        spread = 20 * np.log10(max(peaks) / min(peaks))
        assert spread < 1.

    def test_weak_grid_operating_point(self, params):
        g = make_grid(params, SCR=3.)
        model = full_impedance_numeric(params, g)
        op = solve_operating_point(params, g, params.P_ref, params.Q_ref)
        assert model.op.theta_0 == op.theta_0
        assert model.op_dict()['P_0'] == pytest.approx(params.P_ref)

    def test_sample_curve(self, params):
        tier = ModelTier(Tier.FULL_NUMERIC, stack=ControlStack.APCL)
        grid = frequency_grid(40., 60., 0.5, exclude=50.)
        curve = sample_curve(tier, params, grid=grid)
        assert curve.provenance == 'FULL_NUMERIC'
        assert curve.metadata['stack'] == 'APCL'
        assert curve.metadata['operating_point']['P_0'] == \
            pytest.approx(params.P_ref)
        assert curve.metadata['fundamental_pole']
        peak = curve.freqs[np.argmax(curve.magnitude)]
        assert abs(peak - 50.) <= 0.5 + 1e-9

    def test_exclusion_bandwidth_across_operating_conditions(self, params):
        grid = frequency_grid(30., 70., 0.1, exclude=50.)
        widths = []
        for pf, scr, rx in itertools.product((1., 0.95, 0.9), (3., 5., 10.),
                                             (0.1, 0.3, 1.)):
            p = params.replace(P_ref=params.S_N * pf,
                               Q_ref=params.S_N * math.sqrt(1 - pf ** 2))
            g = make_grid(p, SCR=scr, ratio_RX=rx)
            curve = sample_curve(Tier.FULL_NUMERIC, p, g, grid=grid)
            widths.append(band_index_report(curve).delta_f)
        assert max(widths) - min(widths) < 0.3 * np.mean(widths)

    def test_not_at_rest(self, params):
        op = OperatingPoint(V_d0=params.V_N, V_q0=10., I_d0=0., I_q0=0.,
                            P_0=0., Q_0=0., theta_0=0.)
        with pytest.raises(SteadyStateError):
            full_impedance_numeric(params, op=op, stack=ControlStack.VCL)

    def test_stack_only_for_numeric_tier(self):
        with pytest.raises(ValueError, match='control stack'):
            ModelTier(Tier.CCL_VCL, stack=ControlStack.CCL)

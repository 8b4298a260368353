import json

import numpy as np
import pytest
from pytest import approx

from gfmimp.converter import (
    ConverterParams, OperatingPoint, InfeasibleOperatingPoint,
    RatingMismatchWarning, build_ssop_matrices, dq_power, load_params_file,
    make_grid, per_unit_bases, solve_operating_point, stiff_grid,
    baseline_params)


@pytest.fixture
def params():
    return ConverterParams()


class TestParams:
    def test_defaults(self, params):
        for name, value in baseline_params.items():
            assert getattr(params, name) == value
        assert params.f_N == approx(50.)
        assert params.rating_mismatch < 0.01

    def test_per_unit_values(self, params):
        bases = per_unit_bases(params)
        assert bases.J_base == approx(params.S_N / params.omega_N)
        assert bases.D_base == bases.J_base
        assert bases.to_pu('D_p', params.D_p) == approx(50., rel=1e-3)
        assert bases.to_pu('J', params.J) == approx(4., rel=1e-3)
        assert bases.to_pu('K_v', params.K_v) == approx(12.49, rel=5e-3)
        # the reactive loop gain comes out near 3.55 p.u.
        k_q = bases.to_pu('K_q', params.K_q)
        assert k_q == approx(3.552, rel=1e-3)
        assert abs(k_q - 4.) > 0.4

    def test_per_unit_round_trip(self, params):
        bases = per_unit_bases(params)
        for name in ('J', 'D_p', 'K_v', 'K_q', 'L_f', 'k_pI', 'k_pV'):
            value = getattr(params, name)
            assert bases.from_pu(name, bases.to_pu(name, value)) == \
                approx(value)
        with pytest.raises(ValueError, match='no per-unit base'):
            bases.base_of('omega_N')

    def test_validation(self, params):
        with pytest.raises(ValueError, match='D_p must be positive'):
            ConverterParams(D_p=0.)
        with pytest.raises(ValueError, match='non-negative'):
            ConverterParams(J=-1.)
        with pytest.raises(ValueError, match='finite'):
            ConverterParams(k_pI=np.nan)
        with pytest.raises(ValueError, match='Unknown converter parameter'):
            params.replace(Kp=1.)
        assert params.replace(J=0.).J == 0.

    def test_from_dict(self, params):
        bases = per_unit_bases(params)
        p = ConverterParams.from_dict({
            'D_p': {'value': 20., 'pu': True},
            'J': 1000.,
            'k_pI': {'value': 1.5},
        })
        assert p.D_p == approx(20. * bases.D_base)
        assert p.J == 1000.
        assert p.k_pI == 1.5

        with pytest.raises(ValueError, match='cannot be given in per unit'):
            ConverterParams.from_dict({'V_N': {'value': 1., 'pu': True}})
        with pytest.raises(ValueError, match='Unknown'):
            ConverterParams.from_dict({'D': 1.})
        with pytest.warns(RatingMismatchWarning):
            ConverterParams.from_dict({'I_N': 300.})

    def test_digest(self, params):
        assert params.digest() == ConverterParams().digest()
        assert params.digest() != params.replace(J=1.).digest()
        assert params.digest('x') != params.digest()


class TestGrid:
    def test_default_grid(self, params):
        g = make_grid(params)
        z_base = 1.5 * params.V_N ** 2 / params.S_N
        assert g.SCR == 10.
        assert g.ratio_RX == 0.1
        assert g.L_g * params.omega_N == approx(z_base / 10.)
        assert g.R_g == approx(0.1 * z_base / 10.)
        assert g.V_grid == params.V_N
        assert not g.is_stiff

    def test_impedance_parameterization(self, params):
        g = make_grid(params, SCR=4., ratio_RX=0.2)
        same = make_grid(params, L_g=g.L_g, R_g=g.R_g)
        assert same.SCR == approx(4.)
        assert same.ratio_RX == approx(0.2)

    def test_stiff(self, params):
        g = stiff_grid(params)
        assert g.is_stiff
        assert g.SCR == np.inf

    def test_conflicting(self, params):
        with pytest.raises(ValueError, match='either'):
            make_grid(params, L_g=1e-3, SCR=3.)
        with pytest.raises(ValueError):
            make_grid(params, SCR=0.)


class TestOperatingPoint:
    def test_stiff_grid(self, params):
        op = solve_operating_point(params, stiff_grid(params), 200e3, 0.)
        assert op.V_d0 == params.V_N
        assert op.V_q0 == 0.
        assert op.I_d0 == approx(236.83, abs=0.01)
        assert op.I_q0 == approx(0.)
        assert op.theta_0 == 0.
        assert op.pf == approx(1.)

    def test_zero_power(self, params):
        op = solve_operating_point(params, make_grid(params), 0., 0.)
        assert op.I_d0 == approx(0., abs=1e-9)
        assert op.I_q0 == approx(0., abs=1e-9)
        assert op.V_d0 == approx(params.V_N)
        assert op.pf == 1.

    @pytest.mark.parametrize('P,Q', [(100e3, 0.), (200e3, 50e3),
                                     (-80e3, -20e3)])
    def test_weak_grid_balance(self, params, P, Q):
        g = make_grid(params, SCR=5., ratio_RX=0.1)
        op = solve_operating_point(params, g, P, Q)
        z_g = g.impedance(params.omega_N)
        i = (op.V_d0 - g.V_grid * np.exp(-1j * op.theta_0)) / z_g
        P_calc, Q_calc = dq_power(op.V_d0, i)
        assert P_calc == approx(P, abs=1e-6 * params.S_N)
        assert Q_calc == approx(Q, abs=1e-6 * params.S_N)
        assert op.i_out == approx(i)
        assert op.P_0 == approx(P)
        assert op.Q_0 == approx(Q)

    def test_exporting_power_leads_grid(self, params):
        op = solve_operating_point(params, make_grid(params), 200e3, 0.)
        assert op.theta_0 > 0

    def test_infeasible(self, params):
        g = make_grid(params, SCR=0.5)
        with pytest.raises(InfeasibleOperatingPoint) as err:
            solve_operating_point(params, g, 10 * params.S_N, 0.)
        assert err.value.residual > 0


class TestSSOP:
    def test_rated_point(self, params):
        m = build_ssop_matrices(OperatingPoint.rated(params), params)
        assert not m.extrapolated
        assert m.B_Vo_v[1, 0] == approx(316969.)
        assert m.B_Vc_v[1, 0] == approx(316969.)
        assert m.B_Ic_i[1, 0] == approx(55696.)
        for name in ('B_Vo_i', 'B_Vc_i', 'B_Ic_v'):
            assert getattr(m, name)[1, 0] == approx(563. * 236.)
        for name in m.names():
            matrix = getattr(m, name)
            assert matrix[0, 0] == matrix[0, 1] == matrix[1, 1] == 0.

    def test_zero_power(self, params):
        op = OperatingPoint.from_voltage_and_power(params.V_N, 0., 0.)
        m = build_ssop_matrices(op, params)
        assert m.extrapolated
        for name in ('B_Vo_i', 'B_Ic_i', 'B_Vc_i', 'B_Ic_v'):
            assert not np.any(getattr(m, name))
        assert m.B_Vo_v[1, 0] == approx(params.V_N ** 2)

    def test_reactive_point_is_extrapolated(self, params):
        op = OperatingPoint.from_voltage_and_power(params.V_N, 150e3, 50e3)
        m = build_ssop_matrices(op, params)
        assert m.extrapolated
        assert m.B_Ic_i[1, 1] == approx(-op.I_q0 ** 2)

    def test_zeroed(self, params):
        m = build_ssop_matrices(OperatingPoint.rated(params), params)
        z = m.zeroed('B_Vo_v')
        assert not np.any(z.B_Vo_v)
        assert z.B_Ic_i[1, 0] == m.B_Ic_i[1, 0]
        with pytest.raises(ValueError):
            m.zeroed('B_xx')
        with pytest.raises(ValueError):
            m.B_Vo_v[1, 0] = 0.


class TestParamsFile:
    def test_load(self, tmp_path, params):
        path = tmp_path / 'params.json'
        path.write_text(json.dumps({
            'converter': {'D_p': {'value': 20., 'pu': True},
                          'J': {'value': 2., 'pu': True}},
            'grid': {'SCR': 3., 'ratio_RX': 0.05},
        }))
        p, grid_kwargs = load_params_file(path)
        bases = per_unit_bases(params)
        assert p.D_p == approx(20. * bases.D_base)
        assert p.J == approx(2. * bases.J_base)
        assert grid_kwargs == {'SCR': 3., 'ratio_RX': 0.05}
        assert make_grid(p, **grid_kwargs).SCR == 3.

    def test_unknown_section(self, tmp_path):
        path = tmp_path / 'params.json'
        path.write_text(json.dumps({'controller': {}}))
        with pytest.raises(ValueError, match='Unknown sections'):
            load_params_file(path)

    def test_conflicting_grid(self, tmp_path):
        path = tmp_path / 'params.json'
        path.write_text(json.dumps({'grid': {'SCR': 3., 'L_g': 1e-3}}))
        with pytest.raises(ValueError):
            load_params_file(path)

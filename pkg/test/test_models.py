import numpy as np
import pytest
from pytest import approx

from gfmimp.converter import (ConverterParams, OperatingPoint,
                              build_ssop_matrices, per_unit_bases)
from gfmimp.models import (
    NAMEPLATE_POWER_SCALE, Tier, ModelTier, AnalyticModel, apcl_gain,
    apcl_simplified_matrix, assembled_vcl_impedance, build_model,
    ccl_impedance, dq_to_positive_sequence, frequency_grid, sample_curve,
    ssop_ablation, vcl_impedance, voltage_loop_transfer)
from gfmimp.tf import PoleError, RationalTF, poly_mul


@pytest.fixture
def params():
    return ConverterParams()


def in_pu(p, **values):
    bases = per_unit_bases(p)
    return p.replace(**{name: bases.from_pu(name, value)
                        for name, value in values.items()})


class TestCurrentLoop:
    def test_value(self, params):
        z = ccl_impedance(params)
        assert z(2j * np.pi * 10) == approx(1.26 - 6.6657j, abs=1e-4)

    def test_pole_at_fundamental(self, params):
        model = build_model(Tier.CCL_ONLY, params)
        with pytest.raises(PoleError):
            model.positive_sequence(50.)

    def test_no_integrator(self, params):
        z = ccl_impedance(params.replace(k_iI=0.))
        assert len(z.poles()) == 0
        assert z(0.) == approx(params.k_pI)

    def test_peak_next_to_fundamental(self, params):
        curve = sample_curve(Tier.CCL_ONLY, params)
        f_peak = curve.freqs[np.argmax(curve.magnitude)]
        assert abs(f_peak - 50.) <= 0.1 + 1e-9
        assert curve.metadata['fundamental_pole']


class TestVoltageLoop:
    def test_coefficients(self, params):
        z = vcl_impedance(params)
        lead = 1.0504
        np.testing.assert_allclose(z.den.coeffs * lead,
                                   [145740., 454.02, 1.0504], rtol=1e-9)
        np.testing.assert_allclose(z.num.coeffs * lead,
                                   [0., 420., 1.26, 300e-6], rtol=1e-9)

    def test_assembled_matches_closed_form(self, params):
        closed = vcl_impedance(params)
        assembled = assembled_vcl_impedance(params)
        s = 2j * np.pi * np.array([0.3, 5., 40., 150.])
        np.testing.assert_allclose(assembled(s), closed(s), rtol=1e-10)

        reduced = assembled.reduce()
        np.testing.assert_allclose(reduced.num.coeffs, closed.num.coeffs,
                                   rtol=1e-10)
        np.testing.assert_allclose(reduced.den.coeffs, closed.den.coeffs,
                                   rtol=1e-10)

    def test_alternative_assembly(self, params):
        z_f = params.L_f * RationalTF.s()
        g_i = RationalTF.pi(params.k_pI, params.k_iI)
        g_v = RationalTF.pi(params.k_pV, params.k_iV)
        other = z_f / (1 + g_v * g_i) + g_i.parallel(1 / g_v)
        s = 2j * np.pi * np.array([0.5, 8., 75.])
        np.testing.assert_allclose(other(s), vcl_impedance(params)(s),
                                   rtol=1e-9)

    def test_zero_at_fundamental(self, params):
        z = dq_to_positive_sequence(vcl_impedance(params), 50., 50.)
        assert abs(z) < 1e-12
        z = dq_to_positive_sequence(vcl_impedance(params), 49.9, 50.)
        assert abs(z) < 0.05

    def test_passive(self, params):
        curve = sample_curve(Tier.CCL_VCL, params)
        assert np.all(np.abs(curve.phase_deg) <= 90. + 1e-9)
        assert np.all(curve.resistance >= 0.)
        assert not curve.metadata['fundamental_pole']

    def test_closed_loop_transfer(self, params):
        t = voltage_loop_transfer(params)
        assert abs(t(2j * np.pi * 0.1)) == approx(1., abs=1e-3)
        assert t.den.degree == 2


class TestActivePowerLoop:
    def test_gain(self, params):
        s = 3j
        assert apcl_gain(params)(s) == \
            approx(1 / (s * (params.J * s + params.D_p)))
        assert apcl_gain(params, inertia_enabled=False)(s) == \
            approx(1 / (s * params.D_p))
        assert apcl_gain(params.replace(J=0.))(s) == \
            approx(1 / (s * params.D_p))

    def test_coupling_entry_expansion(self, params):
        m = apcl_simplified_matrix(params, power_scale=1.)
        p = params
        open_num = [p.k_iI * p.k_iV, p.k_pI * p.k_iV + p.k_iI * p.k_pV,
                    p.k_pI * p.k_pV]
        closed_den = [p.k_iI * p.k_iV, p.k_pI * p.k_iV + p.k_iI * p.k_pV,
                      p.k_pI * p.k_pV + 1.]
        expected = RationalTF(np.multiply(p.V_N ** 2, open_num),
                              poly_mul([0., p.D_p, p.J], closed_den))
        np.testing.assert_allclose(m[1, 0].num.coeffs, expected.num.coeffs,
                                   rtol=1e-12)
        np.testing.assert_allclose(m[1, 0].den.coeffs, expected.den.coeffs,
                                   rtol=1e-12)
        assert m[0, 1].is_zero
        assert m[0, 0] == vcl_impedance(params)

    def test_positive_sequence_closed_form(self, params):
        p = params
        f = np.array([40., 45., 49., 51., 55., 60.])
        s = 2j * np.pi * (f - p.f_N)
        z_v = s * (s ** 2 * p.L_f + s * p.k_pI + p.k_iI) / (
            s ** 2 * (p.k_pI * p.k_pV + 1) +
            s * (p.k_pI * p.k_iV + p.k_iI * p.k_pV) + p.k_iI * p.k_iV)
        loop = (p.k_pV + p.k_iV / s) * (p.k_pI + p.k_iI / s)
        z_21 = p.V_N ** 2 / (s * (p.J * s + p.D_p)) * loop / (1 + loop)
        model = build_model(ModelTier(Tier.APCL_SIMPLIFIED, power_scale=1.),
                            params)
        np.testing.assert_allclose(model.positive_sequence(f),
                                   z_v + 0.5j * z_21, rtol=1e-12)

    def test_conjugate_symmetry(self, params):
        model = build_model(Tier.APCL_SIMPLIFIED, params)
        for w in (0.7, 20., 300.):
            np.testing.assert_allclose(model.dq_matrix(-1j * w),
                                       np.conj(model.dq_matrix(1j * w)))

    def test_peak(self, params):
        model = build_model(Tier.APCL_SIMPLIFIED, params)
        near = np.abs(model.positive_sequence(np.array([49.9, 50.1])))
        far = np.abs(model.positive_sequence(np.array([40., 60.])))
        assert 20 * np.log10(near.min() / far.max()) > 20.
        with pytest.raises(PoleError):
            model.positive_sequence(50.)

    def test_negative_resistance_below_fundamental(self, params):
        curve = sample_curve(Tier.APCL_SIMPLIFIED, params)
        below = (curve.freqs > 45.) & (curve.freqs < 50.)
        assert np.any(curve.resistance[below] < 0)

    def test_coupling_removed_collapses_to_voltage_loop(self, params):
        rated = build_ssop_matrices(OperatingPoint.rated(params), params)
        tier = ModelTier(Tier.APCL_SIMPLIFIED,
                         ssop=rated.zeroed('B_Vo_v'))
        grid = frequency_grid(30., 70., 0.5, exclude=50.)
        reduced = sample_curve(tier, params, grid=grid)
        vcl = sample_curve(Tier.CCL_VCL, params, grid=grid)
        np.testing.assert_allclose(reduced.values, vcl.values, rtol=1e-9)

    def test_power_scale(self, params):
        base = apcl_simplified_matrix(params)
        scaled = apcl_simplified_matrix(params, power_scale=1.5)
        assert scaled[1, 0](2j) == approx(1.5 * base[1, 0](2j))
        assert (ModelTier(Tier.APCL_SIMPLIFIED).power_scale ==
                NAMEPLATE_POWER_SCALE == approx(3.375))
        model = build_model(Tier.APCL_SIMPLIFIED, params)
        assert (model.tf[1, 0](2j) ==
                approx(NAMEPLATE_POWER_SCALE * base[1, 0](2j)))

    def test_peak_insensitive_to_inertia(self, params):
        peaks = []
        for j in (1., 2., 4., 8.):
            model = build_model(Tier.APCL_SIMPLIFIED, in_pu(params, J=j))
            peaks.append(abs(model.positive_sequence(50.1)))
        spread = 20 * np.log10(max(peaks) / min(peaks))
        assert spread < 1.

    def test_ablation(self, params):
        result = ssop_ablation(params)
        assert set(result) == {'none', 'B_Vo_i', 'B_Ic_i', 'B_Vc_i',
                               'B_Vo_v', 'B_Ic_v', 'B_Vc_v'}
        assert result['B_Vo_v'][0] < 0.1 * result['none'][0]
        for name in ('B_Vo_i', 'B_Ic_i', 'B_Vc_i', 'B_Ic_v', 'B_Vc_v'):
            assert result[name] == approx(result['none'])


class TestTiers:
    def test_from_name(self):
        assert Tier.from_name('apcl') is Tier.APCL_SIMPLIFIED
        assert Tier.from_name('FULL_NUMERIC') is Tier.FULL_NUMERIC
        with pytest.raises(ValueError, match='Unknown model tier'):
            Tier.from_name('pll')

    def test_model_tier_validation(self, params):
        rated = build_ssop_matrices(OperatingPoint.rated(params), params)
        with pytest.raises(ValueError, match='SSOP override'):
            ModelTier(Tier.CCL_VCL, ssop=rated)
        with pytest.raises(ValueError, match='SSOP override'):
            ModelTier(Tier.CCL_ONLY, ssop=rated)
        assert ModelTier(Tier.FULL_NUMERIC, ssop=rated).ssop is rated
        assert ModelTier(Tier.APCL_SIMPLIFIED, ssop=rated).ssop is rated
        with pytest.raises(ValueError, match='power_scale'):
            ModelTier(Tier.APCL_SIMPLIFIED, power_scale=0.)
        assert ModelTier('ccl').tag is Tier.CCL_ONLY
        assert not ModelTier(Tier.CCL_VCL).has_fundamental_pole

    def test_build_model(self, params):
        model = build_model('vcl', params)
        assert isinstance(model, AnalyticModel)
        assert model.tier.tag is Tier.CCL_VCL
        m = model.dq_matrix(np.array([1j, 2j]))
        assert m.shape == (2, 2, 2)
        assert m[0, 0, 1] == 0

    def test_sample_curve_deterministic(self, params):
        a = sample_curve(Tier.APCL_SIMPLIFIED, params)
        b = sample_curve(Tier.APCL_SIMPLIFIED, params)
        assert np.array_equal(a.values, b.values)
        assert a.params_digest == b.params_digest
        assert a.provenance == 'APCL_SIMPLIFIED'
        assert a.f_N == approx(50.)
        assert 50. not in a.freqs
        assert a.freqs[0] == 1. and a.freqs[-1] == 100.

    def test_digest_tracks_parameters(self, params):
        a = sample_curve(Tier.CCL_VCL, params)
        b = sample_curve(Tier.CCL_VCL, params.replace(k_pI=2.))
        assert a.params_digest != b.params_digest

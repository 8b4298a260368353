import json

import numpy as np
import pytest

from gfmimp.converter import ConverterParams
from gfmimp.models import (CurveFormatError, Frame, ImpedanceCurve, Tier,
                           default_grid, frequency_grid,
                           ingest_measured_curve, negative_resistance_spans,
                           parse_range, sample_curve)


def write_rows(path, rows, header='freq_hz,re_ohm,im_ohm'):
    path.write_text('\n'.join([header] + rows) + '\n')
    return path


class TestImpedanceCurve:
    def test_validation(self):
        with pytest.raises(ValueError, match='strictly increasing'):
            ImpedanceCurve([1., 1.], [0j, 0j])
        with pytest.raises(ValueError, match='same length'):
            ImpedanceCurve([1., 2.], [0j])
        curve = ImpedanceCurve([1., 2.], [1 + 1j, 2 - 1j])
        with pytest.raises(ValueError):
            curve.values[0] = 0.

    def test_derived_quantities(self):
        curve = ImpedanceCurve([1., 2.], [3 + 4j, -1j],
                               metadata=dict(f_N=50.))
        np.testing.assert_allclose(curve.magnitude, [5., 1.])
        np.testing.assert_allclose(curve.phase_deg, [53.130102, -90.])
        np.testing.assert_allclose(curve.resistance, [3., 0.])
        assert curve.f_N == 50.
        assert len(curve) == 2
        assert curve.scaled(2.).values[0] == 6 + 8j

    def test_csv_round_trip(self, tmp_path):
        p = ConverterParams()
        curve = sample_curve(Tier.APCL_SIMPLIFIED, p)
        csv_path, sidecar_path = curve.to_csv(tmp_path / 'curve_apcl.csv')
        assert sidecar_path.name == 'curve_apcl.json'
        header = csv_path.read_text().splitlines()[0]
        assert header == 'freq_hz,re_ohm,im_ohm,mag_ohm,phase_deg'

        loaded = ingest_measured_curve(csv_path)
        np.testing.assert_array_equal(loaded.freqs, curve.freqs)
        np.testing.assert_array_equal(loaded.values, curve.values)
        assert loaded.provenance == 'measured:{}'.format(csv_path)
        assert loaded.f_N == curve.f_N
        assert loaded.metadata['fundamental_pole']
        assert loaded.metadata['source_provenance'] == 'APCL_SIMPLIFIED'
        assert loaded.params_digest == curve.params_digest

        with open(sidecar_path) as f:
            sidecar = json.load(f)
        assert sidecar['frame'] == Frame.POSITIVE_SEQ_STATIONARY.value

    def test_reads_without_sidecar(self, tmp_path):
        path = write_rows(tmp_path / 'meas.csv',
                          ['10,0.5,1.0', '20,0.25,-2.0', '30, 1e-1, 3'])
        curve = ImpedanceCurve.from_csv(path)
        np.testing.assert_array_equal(curve.freqs, [10., 20., 30.])
        assert curve.values[2] == 0.1 + 3j
        assert curve.f_N is None
        assert curve.frame is Frame.POSITIVE_SEQ_STATIONARY

    def test_shuffled_rows(self, tmp_path):
        path = write_rows(tmp_path / 'meas.csv',
                          ['10,0.5,1.0', '30,0.25,-2.0', '20,0.1,3'])
        with pytest.raises(CurveFormatError) as err:
            ingest_measured_curve(path)
        assert err.value.line == 4
        assert 'line 4' in str(err.value)

    def test_duplicate_frequency(self, tmp_path):
        path = write_rows(tmp_path / 'meas.csv',
                          ['10,0.5,1.0', '10,0.25,-2.0'])
        with pytest.raises(CurveFormatError, match='duplicate'):
            ingest_measured_curve(path)

    def test_non_numeric_value(self, tmp_path):
        path = write_rows(tmp_path / 'meas.csv',
                          ['10,0.5,1.0', '20,abc,-2.0', '30,nan,1'])
        with pytest.raises(CurveFormatError) as err:
            ingest_measured_curve(path)
        assert err.value.line == 3

    def test_missing_column(self, tmp_path):
        path = write_rows(tmp_path / 'meas.csv', ['10,0.5'],
                          header='freq_hz,re_ohm')
        with pytest.raises(CurveFormatError, match='missing columns'):
            ingest_measured_curve(path)


class TestGrids:
    def test_frequency_grid(self):
        grid = frequency_grid(1., 2., 0.1)
        assert len(grid) == 11
        assert grid[-1] == 2.
        grid = frequency_grid(49., 51., 0.5, exclude=50.)
        np.testing.assert_array_equal(grid, [49., 49.5, 50.5, 51.])
        with pytest.raises(ValueError):
            frequency_grid(1., 2., 0.)
        with pytest.raises(ValueError):
            frequency_grid(2., 1., 0.1)

    def test_default_grid(self):
        grid = default_grid(50.)
        assert len(grid) == 990
        assert 50. not in grid
        assert np.all(np.diff(grid) > 0)

    def test_parse_range(self):
        assert parse_range('30:70:0.5') == (30., 70., 0.5)
        with pytest.raises(ValueError, match='start:stop:step'):
            parse_range('30:70')
        with pytest.raises(ValueError, match='start:stop:step'):
            parse_range('a:b:c')

    def test_negative_resistance_spans(self):
        curve = ImpedanceCurve([1., 2., 3., 4., 5.],
                               [1., -1., -2., 1., -1.])
        assert negative_resistance_spans(curve) == [(2., 3.), (5., 5.)]

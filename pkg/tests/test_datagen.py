import math

import numpy as np
import pytest

from mvrkm.datagen import (
    LorenzParams,
    SplitSpec,
    gen_lorenz,
    gen_sine,
    gen_sum_sines,
    load_csv,
    split,
    write_csv,
)
from mvrkm.embedding import TimeSeries

from conftest import DATA_DIR


class TestSines:
    def test_zero_phase_start(self):
        assert gen_sine(5).values[0, 0] == 0.0

    def test_quarter_period(self):
        # 100 samples per period; sample 25 is a quarter period
        assert gen_sine(30, 1.0, 1.0, 0.0, 0.01).values[25, 0] == pytest.approx(1.0, abs=1e-15)

    def test_two_periods_peak(self):
        v = gen_sine(200, 1.0, 1.0, 0.0, 0.01).values
        assert abs(np.abs(v).max() - 1.0) <= 1e-3

    def test_sum_default_starts_at_zero(self):
        assert gen_sum_sines(10).values[0, 0] == 0.0

    def test_single_component(self):
        a = gen_sum_sines(50, (2.0,), (3.0,), (0.5,), 0.02)
        b = gen_sine(50, 3.0, 2.0, 0.5, 0.02)
        np.testing.assert_array_equal(a.values, b.values)

    def test_zero_amplitudes(self):
        np.testing.assert_array_equal(gen_sum_sines(20, (0.0, 0.0)).values, 0.0)

    def test_mismatched_lists(self):
        with pytest.raises(ValueError, match="differ in length"):
            gen_sum_sines(10, (1.0,), (1.0, 2.0), (0.0,))

    def test_matches_formula(self):
        t = np.arange(40) * 0.01
        expected = np.sin(2 * math.pi * t) + 0.2 * np.sin(2 * math.pi * 20 * t)
        np.testing.assert_allclose(gen_sum_sines(40).values[:, 0], expected, atol=1e-14)


class TestLorenz:
    def test_one_euler_step(self):
        out = gen_lorenz(LorenzParams(steps=2)).values
        np.testing.assert_array_equal(out[0], [1.0, -1.0, 1.05])
        np.testing.assert_allclose(out[1], [0.8, -0.7205, 1.0119965], atol=1e-12)

    def test_default_shape(self):
        out = gen_lorenz()
        assert out.values.shape == (4001, 3)

    def test_zero_equilibrium(self):
        out = gen_lorenz(LorenzParams(x0=0.0, y0=0.0, z0=0.0, steps=50)).values
        np.testing.assert_array_equal(out, 0.0)

    def test_bit_exact_rerun(self):
        a = gen_lorenz().values
        b = gen_lorenz().values
        assert a.tobytes() == b.tobytes()

    def test_blow_up_reports_step(self):
        with pytest.raises(FloatingPointError, match="step"):
            gen_lorenz(LorenzParams(dt=5.0, steps=400))

    def test_bad_params(self):
        with pytest.raises(ValueError):
            LorenzParams(dt=0.0)
        with pytest.raises(ValueError):
            LorenzParams(steps=0)


class TestCsv:
    def test_plain_column(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1\n2\n3")
        s = load_csv(p)
        assert s.values.shape == (3, 1)
        np.testing.assert_array_equal(s.values[:, 0], [1, 2, 3])

    def test_header_and_columns(self, tmp_path):
        p = tmp_path / "b.csv"
        p.write_text("t,x,y\n0,1.5,2\n1,2.5,3\n")
        s = load_csv(p, has_header=True, columns=[2, 1])
        np.testing.assert_array_equal(s.values, [[2, 1.5], [3, 2.5]])

    def test_non_numeric_location(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("1\nabc\n")
        with pytest.raises(ValueError, match=r"c\.csv:2"):
            load_csv(p)

    def test_nan_location(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2\n3,nan\n")
        with pytest.raises(ValueError, match=r"d\.csv:2: non-finite value in column 1"):
            load_csv(p)

    def test_ragged(self, tmp_path):
        p = tmp_path / "e.csv"
        p.write_text("1,2\n3\n")
        with pytest.raises(ValueError, match="expected 2 columns"):
            load_csv(p)

    def test_bad_column(self, tmp_path):
        p = tmp_path / "f.csv"
        p.write_text("1,2\n")
        with pytest.raises(ValueError, match="out of range"):
            load_csv(p, columns=[2])

    def test_empty(self, tmp_path):
        p = tmp_path / "g.csv"
        p.write_text("x\n")
        with pytest.raises(ValueError, match="no data"):
            load_csv(p, has_header=True)

    def test_roundtrip_exact(self, tmp_path):
        vals = np.random.default_rng(0).normal(size=(20, 3)) * 1e3
        p = tmp_path / "r.csv"
        write_csv(p, vals, header=["a", "b", "c"])
        np.testing.assert_array_equal(load_csv(p, has_header=True).values, vals)

    def test_santafe_file(self):
        s = load_csv(f"{DATA_DIR}/santafe.csv", has_header=True)
        assert s.values.shape == (1100, 1)
        np.testing.assert_array_equal(s.values[:4, 0], [86, 141, 95, 41])


class TestSplit:
    def test_santafe_sizes(self):
        tr, te = split(TimeSeries(np.arange(1100.0)), SplitSpec(1000, 100))
        assert (tr.n, te.n) == (1000, 100)
        assert te.values[0, 0] == 1000.0

    def test_lorenz_sizes(self):
        tr, te = split(gen_lorenz(), SplitSpec.parse("2801:1200"))
        assert (tr.n, te.n) == (2801, 1200)

    def test_empty_test(self):
        tr, te = split(TimeSeries(np.arange(10.0)), SplitSpec(10, 0))
        assert tr.n == 10 and te.n == 0

    def test_too_long(self):
        with pytest.raises(ValueError, match="exceeds"):
            split(TimeSeries(np.arange(10.0)), SplitSpec(8, 3))

    def test_parse_rejects(self):
        with pytest.raises(ValueError):
            SplitSpec.parse("1000")

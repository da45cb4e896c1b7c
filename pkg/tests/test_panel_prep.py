import math

import numpy as np
import pandas as pd
import pytest

from panel.panel_core import FirmYearRecord, PanelDataset, records_to_frame
from panel.panel_errors import ConfigError, EmptyDataset, GroupTooSmall, UnknownVariable, ZeroVariance
from panel.panel_lookup import DERIVED_VARIABLES
from panel.panel_prep import WinsorSpec, correlate, describe, quantile_bounds, winsorize
from panel.panel_regress import two_sided_p


def dataset_from(columns, years=None):
    """Panel with one firm per row; unspecified analysis variables are filled with row indices."""
    n = len(next(iter(columns.values())))
    years = years if years is not None else [2015] * n
    frame = records_to_frame([FirmYearRecord(firm_id=f"F{i:04d}", year=year, industry="C27")
                              for i, year in enumerate(years)])
    for name in DERIVED_VARIABLES:
        frame[name] = np.asarray(columns.get(name, np.arange(n, dtype=float)), dtype=float)
    return PanelDataset.from_frame(frame)


def sort_and_interpolate(values, q):
    ordered = sorted(values)
    h = (len(ordered) - 1) * q
    low = math.floor(h)
    high = min(low + 1, len(ordered) - 1)
    return ordered[low] + (h - low) * (ordered[high] - ordered[low])


class TestWinsorize:
    def test_constant_group_unchanged(self):
        dataset = dataset_from({"INV": [0.02] * 10})
        np.testing.assert_array_equal(winsorize(dataset).column("INV"), [0.02] * 10)

    def test_one_to_hundred_bounds(self):
        dataset = dataset_from({"INV": np.arange(1, 101)})
        out = winsorize(dataset, WinsorSpec(variables=("INV",))).column("INV")
        assert out.min() == pytest.approx(sort_and_interpolate(range(1, 101), 0.01), abs=1e-12)
        assert out.max() == pytest.approx(sort_and_interpolate(range(1, 101), 0.99), abs=1e-12)
        assert out.min() == pytest.approx(1.99)
        assert out.max() == pytest.approx(99.01)

    def test_applying_twice_equals_once(self):
        dataset = dataset_from({"INV": np.random.default_rng(1).normal(size=50)})
        once = winsorize(dataset)
        twice = winsorize(once)
        assert twice.frame.equals(once.frame)

    def test_unlisted_variables_untouched(self):
        values = np.random.default_rng(2).normal(size=40)
        dataset = dataset_from({"INV": values, "TQ": values})
        out = winsorize(dataset, WinsorSpec(variables=("INV",)))
        np.testing.assert_array_equal(out.column("TQ"), values)
        np.testing.assert_array_equal(out.column("LOSS"), dataset.column("LOSS"))

    def test_groups_are_per_year(self):
        years = [2014] * 20 + [2015] * 20
        values = np.concatenate([np.arange(20.0), np.arange(100.0, 120.0)])
        out = winsorize(dataset_from({"INV": values}, years), WinsorSpec(variables=("INV",)))
        frame = out.frame
        assert frame.loc[frame["year"] == 2015, "INV"].min() > 100.0
        assert frame.loc[frame["year"] == 2014, "INV"].max() < 19.0

    def test_group_too_small(self):
        dataset = dataset_from({"INV": [1.0, 2.0, 3.0]}, years=[2014, 2015, 2015])
        with pytest.raises(GroupTooSmall) as info:
            winsorize(dataset, WinsorSpec(variables=("INV",)))
        assert info.value.year == 2014

    def test_spec_rejects_bad_quantiles(self):
        with pytest.raises(ConfigError):
            WinsorSpec(lower_q=0.6, upper_q=0.4)

    def test_unknown_variable(self):
        with pytest.raises(UnknownVariable):
            winsorize(dataset_from({"INV": [1.0, 2.0]}), WinsorSpec(variables=("BOGUS",)))

    def test_randomized_groups(self):
        rng = np.random.default_rng(20)
        for _ in range(1000):
            n = int(rng.integers(2, 60))
            values = rng.standard_t(3, size=n)
            low, high = quantile_bounds(values, 0.01, 0.99)
            assert low == pytest.approx(sort_and_interpolate(values, 0.01), abs=1e-12)
            assert high == pytest.approx(sort_and_interpolate(values, 0.99), abs=1e-12)
            out = np.clip(values, low, high)
            assert out.min() >= low and out.max() <= high
            order = np.argsort(values, kind="mergesort")
            assert np.all(np.diff(out[order]) >= 0)


class TestDescribe:
    def test_constant_column(self):
        row, = describe(dataset_from({"HOLD": [0.5] * 10}), ["HOLD"])
        assert (row.n, row.mean, row.std_dev, row.min, row.max) == (10, 0.5, 0.0, 0.5, 0.5)

    def test_one_two_three(self):
        row, = describe(dataset_from({"INV": [1.0, 2.0, 3.0]}), ["INV"])
        assert row.mean == pytest.approx(2.0)
        assert row.std_dev == pytest.approx(1.0)
        assert (row.min, row.max) == (1.0, 3.0)

    def test_unknown_variable(self):
        with pytest.raises(UnknownVariable):
            describe(dataset_from({"INV": [1.0]}), ["BOGUS"])

    def test_empty_dataset(self):
        frame = pd.DataFrame({name: pd.Series(dtype=float) for name in DERIVED_VARIABLES})
        empty = PanelDataset.from_frame(pd.concat([records_to_frame([]), frame], axis=1))
        with pytest.raises(EmptyDataset):
            describe(empty, ["INV"])

    def test_mean_within_range(self, small_panel):
        for row in describe(small_panel, DERIVED_VARIABLES):
            assert row.min <= row.mean <= row.max
            assert row.std_dev >= 0


class TestCorrelate:
    def test_self_correlation(self):
        matrix = correlate(dataset_from({"INV": [1.0, 5.0, 2.0, 7.0]}), ["INV", "INV"])
        assert matrix.coefficient("INV", "INV") == (1.0, 0.0)

    def test_exact_linearity(self):
        matrix = correlate(dataset_from({"INV": [1.0, 2.0, 3.0], "HOLD": [2.0, 4.0, 6.0]}), ["INV", "HOLD"])
        assert matrix.r[0, 1] == pytest.approx(1.0)

    def test_four_point_fixture(self):
        matrix = correlate(dataset_from({"INV": [1.0, 2.0, 3.0, 4.0], "HOLD": [1.0, 3.0, 2.0, 4.0]}),
                           ["INV", "HOLD"])
        r, p = matrix.coefficient("INV", "HOLD")
        assert r == pytest.approx(0.8)
        t = 0.8 * math.sqrt(2 / 0.36)
        assert p == pytest.approx(float(two_sided_p(t, 2)))
        assert p == pytest.approx(0.2, abs=1e-9)

    def test_zero_variance(self):
        with pytest.raises(ZeroVariance) as info:
            correlate(dataset_from({"INV": [1.0, 2.0, 3.0], "HOLD": [0.3] * 3}), ["INV", "HOLD"])
        assert info.value.variable == "HOLD"

    def test_matrix_properties(self, small_panel):
        matrix = correlate(small_panel, ["INV", "HOLD", "AC1", "AC2", "SIZE", "TQ"])
        assert np.array_equal(matrix.r, matrix.r.T)
        assert np.all(np.diag(matrix.r) == 1.0)
        assert np.all(np.abs(matrix.r) <= 1.0)
        assert np.all((matrix.p >= 0) & (matrix.p <= 1))
        assert 0 <= matrix.max_offdiagonal <= 1

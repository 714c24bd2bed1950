"""Distribution summaries, dev/val comparison, and plot-data CSV export."""

import csv
import math

import numpy as np
import pytest

from neffkit.errors import EmptyInput, GridOnNonTwoCovariateModel, UnknownKind
from neffkit.report import (
    NeffDistribution,
    ReportBundle,
    RowRecord,
    compare,
    emit_plot_data,
    summarize,
)
from neffkit.workflow import validation_report

from conftest import make_dataset


class TestSummarize:
    def test_d1_values_with_threshold_two(self):
        dist = summarize([1.2, 3.0, 1.2], thresholds=[2.0])
        assert dist.harmonic_mean == pytest.approx(1.5, rel=1e-12)
        assert dist.n_below == {"2": 2}
        assert dist.n == 3
        assert dist.boundary_count == 0

    def test_constant_values(self):
        dist = summarize(np.full(40, 7.0))
        assert all(q == 7.0 for q in dist.quantiles.values())
        assert dist.harmonic_mean == pytest.approx(7.0, rel=1e-12)

    def test_quantiles_are_type7(self):
        dist = summarize([10.0, 20.0, 30.0, 40.0])
        assert dist.quantiles["50"] == pytest.approx(25.0, rel=1e-12)
        assert dist.quantiles["25"] == pytest.approx(17.5, rel=1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(15)
        values = rng.uniform(0.5, 60.0, 200)
        a = summarize(values)
        b = summarize(rng.permutation(values))
        assert a.quantiles == b.quantiles
        assert a.harmonic_mean == b.harmonic_mean
        assert a.histogram_counts == b.histogram_counts
        assert a.n_below == b.n_below

    def test_histogram_accounts_for_every_row(self):
        rng = np.random.default_rng(25)
        values = np.concatenate([rng.uniform(1, 100, 500), [math.inf] * 7])
        dist = summarize(values)
        assert sum(dist.histogram_counts) + dist.boundary_count == 507
        assert dist.boundary_count == 7
        assert len(dist.histogram_counts) == len(dist.histogram_edges)

    def test_quantiles_monotone(self):
        rng = np.random.default_rng(35)
        dist = summarize(rng.lognormal(2.0, 1.0, 1000))
        qs = [dist.quantiles[k] for k in ("1", "5", "10", "25", "50", "75", "90", "95", "99")]
        assert all(a <= b for a, b in zip(qs, qs[1:]))

    def test_threshold_counts_are_strict(self):
        dist = summarize([30.0, 29.999, 31.0], thresholds=[30.0])
        assert dist.n_below == {"30": 1}

    def test_values_keep_input_order(self):
        dist = summarize([5.0, 1.0, 9.0])
        np.testing.assert_array_equal(dist.values, [5.0, 1.0, 9.0])

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            summarize([])

    def test_all_boundary_rows(self):
        dist = summarize([math.inf, math.inf])
        assert dist.boundary_count == 2
        assert dist.harmonic_mean == math.inf
        assert sum(dist.histogram_counts) == 0

    def test_summary_obj_round_trip(self):
        dist = summarize([1.2, 3.0, 1.2, math.inf], thresholds=[2.0, 30.0])
        back = NeffDistribution.from_summary_obj(dist.to_summary_obj())
        assert back.quantiles == dist.quantiles
        assert back.harmonic_mean == dist.harmonic_mean
        assert back.histogram_edges == dist.histogram_edges
        assert back.histogram_counts == dist.histogram_counts
        assert back.n_below == dist.n_below
        assert back.boundary_count == dist.boundary_count
        assert back.n == dist.n
        assert back.values is None


class TestCompare:
    def test_identical_distributions_have_zero_deltas(self):
        rng = np.random.default_rng(45)
        values = rng.uniform(1, 50, 100)
        rec = compare(summarize(values), summarize(values.copy()))
        assert all(d == 0.0 for d in rec["quantile_delta"].values())

    def test_halved_values_give_negative_deltas(self):
        rng = np.random.default_rng(55)
        values = rng.uniform(1, 50, 100)
        rec = compare(summarize(values), summarize(values * 0.5))
        assert all(d < 0.0 for d in rec["quantile_delta"].values())

    def test_hand_computed_median_delta(self):
        rec = compare(
            summarize([10.0, 20.0, 30.0, 40.0]), summarize([5.0, 10.0, 15.0, 20.0])
        )
        assert rec["quantile_delta"]["50"] == pytest.approx(-12.5, rel=1e-12)

    def test_stochastic_ordering_profile(self):
        rng = np.random.default_rng(65)
        dev = rng.uniform(10, 50, 400)
        rec = compare(summarize(dev), summarize(dev * 0.5))
        fracs = list(rec["frac_val_below_dev_decile"].values())
        assert all(0.0 <= f <= 1.0 for f in fracs)
        assert fracs == sorted(fracs)
        assert rec["frac_val_below_dev_p5"] > 0.0


class TestRowRecord:
    def test_infinite_neff_serializes_as_null(self):
        rec = RowRecord(row_id=3, sample="val", yhat=0.999, n_eff=math.inf,
                        annotations=("boundary",))
        obj = rec.to_obj()
        assert obj["n_eff"] is None
        assert obj["annotations"] == ["boundary"]

    def test_finite_row(self):
        obj = RowRecord(row_id=1, sample="val", yhat=0.5, n_eff=10.0).to_obj()
        assert obj == {
            "row_id": 1, "sample": "val", "yhat": 0.5, "n_eff": 10.0, "annotations": []
        }


def read_back(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


class TestEmitPlotData:
    def test_heatmap_grid_on_d1(self, d1_model, tmp_path):
        bundle = validation_report(d1_model)
        out = tmp_path / "grid.csv"
        emit_plot_data(bundle, "heatmap-grid", out, {"grid": {"x": (0.0, 2.0, 1.0)}})
        header, rows = read_back(out)
        assert header == ["x", "yhat", "n_eff"]
        neffs = [float(r[2]) for r in rows]
        assert neffs == pytest.approx([1.2, 3.0, 1.2], rel=1e-12)

    def test_heatmap_grid_two_covariates(self, tmp_path):
        from neffkit.workflow import fit_model

        data = make_dataset(
            a=[0.0, 1.0, 2.0, 3.0, 0.5, 1.5, 2.5, 0.2],
            b=[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0],
            y=[0.1, 1.0, 2.2, 2.9, 0.4, 1.6, 2.6, 0.3],
        )
        model = fit_model(data, outcome="y", predictors=["a", "b"], family="gaussian")
        bundle = validation_report(model)
        out = tmp_path / "grid2.csv"
        emit_plot_data(
            bundle, "heatmap-grid", out, {"grid": {"a": (0.0, 3.0, 1.0), "b": (0.0, 1.0, 1.0)}}
        )
        header, rows = read_back(out)
        assert header == ["a", "b", "yhat", "n_eff"]
        assert len(rows) == 8  # 4 a-values x 2 b-values

    def test_grid_needs_few_covariates(self, tmp_path):
        from neffkit.workflow import fit_model

        rng = np.random.default_rng(8)
        data = make_dataset(
            a=rng.standard_normal(12),
            b=rng.standard_normal(12),
            c=rng.standard_normal(12),
            y=rng.standard_normal(12),
        )
        model = fit_model(data, outcome="y", predictors=["a", "b", "c"], family="gaussian")
        with pytest.raises(GridOnNonTwoCovariateModel):
            emit_plot_data(
                validation_report(model), "heatmap-grid", tmp_path / "x.csv",
                {"grid": {"a": (0, 1, 1), "b": (0, 1, 1), "c": (0, 1, 1)}},
            )

    def test_neff_vs_p_two_group(self, g_model, g_data, tmp_path):
        bundle = validation_report(g_model, g_data)
        out = tmp_path / "nvp.csv"
        emit_plot_data(bundle, "neff-vs-p", out)
        header, rows = read_back(out)
        assert header == ["row_id", "yhat", "n_eff"]
        assert len(rows) == 20
        yhats = sorted({float(r[1]) for r in rows})
        assert yhats == pytest.approx([0.3, 0.5], rel=1e-9)
        assert [float(r[2]) for r in rows] == pytest.approx([10.0] * 20, rel=1e-9)

    def test_neff_vs_p_needs_rows(self, d1_model, tmp_path):
        with pytest.raises(EmptyInput):
            emit_plot_data(validation_report(d1_model), "neff-vs-p", tmp_path / "e.csv")

    def test_dev_val_density_round_trips(self, d1_model, d1_data, tmp_path):
        bundle = validation_report(d1_model, d1_data)
        out = tmp_path / "dens.csv"
        emit_plot_data(bundle, "dev-val-density", out)
        header, rows = read_back(out)
        assert header == ["sample", "n_eff"]
        dev_back = [float(r[1]) for r in rows if r[0] == "dev"]
        np.testing.assert_allclose(dev_back, bundle.dev.values, rtol=1e-9)
        val_back = [float(r[1]) for r in rows if r[0] == "val"]
        np.testing.assert_allclose(val_back, bundle.val.values, rtol=1e-9)

    def test_histogram_export(self, g_model, tmp_path):
        bundle = validation_report(g_model)
        out = tmp_path / "hist.csv"
        emit_plot_data(bundle, "histogram", out)
        header, rows = read_back(out)
        assert header == ["sample", "bin_left", "bin_right", "count"]
        # 30 bins + 1 overflow
        assert len(rows) == 31
        assert sum(int(r[3]) for r in rows) == 20
        assert rows[-1][2] == "inf"

    def test_paired_model_export(self, d1_model, d1_data, g_model, g_data, tmp_path):
        a = validation_report(d1_model, d1_data)
        b = validation_report(g_model, g_data)
        out = tmp_path / "paired.csv"
        emit_plot_data(a, "paired-model", out, {"other": b})
        header, rows = read_back(out)
        assert header == ["row_id", "model", "yhat", "n_eff"]
        assert {r[1] for r in rows} == {"d1", "g"}
        assert len(rows) == 23

    def test_unknown_kind(self, d1_model, tmp_path):
        with pytest.raises(UnknownKind):
            emit_plot_data(validation_report(d1_model), "sparkline", tmp_path / "s.csv")

    def test_emitted_floats_reparse_exactly(self, d1_model, d1_data, tmp_path):
        bundle = validation_report(d1_model, d1_data)
        out = tmp_path / "exact.csv"
        emit_plot_data(bundle, "neff-vs-p", out)
        _, rows = read_back(out)
        for rec, row in zip(bundle.rows, rows):
            assert float(row[1]) == rec.yhat
            assert float(row[2]) == rec.n_eff


class TestReportBundleToObj:
    def test_shape_and_schema_version(self, g_model, g_data):
        bundle = validation_report(g_model, g_data)
        obj = bundle.to_obj()
        assert obj["schema_version"] == 1
        assert obj["model_name"] == "g"
        assert obj["family"] == "binomial-logit"
        assert obj["dev"]["n"] == 20
        assert obj["val"]["n"] == 20
        assert len(obj["rows"]) == 20
        assert set(obj["comparison"]) >= {"quantile_delta"}

    def test_dev_only_bundle(self, d1_model):
        obj = validation_report(d1_model).to_obj()
        assert obj["val"] is None
        assert obj["comparison"] is None
        assert obj["rows"] == []

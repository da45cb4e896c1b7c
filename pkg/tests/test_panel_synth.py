import numpy as np
import pandas as pd
import pytest

from adapters.csv_adapter import emit_csv, load_csv
from panel.panel_errors import ConfigError
from panel.panel_ingest import construct_variables, filter_sample
from panel.panel_lookup import CONTROL_VARIABLES, DERIVED_VARIABLES
from panel.panel_mediation import VerdictKind, run_battery
from panel.panel_regress import ModelSpec, fit_model
from panel.panel_synth import HOLD_MAX, DgpParams, generate_panel, generate_records

CONTROLS = tuple(CONTROL_VARIABLES)
STRUCTURAL = ModelSpec("INV", ("HOLD", "AC1", "AC2") + CONTROLS)
# Intercepts lifted so noise-free draws stay clear of the zero floors
LIFTED = {"INV": 0.1, "AC1": 0.6, "AC2": 0.1}


class TestDgpParams:
    def test_defaults(self):
        params = DgpParams()
        assert (params.n_firms, params.years) == (2000, (2012, 2021))
        assert params.total_effect == pytest.approx(0.004 + 0.04 * 0.025 - 0.0015 * 0.035)

    def test_partial_overrides_merge(self):
        params = DgpParams(noise_sd={"INV": 0.0}, control_effects={"AC1": {"SIZE": 0.1}})
        assert params.noise_sd["AC1"] == 0.03
        assert params.control_effects["AC1"]["SIZE"] == 0.1
        assert params.control_effects["AC1"]["TQ"] == 0.0105

    @pytest.mark.parametrize("kwargs", [
        {"n_firms": 1},
        {"years": (2015, 2015)},
        {"noise_sd": {"AC1": -0.1}},
        {"fe_scale": {"INV": -1.0}},
        {"n_industries": 0},
        {"control_effects": {"AC1": {"BOGUS": 1.0}}},
        {"control_effects": {"LEV": {"SIZE": 1.0}}},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            DgpParams(**kwargs)


class TestGeneratePanel:
    def test_same_seed_same_panel(self, small_params):
        first, _ = generate_panel(small_params)
        second, echo = generate_panel(small_params)
        pd.testing.assert_frame_equal(first.frame, second.frame)
        assert echo == small_params

    def test_different_seed_differs(self, small_params, small_panel):
        other, _ = generate_panel(DgpParams(n_firms=200, years=(2012, 2016), seed=4))
        assert not np.array_equal(other.column("HOLD"), small_panel.column("HOLD"))

    def test_shape(self, small_panel):
        assert len(small_panel) == 200 * 5
        assert small_panel.year_levels == list(range(2012, 2017))

    def test_hold_support(self, small_panel):
        hold = small_panel.column("HOLD")
        assert hold.min() >= 0.0
        assert hold.max() <= HOLD_MAX

    def test_floors(self, small_panel):
        assert small_panel.column("INV").min() >= 0.0
        assert small_panel.column("AC1").min() >= 0.0
        assert small_panel.column("AC2").min() >= 0.0

    def test_default_panel_has_no_negative_expenses(self):
        records = generate_records(DgpParams(seed=0))
        assert min(record.mgmt_expense for record in records) >= 0.0
        assert min(record.other_receivables for record in records) >= 0.0

    def test_adding_firms_keeps_existing_draws(self):
        few, _ = generate_panel(DgpParams(n_firms=30, years=(2012, 2015), seed=6))
        many, _ = generate_panel(DgpParams(n_firms=45, years=(2012, 2015), seed=6))
        head = many.frame.loc[many.frame["firm_id"].isin(few.frame["firm_id"])].reset_index(drop=True)
        pd.testing.assert_frame_equal(head, few.frame)


class TestBackSolve:
    def test_records_include_pre_sample_year(self, small_params):
        records = generate_records(small_params)
        assert len(records) == 200 * 6
        assert min(record.year for record in records) == 2011

    def test_every_record_passes_the_screens(self, small_params):
        kept, log = filter_sample(generate_records(small_params))
        assert log.total_removed == 0
        assert len(kept) == 200 * 6

    def test_construct_variables_reproduces_draws(self, small_params, small_panel):
        rebuilt = construct_variables(generate_records(small_params))
        assert len(rebuilt) == len(small_panel)
        np.testing.assert_allclose(rebuilt.frame[DERIVED_VARIABLES].to_numpy(dtype=float),
                                   small_panel.frame[DERIVED_VARIABLES].to_numpy(dtype=float), rtol=0, atol=1e-12)

    def test_fidelity_survives_csv(self, synth_csv, small_panel):
        rebuilt = construct_variables(filter_sample(load_csv(synth_csv))[0])
        np.testing.assert_allclose(rebuilt.frame[DERIVED_VARIABLES].to_numpy(dtype=float),
                                   small_panel.frame[DERIVED_VARIABLES].to_numpy(dtype=float), rtol=0, atol=1e-12)

    def test_panel_round_trips_through_csv(self, tmp_path, small_panel):
        path = emit_csv(small_panel, tmp_path / "panel.csv")
        assert load_csv(path) == small_panel.raw_records()


class TestExactRecovery:
    def test_noise_free_mediators_and_total_effect(self):
        params = DgpParams(n_firms=200, years=(2012, 2016), intercepts=LIFTED,
                           noise_sd={"INV": 0.0, "AC1": 0.0, "AC2": 0.0}, seed=12)
        dataset, truth = generate_panel(params)
        for name in ("INV", "AC1", "AC2"):
            assert dataset.column(name).min() > 0.0
        expected = {"AC1": truth.a1, "AC2": truth.a2, "INV": truth.total_effect}
        for dependent, slope in expected.items():
            fit = fit_model(dataset, ModelSpec(dependent, ("HOLD",) + CONTROLS))
            assert fit.r_squared == pytest.approx(1.0, abs=1e-9)
            assert fit.coefficient("HOLD")[0] == pytest.approx(slope, abs=1e-9)
        ac1 = fit_model(dataset, ModelSpec("AC1", ("HOLD",) + CONTROLS))
        for control, effect in truth.control_effects["AC1"].items():
            assert ac1.coefficient(control)[0] == pytest.approx(effect, abs=1e-9)

    def test_noise_free_outcome_equation(self):
        params = DgpParams(n_firms=200, years=(2012, 2016), intercepts=LIFTED, noise_sd={"INV": 0.0}, seed=13)
        dataset, truth = generate_panel(params)
        fit = fit_model(dataset, STRUCTURAL)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-9)
        for term, value in (("HOLD", truth.direct_effect), ("AC1", truth.b1), ("AC2", truth.b2)):
            assert fit.coefficient(term)[0] == pytest.approx(value, abs=1e-9)


@pytest.mark.monte_carlo
class TestMonteCarlo:
    def test_direct_effect_coverage(self):
        covered = 0
        for seed in range(200):
            dataset, truth = generate_panel(DgpParams(seed=seed))
            low, high = fit_model(dataset, STRUCTURAL).conf_int("HOLD")
            covered += low <= truth.direct_effect <= high
        assert 0.92 * 200 <= covered <= 0.98 * 200

    def test_mediation_power(self):
        detected = 0
        for seed in range(100):
            dataset, _ = generate_panel(DgpParams(seed=seed))
            report = run_battery(dataset)
            detected += (report.verdict_ac1.kind is VerdictKind.PARTIAL
                         and report.verdict_ac2.kind is VerdictKind.PARTIAL)
        assert detected >= 95

    def test_false_mediation_rate(self):
        false_verdicts = 0
        for seed in range(100):
            dataset, _ = generate_panel(DgpParams(a1=0.0, b1=0.0, a2=0.0, b2=0.0, seed=seed))
            report = run_battery(dataset)
            false_verdicts += report.verdict_ac1.is_mediation or report.verdict_ac2.is_mediation
        assert false_verdicts <= 5

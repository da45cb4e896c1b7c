import sys
from dataclasses import replace
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from adapters.csv_adapter import emit_csv
from panel.panel_core import FirmYearRecord
from panel.panel_synth import DgpParams, generate_panel, generate_records

BASE_RECORD = FirmYearRecord(
    firm_id="F1",
    year=2015,
    industry="C27",
    status="normal",
    rd_invest=3.0,
    total_assets=100.0,
    exec_shares=10.0,
    total_shares=100.0,
    mgmt_expense=24.0,
    main_revenue=120.0,
    other_receivables=5.0,
    establish_year=2000,
    tobin_q=2.0,
    ncps=0.5,
    net_income=4.0,
    top3_comp_avg=1.0e6,
    dual_flag=0,
)


@pytest.fixture
def make_record():
    def factory(**overrides) -> FirmYearRecord:
        return replace(BASE_RECORD, **overrides)

    return factory


@pytest.fixture
def two_year_records(make_record):
    """Firm F1 in 2014 and 2015, revenue 100 -> 120 (GROWTH 0.20)."""
    return [make_record(year=2014, main_revenue=100.0), make_record()]


@pytest.fixture(scope="session")
def small_params() -> DgpParams:
    return DgpParams(n_firms=200, years=(2012, 2016), seed=3)


@pytest.fixture(scope="session")
def small_panel(small_params):
    dataset, _ = generate_panel(small_params)
    return dataset


@pytest.fixture(scope="session")
def synth_csv(tmp_path_factory, small_params) -> Path:
    path = tmp_path_factory.mktemp("synth") / "panel.csv"
    emit_csv(generate_records(small_params), path)
    return path

"""Seeded synthetic firm-year panel with a known two-channel mediated data-generating process.

Random streams: one SeedSequence(seed, spawn_key=(0,)) for the shared year / industry
effects and one SeedSequence(seed, spawn_key=(1, i)) per firm i, so adding firms never
changes the draws of existing ones.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Tuple

import numpy as np
import pandas as pd

from panel.panel_core import FirmYearRecord, PanelDataset, RAW_COLUMNS, frame_to_records
from panel.panel_errors import ConfigError
from panel.panel_lookup import CONTROL_VARIABLES, DERIVED_VARIABLES
from panel.panel_types import YearRange

logger = logging.getLogger("agency_panel.synth")

EQUATIONS: Tuple[str, ...] = ("INV", "AC1", "AC2")
INDUSTRY_CODES: Tuple[str, ...] = ("C26", "C27", "C35", "C39", "D44", "E48", "F51", "G54", "I65", "K70", "M73", "N77")
HOLD_MAX = 0.891

DEFAULT_CONTROL_EFFECTS: Dict[str, Dict[str, float]] = {
    "INV": {"AGE": -0.000185, "SIZE": -0.00136, "TQ": 0.00236, "NCPS": -0.000362,
            "GROWTH": 0.000582, "LOSS": 0.00110, "P": 0.00581, "DUAL": 0.000215},
    "AC1": {"AGE": 0.000567, "SIZE": -0.0216, "TQ": 0.0105, "NCPS": -0.00165,
            "GROWTH": -0.0306, "LOSS": -0.0595, "P": 0.0183, "DUAL": 0.00634},
    "AC2": {"AGE": 0.000280, "SIZE": 0.000831, "TQ": 0.000332, "NCPS": -0.000483,
            "GROWTH": -0.000422, "LOSS": -0.00832, "P": -0.00196, "DUAL": -0.000300},
}
# Chosen so the default means sit near INV 0.03, AC1 0.20, AC2 0.05
DEFAULT_INTERCEPTS: Dict[str, float] = {"INV": -0.0194, "AC1": 0.40, "AC2": 0.056}
DEFAULT_FE_SCALE: Dict[str, float] = {"INV": 0.003, "AC1": 0.02, "AC2": 0.005}
DEFAULT_NOISE_SD: Dict[str, float] = {"INV": 0.006, "AC1": 0.03, "AC2": 0.007}


def _copy_nested(source: Mapping[str, Mapping[str, float]]) -> Dict[str, Dict[str, float]]:
    return {eq: dict(values) for eq, values in source.items()}


@dataclass(frozen=True)
class DgpParams:
    n_firms: int = 2000
    years: YearRange = (2012, 2021)
    direct_effect: float = 0.004
    a1: float = -0.04
    b1: float = -0.025
    a2: float = 0.0015
    b2: float = -0.035
    intercepts: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_INTERCEPTS))
    control_effects: Dict[str, Dict[str, float]] = field(default_factory=lambda: _copy_nested(DEFAULT_CONTROL_EFFECTS))
    fe_scale: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_FE_SCALE))
    noise_sd: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_NOISE_SD))
    n_industries: int = 10
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "years", tuple(self.years))
        object.__setattr__(self, "intercepts", {**DEFAULT_INTERCEPTS, **self.intercepts})
        object.__setattr__(self, "fe_scale", {**DEFAULT_FE_SCALE, **self.fe_scale})
        object.__setattr__(self, "noise_sd", {**DEFAULT_NOISE_SD, **self.noise_sd})
        effects = _copy_nested(DEFAULT_CONTROL_EFFECTS)
        for eq, values in self.control_effects.items():
            effects.setdefault(eq, {}).update(values)
        object.__setattr__(self, "control_effects", effects)

        if self.n_firms < 2:
            raise ConfigError(f"n_firms must be at least 2, got {self.n_firms}")
        low, high = self.years
        if high - low < 1:
            raise ConfigError(f"years must span at least two years, got {self.years}")
        if not 1 <= self.n_industries <= len(INDUSTRY_CODES):
            raise ConfigError(f"n_industries must be in [1, {len(INDUSTRY_CODES)}]")
        for name, scales in (("fe_scale", self.fe_scale), ("noise_sd", self.noise_sd)):
            for eq in EQUATIONS:
                if scales[eq] < 0:
                    raise ConfigError(f"{name}.{eq} must be non-negative")
        for eq, values in self.control_effects.items():
            if eq not in EQUATIONS:
                raise ConfigError(f"unknown equation {eq!r} in control_effects")
            unknown = set(values) - set(CONTROL_VARIABLES)
            if unknown:
                raise ConfigError(f"unknown controls {sorted(unknown)} for {eq}")

    @property
    def total_effect(self) -> float:
        return self.direct_effect + self.a1 * self.b1 + self.a2 * self.b2


def _draw_firm(params: DgpParams, index: int, years: np.ndarray) -> Dict[str, np.ndarray]:
    rng = np.random.default_rng(np.random.SeedSequence(params.seed, spawn_key=(1, index)))
    n = len(years)
    # firm-level draws
    industry = INDUSTRY_CODES[rng.integers(params.n_industries)]
    establish = int(years[0]) - int(rng.integers(1, 21))
    hold_base = HOLD_MAX * rng.beta(0.5, 3.0)
    size_base, p_base, shares_z = rng.standard_normal(3)
    dual = int(rng.random() < 0.3)
    # firm-year draws
    z = rng.standard_normal((9, n))
    u = rng.random((3, n))

    total_shares = float(np.round(np.exp(20.0 + shares_z)))
    return {
        "firm_index": np.full(n, index),
        "year": years,
        "industry": np.full(n, industry, dtype=object),
        "establish_year": np.full(n, establish),
        "total_shares": np.full(n, total_shares),
        "HOLD": np.clip(hold_base + 0.01 * z[0], 0.0, HOLD_MAX),
        "SIZE": 22.0 + 1.1 * size_base + 0.15 * z[1],
        "TQ": np.minimum(0.87 + np.exp(0.7 * z[2]), 8.195),
        "NCPS": np.clip(0.3 + 1.2 * z[3], -2.511, 7.057),
        "GROWTH": np.clip(0.18 + 0.3 * z[4], -0.498, 2.177),
        "LOSS": (u[0] < 0.1).astype(np.int64),
        "P": 14.3 + 0.6 * p_base + 0.1 * z[5],
        "DUAL": np.full(n, dual, dtype=np.int64),
        "noise_INV": z[6],
        "noise_AC1": z[7],
        "noise_AC2": z[8],
        "revenue_ratio": 0.3 + 0.9 * u[1],
        "income_ratio": 0.005 + 0.075 * u[2],
    }


def _draw_frame(params: DgpParams) -> pd.DataFrame:
    low, high = params.years
    # One pre-sample year per firm so GROWTH is defined from the first analysis year
    years = np.arange(low - 1, high + 1)
    shared = np.random.default_rng(np.random.SeedSequence(params.seed, spawn_key=(0,)))
    year_effects = {eq: shared.standard_normal(len(years)) * params.fe_scale[eq] for eq in EQUATIONS}
    industry_effects = {eq: shared.standard_normal(len(INDUSTRY_CODES)) * params.fe_scale[eq] for eq in EQUATIONS}

    firms = [_draw_firm(params, i, years) for i in range(params.n_firms)]
    frame = pd.DataFrame({key: np.concatenate([firm[key] for firm in firms]) for key in firms[0]})
    frame["AGE"] = (frame["year"] - frame["establish_year"]).astype(float)

    year_idx = (frame["year"] - years[0]).to_numpy()
    industry_idx = frame["industry"].map({code: i for i, code in enumerate(INDUSTRY_CODES)}).to_numpy()

    def structural(eq: str) -> np.ndarray:
        effects = params.control_effects[eq]
        value = np.full(len(frame), params.intercepts[eq])
        for control in CONTROL_VARIABLES:
            value = value + effects.get(control, 0.0) * frame[control].to_numpy(dtype=float)
        value = value + year_effects[eq][year_idx] + industry_effects[eq][industry_idx]
        return value + params.noise_sd[eq] * frame[f"noise_{eq}"].to_numpy()

    hold = frame["HOLD"].to_numpy()
    # Expense ratios and other receivables cannot be negative
    frame["AC1"] = np.maximum(structural("AC1") + params.a1 * hold, 0.0)
    frame["AC2"] = np.maximum(structural("AC2") + params.a2 * hold, 0.0)
    inv = (structural("INV") + params.direct_effect * hold
           + params.b1 * frame["AC1"].to_numpy() + params.b2 * frame["AC2"].to_numpy())
    floored = int((inv < 0).sum())
    if floored:
        logger.debug(f"Floored {floored} INV draws at 0")
    frame["INV"] = np.maximum(inv, 0.0)
    return _back_solve(frame)


def _back_solve(frame: pd.DataFrame) -> pd.DataFrame:
    """Raw line items whose ratio definitions reproduce the drawn variables."""
    total_assets = np.exp(frame["SIZE"].to_numpy())
    growth = frame["GROWTH"].to_numpy()
    first = (frame["firm_index"].diff() != 0).to_numpy()
    # Pre-sample revenue is a share of assets, later years compound GROWTH
    factor = np.where(first, total_assets * frame["revenue_ratio"].to_numpy(), 1.0 + growth)
    revenue = pd.Series(factor).groupby(frame["firm_index"].to_numpy()).cumprod().to_numpy()

    income_scale = frame["income_ratio"].to_numpy() * total_assets
    raw = pd.DataFrame({
        "firm_id": [f"F{i:05d}" for i in frame["firm_index"]],
        "year": frame["year"].astype(np.int64),
        "industry": frame["industry"].astype(str),
        "status": "normal",
        "rd_invest": frame["INV"].to_numpy() * total_assets,
        "total_assets": total_assets,
        "exec_shares": frame["HOLD"].to_numpy() * frame["total_shares"].to_numpy(),
        "total_shares": frame["total_shares"].to_numpy(dtype=float),
        "mgmt_expense": frame["AC1"].to_numpy() * revenue,
        "main_revenue": revenue,
        "other_receivables": frame["AC2"].to_numpy() * total_assets,
        "establish_year": frame["establish_year"].astype(np.int64),
        "tobin_q": frame["TQ"].to_numpy(),
        "ncps": frame["NCPS"].to_numpy(),
        "net_income": np.where(frame["LOSS"].to_numpy() == 1, -income_scale, income_scale),
        "top3_comp_avg": np.exp(frame["P"].to_numpy()),
        "dual_flag": frame["DUAL"].astype(np.int64),
    })
    return pd.concat([raw.loc[:, RAW_COLUMNS], frame.loc[:, DERIVED_VARIABLES]], axis=1)


def generate_records(params: DgpParams) -> List[FirmYearRecord]:
    """Raw firm-year records including each firm's pre-sample year."""
    return frame_to_records(_draw_frame(params))


def generate_panel(params: DgpParams) -> Tuple[PanelDataset, DgpParams]:
    """Analysis panel assembled from the drawn variables, plus the parameters as ground truth."""
    frame = _draw_frame(params)
    analysis = frame.loc[frame["year"] >= params.years[0]].reset_index(drop=True)
    dataset = PanelDataset.from_frame(analysis)
    logger.info(f"Generated {len(dataset)} firm-years for {params.n_firms} firms (seed {params.seed})")
    return dataset, params

"""Sample screens and analysis variable construction."""
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np
import pandas as pd

from panel.panel_core import PanelDataset, RecordsLike, RAW_COLUMNS, KEY_COLUMNS, records_to_frame, validate
from panel.panel_errors import ConfigError, DenominatorZero
from panel.panel_lookup import DERIVED_VARIABLES
from panel.panel_types import YearRange

logger = logging.getLogger("agency_panel.ingest")

# Every raw field a DerivedVars value depends on; status is only screened, never used
REQUIRED_FIELDS: List[str] = [name for name in RAW_COLUMNS if name not in ("firm_id", "year", "status")]
FILTER_REASONS: Tuple[str, ...] = ("status", "industry", "year", "missing", "inconsistent")
DENOMINATORS: Tuple[str, ...] = ("total_assets", "total_shares", "main_revenue")


@dataclass(frozen=True)
class IngestConfig:
    excluded_statuses: FrozenSet[str] = frozenset({"ST", "*ST"})
    excluded_industry_prefixes: FrozenSet[str] = frozenset({"J"})
    year_range: YearRange = (2010, 2021)

    def __post_init__(self):
        low, high = self.year_range
        if low > high:
            raise ConfigError(f"year_range min {low} exceeds max {high}")


@dataclass
class FilterLog:
    counts: Dict[str, int] = field(default_factory=dict)
    issues: List[DenominatorZero] = field(default_factory=list)

    def add(self, reason: str, count: int) -> None:
        self.counts[reason] = self.counts.get(reason, 0) + int(count)

    @property
    def total_removed(self) -> int:
        return sum(self.counts.values())

    def summary(self) -> str:
        lines = [f"{reason}: {count}" for reason, count in self.counts.items()]
        lines.append(f"total removed: {self.total_removed}")
        return "\n".join(lines)


def _starts_with_any(codes: pd.Series, prefixes: FrozenSet[str]) -> pd.Series:
    if not prefixes:
        return pd.Series(False, index=codes.index)
    return codes.fillna("").astype(str).str.startswith(tuple(sorted(prefixes)))


def filter_sample(records: RecordsLike, config: Optional[IngestConfig] = None) -> Tuple[pd.DataFrame, FilterLog]:
    """Apply the sample screens; each removed record is counted under the first reason it fails."""
    config = config or IngestConfig()
    frame = records_to_frame(records)
    log = FilterLog(counts={reason: 0 for reason in FILTER_REASONS})
    low, high = config.year_range

    masks = {
        "status": frame["status"].isin(config.excluded_statuses),
        "industry": _starts_with_any(frame["industry"], config.excluded_industry_prefixes),
        "year": (frame["year"] < low) | (frame["year"] > high),
        # ln(top3_comp_avg) undefined for non-positive pay, treated like a blank cell
        "missing": frame[REQUIRED_FIELDS].isna().any(axis=1) | ~(frame["top3_comp_avg"] > 0),
        "inconsistent": (
            (frame["total_assets"] < 0) | (frame["total_shares"] < 0)
            | (frame["exec_shares"] < 0) | (frame["exec_shares"] > frame["total_shares"])
            | (frame["establish_year"] > frame["year"])
            | (frame["rd_invest"] < 0) | (frame["other_receivables"] < 0)
            | ~frame["dual_flag"].isin([0, 1])
        ),
    }

    removed = pd.Series(False, index=frame.index)
    for reason in FILTER_REASONS:
        hit = masks[reason] & ~removed
        log.add(reason, hit.sum())
        removed |= hit

    kept = frame.loc[~removed].reset_index(drop=True)
    logger.info(f"Sample screens kept {len(kept)} of {len(frame)} records ({log.total_removed} removed)")
    logger.debug(f"Filter counts: {log.counts}")
    return kept, log


def construct_variables(records: RecordsLike, log: Optional[FilterLog] = None) -> PanelDataset:
    """Build the analysis variables. Records with zero denominators or no prior firm-year are dropped and counted."""
    log = log if log is not None else FilterLog()
    frame = validate(records)

    zero = pd.Series(False, index=frame.index)
    for name in DENOMINATORS:
        hit = (frame[name] == 0) & ~zero
        for firm_id, year in frame.loc[hit, KEY_COLUMNS].itertuples(index=False):
            log.issues.append(DenominatorZero(str(firm_id), int(year), name))
        zero |= hit
    if zero.any():
        logger.warning(f"Dropped {int(zero.sum())} records with a zero denominator")
    log.add("zero_denominator", zero.sum())

    # GROWTH only needs the prior revenue, so a zero-denominator predecessor still counts
    firm = frame.groupby("firm_id", sort=False)
    prior_year = firm["year"].shift(1)
    prior_revenue = firm["main_revenue"].shift(1).loc[~zero].reset_index(drop=True)
    has_prior = (prior_year == frame["year"] - 1).loc[~zero].reset_index(drop=True)
    frame = frame.loc[~zero].reset_index(drop=True)

    derived = pd.DataFrame(index=frame.index)
    derived["INV"] = frame["rd_invest"] / frame["total_assets"]
    derived["HOLD"] = frame["exec_shares"] / frame["total_shares"]
    derived["AC1"] = frame["mgmt_expense"] / frame["main_revenue"]
    derived["AC2"] = frame["other_receivables"] / frame["total_assets"]
    derived["AGE"] = (frame["year"] - frame["establish_year"]).astype(float)
    derived["SIZE"] = np.log(frame["total_assets"])
    derived["TQ"] = frame["tobin_q"].astype(float)
    derived["NCPS"] = frame["ncps"].astype(float)
    derived["GROWTH"] = (frame["main_revenue"] - prior_revenue) / prior_revenue
    derived["LOSS"] = (frame["net_income"] < 0).astype(np.int64)
    derived["P"] = np.log(frame["top3_comp_avg"])
    derived["DUAL"] = frame["dual_flag"].astype(np.int64)
    derived = derived.loc[:, DERIVED_VARIABLES]

    log.add("growth_undefined", (~has_prior).sum())
    values = derived.to_numpy(dtype=float)
    non_finite = has_prior & ~np.isfinite(values).all(axis=1)
    if non_finite.any():
        logger.warning(f"Dropped {int(non_finite.sum())} records with non-finite analysis values")
    log.add("non_finite", non_finite.sum())

    keep = has_prior & ~non_finite
    combined = pd.concat([frame.loc[keep], derived.loc[keep]], axis=1).reset_index(drop=True)
    logger.info(f"Constructed analysis variables for {len(combined)} records "
                f"({int((~has_prior).sum())} without a prior firm-year)")
    return PanelDataset.from_frame(combined)

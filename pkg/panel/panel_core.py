"""Firm-year panel data model: raw records, analysis variables, and numeric projection."""
import math
import logging
from dataclasses import dataclass, asdict, fields, field
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from panel.panel_errors import DuplicateKey, UnknownVariable, DataError
from panel.panel_lookup import DERIVED_VARIABLES

logger = logging.getLogger("agency_panel.core")

KEY_COLUMNS: List[str] = ["firm_id", "year"]
TEXT_COLUMNS: List[str] = ["firm_id", "industry", "status"]
INTEGER_COLUMNS: List[str] = ["year", "establish_year", "dual_flag"]


@dataclass(frozen=True)
class FirmYearRecord:
    firm_id: str
    year: int
    industry: Optional[str] = None
    status: Optional[str] = None
    rd_invest: Optional[float] = None
    total_assets: Optional[float] = None
    exec_shares: Optional[float] = None
    total_shares: Optional[float] = None
    mgmt_expense: Optional[float] = None
    main_revenue: Optional[float] = None
    other_receivables: Optional[float] = None
    establish_year: Optional[int] = None
    tobin_q: Optional[float] = None
    ncps: Optional[float] = None
    net_income: Optional[float] = None
    top3_comp_avg: Optional[float] = None
    dual_flag: Optional[int] = None


RAW_COLUMNS: List[str] = [f.name for f in fields(FirmYearRecord)]
NUMERIC_COLUMNS: List[str] = [name for name in RAW_COLUMNS if name not in TEXT_COLUMNS]


@dataclass(frozen=True)
class DerivedVars:
    INV: float
    HOLD: float
    AC1: float
    AC2: float
    AGE: float
    SIZE: float
    TQ: float
    NCPS: float
    GROWTH: float
    LOSS: int
    P: float
    DUAL: int


RecordsLike = Union[pd.DataFrame, Iterable[FirmYearRecord]]


def records_to_frame(records: RecordsLike) -> pd.DataFrame:
    if isinstance(records, pd.DataFrame):
        frame = records.loc[:, RAW_COLUMNS].copy()
    else:
        frame = pd.DataFrame([asdict(record) for record in records], columns=RAW_COLUMNS)
    for name in TEXT_COLUMNS:
        frame[name] = frame[name].astype(object).where(frame[name].notna(), None)
    frame["firm_id"] = frame["firm_id"].astype(str)
    for name in NUMERIC_COLUMNS:
        frame[name] = pd.to_numeric(frame[name], errors="coerce").astype(float)
    frame["year"] = frame["year"].astype(np.int64)
    return frame


def _clean(value):
    if value is None:
        return None
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def frame_to_records(frame: pd.DataFrame) -> List[FirmYearRecord]:
    records = []
    for row in frame.loc[:, RAW_COLUMNS].itertuples(index=False):
        values = {name: _clean(getattr(row, name)) for name in RAW_COLUMNS}
        for name in INTEGER_COLUMNS:
            if values[name] is not None:
                values[name] = int(values[name])
        for name in NUMERIC_COLUMNS:
            if name not in INTEGER_COLUMNS and values[name] is not None:
                values[name] = float(values[name])
        values["firm_id"] = str(values["firm_id"])
        records.append(FirmYearRecord(**values))
    return records


def validate(records: RecordsLike) -> pd.DataFrame:
    """Reject duplicate (firm_id, year) keys and sort by them. Returns the record frame."""
    frame = records_to_frame(records)
    duplicated = frame.duplicated(subset=KEY_COLUMNS, keep=False)
    if duplicated.any():
        collisions = frame.loc[duplicated, KEY_COLUMNS].itertuples(index=False)
        raise DuplicateKey((str(firm_id), int(year)) for firm_id, year in collisions)
    return frame.sort_values(KEY_COLUMNS, kind="mergesort").reset_index(drop=True)


@dataclass(frozen=True)
class VariableMatrix:
    column_names: Tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != len(self.column_names):
            raise DataError(f"matrix shape {self.values.shape} does not match {len(self.column_names)} column names")
        if not np.all(np.isfinite(self.values)):
            raise DataError("matrix contains non-finite entries")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self.column_names.index(name)]
        except ValueError:
            raise UnknownVariable(name) from None

    def select(self, names: Sequence[str]) -> "VariableMatrix":
        idx = [self.column_names.index(name) for name in names]
        return VariableMatrix(tuple(names), self.values[:, idx])


@dataclass(frozen=True)
class PanelDataset:
    """Validated firm-year panel: raw columns, the derived variables and any extra columns such as leads.

    Treat as immutable; every transformation returns a new dataset.
    """
    frame: pd.DataFrame
    applied: Tuple[object, ...] = field(default=())

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, applied: Tuple[object, ...] = ()) -> "PanelDataset":
        frame = frame.sort_values(KEY_COLUMNS, kind="mergesort").reset_index(drop=True)
        if frame.duplicated(subset=KEY_COLUMNS).any():
            dupes = frame.loc[frame.duplicated(subset=KEY_COLUMNS, keep=False), KEY_COLUMNS]
            raise DuplicateKey((str(f), int(y)) for f, y in dupes.itertuples(index=False))
        analysis = [name for name in frame.columns if name not in RAW_COLUMNS]
        missing = [name for name in DERIVED_VARIABLES if name not in frame.columns]
        if missing:
            raise DataError(f"dataset lacks analysis variables {missing}")
        if len(frame) and frame[analysis].isna().to_numpy().any():
            raise DataError("dataset has missing analysis values")
        return cls(frame=frame, applied=tuple(applied))

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def variables(self) -> List[str]:
        return [name for name in self.frame.columns if name not in RAW_COLUMNS]

    @property
    def year_levels(self) -> List[int]:
        return sorted(int(year) for year in self.frame["year"].unique())

    @property
    def industry_levels(self) -> List[str]:
        return sorted(str(code) for code in self.frame["industry"].unique())

    def column(self, name: str) -> np.ndarray:
        if name not in self.variables:
            raise UnknownVariable(name)
        return self.frame[name].to_numpy(dtype=float, copy=True)

    def raw_records(self) -> List[FirmYearRecord]:
        return frame_to_records(self.frame)

    def records(self) -> Iterator[Tuple[FirmYearRecord, DerivedVars]]:
        raw = self.raw_records()
        derived = self.frame.loc[:, DERIVED_VARIABLES].to_dict("records")
        for record, values in zip(raw, derived):
            values["LOSS"] = int(values["LOSS"])
            values["DUAL"] = int(values["DUAL"])
            yield record, DerivedVars(**values)

    def with_frame(self, frame: pd.DataFrame, applied: Optional[Tuple[object, ...]] = None) -> "PanelDataset":
        return PanelDataset.from_frame(frame, self.applied if applied is None else applied)


def to_matrix(dataset: PanelDataset, columns: Sequence[str]) -> VariableMatrix:
    known = set(dataset.variables)
    for name in columns:
        if name not in known:
            raise UnknownVariable(name)
    values = dataset.frame.loc[:, list(columns)].to_numpy(dtype=float, copy=True)
    return VariableMatrix(tuple(columns), values.reshape(len(dataset), len(columns)))

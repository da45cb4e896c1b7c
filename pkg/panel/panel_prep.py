"""Annual winsorization, descriptive statistics and the correlation matrix."""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from panel.panel_core import PanelDataset
from panel.panel_errors import ConfigError, DataError, EmptyDataset, GroupTooSmall, UnknownVariable, ZeroVariance
from panel.panel_lookup import CONTINUOUS_VARIABLES
from panel.panel_regress import two_sided_p

logger = logging.getLogger("agency_panel.prep")

COLLINEARITY_SCREEN = 0.5


@dataclass(frozen=True)
class WinsorSpec:
    lower_q: float = 0.01
    upper_q: float = 0.99
    variables: Tuple[str, ...] = field(default=tuple(CONTINUOUS_VARIABLES))
    by_year: bool = True

    def __post_init__(self):
        if not (0 <= self.lower_q < self.upper_q <= 1):
            raise ConfigError(f"winsor quantiles must satisfy 0 <= lower < upper <= 1, got "
                              f"({self.lower_q}, {self.upper_q})")
        object.__setattr__(self, "variables", tuple(self.variables))


def quantile_bounds(values: np.ndarray, lower_q: float, upper_q: float) -> Tuple[float, float]:
    # numpy's "linear" method is the type-7 rule: h = (n - 1) q + 1
    low, high = np.quantile(values, [lower_q, upper_q], method="linear")
    return float(low), float(high)


def winsorize_values(values: np.ndarray, lower_q: float, upper_q: float) -> np.ndarray:
    low, high = quantile_bounds(values, lower_q, upper_q)
    return np.clip(values, low, high)


def winsorize(dataset: PanelDataset, spec: Optional[WinsorSpec] = None) -> PanelDataset:
    """Cap and floor each listed variable at its group quantiles (per year unless spec.by_year is off)."""
    spec = spec or WinsorSpec()
    if spec in dataset.applied:
        logger.debug(f"Winsorization {spec} already applied, dataset unchanged")
        return dataset
    for name in spec.variables:
        if name not in dataset.variables:
            raise UnknownVariable(name)

    frame = dataset.frame.copy()
    if spec.by_year:
        groups = [(year, np.flatnonzero(frame["year"].to_numpy() == year)) for year in dataset.year_levels]
    else:
        groups = [("all", np.arange(len(frame)))]

    for name in spec.variables:
        column = frame[name].to_numpy(dtype=float, copy=True)
        for year, idx in groups:
            if len(idx) < 2:
                raise GroupTooSmall(year, name, len(idx))
            column[idx] = winsorize_values(column[idx], spec.lower_q, spec.upper_q)
        frame[name] = column

    logger.info(f"Winsorized {len(spec.variables)} variables at ({spec.lower_q}, {spec.upper_q}) "
                f"over {len(groups)} group(s)")
    return dataset.with_frame(frame, applied=dataset.applied + (spec,))


@dataclass(frozen=True)
class DescriptiveRow:
    variable: str
    n: int
    mean: float
    std_dev: float
    min: float
    max: float


def describe(dataset: PanelDataset, variables: Sequence[str]) -> List[DescriptiveRow]:
    if len(dataset) == 0:
        raise EmptyDataset()
    rows = []
    for name in variables:
        values = dataset.column(name)
        low, high = float(values.min()), float(values.max())
        # Sample std with n - 1; a single observation reports 0
        std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
        mean = min(max(float(values.mean()), low), high)
        rows.append(DescriptiveRow(name, len(values), mean, std, low, high))
    return rows


@dataclass(frozen=True)
class CorrelationMatrix:
    variables: Tuple[str, ...]
    r: np.ndarray
    p: np.ndarray
    n: int

    def coefficient(self, left: str, right: str) -> Tuple[float, float]:
        i, j = self.variables.index(left), self.variables.index(right)
        return float(self.r[i, j]), float(self.p[i, j])

    @property
    def max_offdiagonal(self) -> float:
        k = len(self.variables)
        if k < 2:
            return 0.0
        return float(np.max(np.abs(self.r[~np.eye(k, dtype=bool)])))

    @property
    def below_collinearity_screen(self) -> bool:
        return self.max_offdiagonal < COLLINEARITY_SCREEN


def correlate(dataset: PanelDataset, variables: Sequence[str]) -> CorrelationMatrix:
    """Pearson correlations with two-sided t-test p-values on n - 2 degrees of freedom."""
    n = len(dataset)
    if n < 3:
        raise DataError(f"correlation needs at least 3 observations, got {n}")
    columns = []
    for name in variables:
        values = dataset.column(name)
        if np.ptp(values) == 0:
            raise ZeroVariance(name)
        centered = values - values.mean()
        columns.append(centered / np.linalg.norm(centered))
    z = np.column_stack(columns)

    r = np.clip(z.T @ z, -1.0, 1.0)
    r = (r + r.T) / 2
    np.fill_diagonal(r, 1.0)

    df = n - 2
    with np.errstate(divide="ignore", invalid="ignore"):
        t = r * np.sqrt(df / (1.0 - r * r))
    p = np.clip(two_sided_p(t, df), 0.0, 1.0)
    p = (p + p.T) / 2
    np.fill_diagonal(p, 0.0)
    return CorrelationMatrix(tuple(variables), r, p, n)

"""Two-way fixed-effects OLS: design construction, QR least squares, classical inference, stars."""
import re
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg, special, stats

from panel.panel_core import PanelDataset, VariableMatrix, to_matrix
from panel.panel_errors import (
    AllColumnsAliased, EmptyDataset, InsufficientObservations, ModelSyntaxError, UnknownVariable,
)
from panel.panel_lookup import FIXED_EFFECT_DIMENSIONS
from panel.panel_types import CoefPair, StarThresholds

logger = logging.getLogger("agency_panel.regress")

CONSTANT = "Constant"
DEFAULT_STARS: Tuple[float, float, float] = (0.01, 0.05, 0.1)
ALIAS_TOLERANCE = 1e-10

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def two_sided_p(t, df):
    """Two-sided Student-t tail probability through the regularized incomplete beta function."""
    t = np.asarray(t, dtype=float)
    with np.errstate(invalid="ignore"):
        return special.betainc(df / 2.0, 0.5, df / (df + t * t))


def format_stars(p: float, levels: StarThresholds = DEFAULT_STARS) -> str:
    if p is None or not np.isfinite(p):
        return ""
    strict, mid, loose = levels
    if p < strict:
        return "***"
    if p < mid:
        return "**"
    if p < loose:
        return "*"
    return ""


@dataclass(frozen=True)
class ModelSpec:
    dependent: str
    regressors: Tuple[str, ...]
    fixed_effects: Tuple[str, ...] = ("year", "industry")
    include_intercept: bool = True

    def __post_init__(self):
        object.__setattr__(self, "regressors", tuple(self.regressors))
        object.__setattr__(self, "fixed_effects", tuple(self.fixed_effects))
        if self.dependent in self.regressors:
            raise ModelSyntaxError(f"dependent {self.dependent!r} also listed as a regressor")
        if len(set(self.regressors)) != len(self.regressors):
            raise ModelSyntaxError(f"repeated regressor in {list(self.regressors)}")
        for dimension in self.fixed_effects:
            if dimension not in FIXED_EFFECT_DIMENSIONS:
                raise ModelSyntaxError(f"unknown fixed-effect dimension {dimension!r}")
        if len(set(self.fixed_effects)) != len(self.fixed_effects):
            raise ModelSyntaxError(f"repeated fixed-effect dimension in {list(self.fixed_effects)}")

    @classmethod
    def parse(cls, text: str) -> "ModelSpec":
        """Parse ``DEP ~ R1 + R2 | FE1 + FE2``; the ``|`` part is optional."""
        if text.count("~") != 1:
            raise ModelSyntaxError(f"model needs exactly one '~': {text!r}")
        lhs, rhs = (part.strip() for part in text.split("~"))
        if rhs.count("|") > 1:
            raise ModelSyntaxError(f"model has more than one '|': {text!r}")
        terms, _, effects = rhs.partition("|")
        regressors = [term.strip() for term in terms.split("+")]
        dimensions = [term.strip() for term in effects.split("+")] if effects.strip() else []
        for name in [lhs, *regressors, *dimensions]:
            if not _NAME.match(name):
                raise ModelSyntaxError(f"bad term {name!r} in {text!r}")
        return cls(lhs, tuple(regressors), tuple(dimensions))

    @property
    def formula(self) -> str:
        text = f"{self.dependent} ~ {' + '.join(self.regressors)}"
        if self.fixed_effects:
            text += f" | {' + '.join(self.fixed_effects)}"
        return text


@dataclass(frozen=True, eq=False)
class FitResult:
    terms: Tuple[str, ...]
    coef: np.ndarray
    std_err: np.ndarray
    t_stat: np.ndarray
    p_value: np.ndarray
    stars: Tuple[str, ...]
    n_obs: int
    r_squared: float
    dropped_terms: Tuple[str, ...]
    df_resid: int
    rss: float
    se_type: str = "classical"
    n_clusters: Optional[int] = None
    spec: Optional[ModelSpec] = None
    fitted: np.ndarray = field(default=None, repr=False, compare=False)
    residuals: np.ndarray = field(default=None, repr=False, compare=False)

    def index(self, term: str) -> int:
        try:
            return self.terms.index(term)
        except ValueError:
            raise UnknownVariable(term) from None

    def coefficient(self, term: str) -> CoefPair:
        i = self.index(term)
        return float(self.coef[i]), float(self.p_value[i])

    def conf_int(self, term: str, level: float = 0.95) -> Tuple[float, float]:
        i = self.index(term)
        df = self.n_clusters - 1 if self.n_clusters else self.df_resid
        half = stats.t.ppf(0.5 + level / 2, df) * self.std_err[i]
        return float(self.coef[i] - half), float(self.coef[i] + half)

    def table(self) -> pd.DataFrame:
        return pd.DataFrame({
            "term": list(self.terms),
            "coef": self.coef,
            "se": self.std_err,
            "t": self.t_stat,
            "p": self.p_value,
            "stars": list(self.stars),
        })


def _dummy_block(dataset: PanelDataset, dimensions: Sequence[str]) -> Tuple[List[str], np.ndarray]:
    names: List[str] = []
    blocks = []
    for dimension in dimensions:
        levels = dataset.year_levels if dimension == "year" else dataset.industry_levels
        codes = dataset.frame[dimension].to_numpy()
        if dimension == "industry":
            codes = codes.astype(str)
        # First sorted level is the baseline
        for level in levels[1:]:
            names.append(f"{dimension}={level}")
            blocks.append((codes == level).astype(float))
    values = np.column_stack(blocks) if blocks else np.empty((len(dataset), 0))
    return names, values


def build_design(dataset: PanelDataset, spec: ModelSpec) -> Tuple[np.ndarray, VariableMatrix]:
    """y plus X = [Constant] + regressors + one dummy per non-baseline fixed-effect level."""
    if len(dataset) == 0:
        raise EmptyDataset()
    for name in (spec.dependent, *spec.regressors):
        if name not in dataset.variables:
            raise UnknownVariable(name)
    y = dataset.column(spec.dependent)
    regressors = to_matrix(dataset, spec.regressors)
    dummy_names, dummies = _dummy_block(dataset, spec.fixed_effects)

    names: List[str] = []
    blocks = []
    if spec.include_intercept:
        names.append(CONSTANT)
        blocks.append(np.ones((len(dataset), 1)))
    names.extend(regressors.column_names)
    blocks.append(regressors.values)
    names.extend(dummy_names)
    blocks.append(dummies)
    return y, VariableMatrix(tuple(names), np.hstack(blocks))


def _retained_columns(values: np.ndarray) -> np.ndarray:
    r = linalg.qr(values, mode="r")[0]
    diagonal = np.abs(np.diag(r))
    largest = diagonal.max() if diagonal.size else 0.0
    if largest == 0.0:
        raise AllColumnsAliased()
    # Unpivoted QR: |r_jj| is the part of column j not explained by the columns before it
    return np.flatnonzero(diagonal > ALIAS_TOLERANCE * largest)


def _cluster_covariance(x: np.ndarray, resid: np.ndarray, bread: np.ndarray,
                        clusters: np.ndarray, df_resid: int) -> Tuple[np.ndarray, int]:
    codes, uniques = pd.factorize(pd.Series(clusters), sort=True)
    n_groups = len(uniques)
    scores = np.zeros((n_groups, x.shape[1]))
    np.add.at(scores, codes, x * resid[:, None])
    meat = scores.T @ scores
    n = x.shape[0]
    scale = n_groups / max(n_groups - 1, 1) * (n - 1) / df_resid
    return scale * bread @ meat @ bread, n_groups


def ols_fit(y: np.ndarray, x: VariableMatrix, *, spec: Optional[ModelSpec] = None,
            intercept: Optional[bool] = None, clusters: Optional[np.ndarray] = None,
            absorbed_rank: int = 0, star_levels: StarThresholds = DEFAULT_STARS) -> FitResult:
    """Least squares through an unpivoted QR factorization; aliased columns are dropped in order."""
    y = np.asarray(y, dtype=float)
    n = x.n_rows
    if x.values.shape[1] == 0:
        raise AllColumnsAliased()

    keep = _retained_columns(x.values)
    retained = set(keep.tolist())
    dropped = tuple(name for i, name in enumerate(x.column_names) if i not in retained)
    if dropped:
        logger.warning(f"Dropped aliased terms: {list(dropped)}")
    terms = tuple(x.column_names[i] for i in keep)
    design = x.values[:, keep]
    k = design.shape[1]
    df_resid = n - k - absorbed_rank
    if df_resid <= 0:
        raise InsufficientObservations(n, k + absorbed_rank)

    q, r = linalg.qr(design, mode="economic")
    coef = linalg.solve_triangular(r, q.T @ y)
    fitted = design @ coef
    resid = y - fitted
    rss = float(resid @ resid)

    r_inv = linalg.solve_triangular(r, np.eye(k))
    bread = r_inv @ r_inv.T
    n_clusters = None
    if clusters is None:
        cov = rss / df_resid * bread
        se_type = "classical"
        df_test = df_resid
    else:
        cov, n_clusters = _cluster_covariance(design, resid, bread, np.asarray(clusters), df_resid)
        se_type = "cluster"
        df_test = max(n_clusters - 1, 1)

    std_err = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_stat = np.where(std_err > 0, coef / std_err,
                          np.where(coef == 0, 0.0, np.copysign(np.inf, coef)))
    p_value = two_sided_p(t_stat, df_test)

    if intercept is None:
        intercept = CONSTANT in x.column_names
    tss = float(((y - y.mean()) ** 2).sum()) if intercept else float(y @ y)
    r_squared = 1.0 - rss / tss if tss > 0 else (1.0 if rss == 0 else 0.0)
    r_squared = min(max(r_squared, 0.0), 1.0)

    return FitResult(
        terms=terms,
        coef=coef,
        std_err=std_err,
        t_stat=t_stat,
        p_value=p_value,
        stars=tuple(format_stars(p, star_levels) for p in p_value),
        n_obs=n,
        r_squared=r_squared,
        dropped_terms=dropped,
        df_resid=df_resid,
        rss=rss,
        se_type=se_type,
        n_clusters=n_clusters,
        spec=spec,
        fitted=fitted,
        residuals=resid,
    )


def fit_model(dataset: PanelDataset, spec: ModelSpec, cluster: Optional[str] = None,
              star_levels: StarThresholds = DEFAULT_STARS) -> FitResult:
    y, x = build_design(dataset, spec)
    clusters = dataset.frame[cluster].to_numpy() if cluster else None
    result = ols_fit(y, x, spec=spec, clusters=clusters, star_levels=star_levels)
    logger.debug(f"Fitted {spec.formula} on {result.n_obs} observations, R2={result.r_squared:.4f}")
    return result


@dataclass(frozen=True)
class WithinDesign:
    y: np.ndarray
    x: VariableMatrix
    absorbed_rank: int


def _residualize(block: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, int]:
    if block.shape[1] == 0:
        return values, 0
    keep = _retained_columns(block)
    q = linalg.qr(block[:, keep], mode="economic")[0]
    return values - q @ (q.T @ values), len(keep)


def within_demean(dataset: PanelDataset, spec: ModelSpec) -> WithinDesign:
    """Residualize y and the regressors on the intercept plus fixed-effect dummy block."""
    if len(dataset) == 0:
        raise EmptyDataset()
    for name in (spec.dependent, *spec.regressors):
        if name not in dataset.variables:
            raise UnknownVariable(name)
    _, dummies = _dummy_block(dataset, spec.fixed_effects)
    if spec.include_intercept or spec.fixed_effects:
        dummies = np.hstack([np.ones((len(dataset), 1)), dummies])
    stacked = np.column_stack([dataset.column(spec.dependent), to_matrix(dataset, spec.regressors).values])
    residual, rank = _residualize(dummies, stacked)
    return WithinDesign(residual[:, 0], VariableMatrix(spec.regressors, residual[:, 1:]), rank)


def fit_within(dataset: PanelDataset, spec: ModelSpec, cluster: Optional[str] = None,
               star_levels: StarThresholds = DEFAULT_STARS) -> FitResult:
    """Slopes from the residualized path; degrees of freedom net out the absorbed rank."""
    design = within_demean(dataset, spec)
    clusters = dataset.frame[cluster].to_numpy() if cluster else None
    return ols_fit(design.y, design.x, spec=spec, intercept=False, clusters=clusters,
                   absorbed_rank=design.absorbed_rank, star_levels=star_levels)


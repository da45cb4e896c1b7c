"""Five-model mediation battery with coefficient-comparison verdicts and mediation-effect ratios.

Models, all with the same controls and year / industry effects:
    (1) INV ~ HOLD          alpha1 = total effect
    (2) AC1 ~ HOLD          beta1  = path to the first mediator
    (3) AC2 ~ HOLD          gamma1 = path to the second mediator
    (4) INV ~ HOLD + AC1    lambda1 = direct effect, lambda2 = AC1 -> INV
    (5) INV ~ HOLD + AC2    mu1 = direct effect, mu2 = AC2 -> INV
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Mapping, NamedTuple, Optional, Tuple

from panel.panel_conditions import (
    above_factory, always_true_condition, below_factory, significant_factory, signed_significant_factory,
)
from panel.panel_core import PanelDataset
from panel.panel_errors import ConfigError, EmptyDataset, UnknownVariable, ZeroTotalEffect
from panel.panel_lookup import CONTROL_VARIABLES
from panel.panel_regress import DEFAULT_STARS, FitResult, ModelSpec, fit_model
from panel.panel_types import CoefPair, StarThresholds

logger = logging.getLogger("agency_panel.mediation")

SYMBOLS: Tuple[str, ...] = ("alpha1", "beta1", "gamma1", "lambda1", "lambda2", "mu1", "mu2")
HYPOTHESES: Tuple[str, ...] = ("H1", "H2a", "H2b", "H2c", "H2d")
MODEL_NAMES: Tuple[str, ...] = ("model1", "model2", "model3", "model4", "model5")

DEFAULT_THRESHOLDS: Dict[str, float] = {
    "alpha1": 0.01, "beta1": 0.01, "gamma1": 0.1,
    "lambda1": 0.01, "lambda2": 0.01, "mu1": 0.01, "mu2": 0.01,
}


class VerdictKind(Enum):
    PARTIAL = "PartialMediation"
    FULL = "FullMediation"
    NONE = "NoMediation"
    STEP_FAILED = "StepFailed"


@dataclass(frozen=True)
class MediationVerdict:
    kind: VerdictKind
    step: Optional[int] = None
    suppression: bool = False

    @property
    def is_mediation(self) -> bool:
        return self.kind in (VerdictKind.PARTIAL, VerdictKind.FULL)

    def __str__(self) -> str:
        if self.kind is VerdictKind.STEP_FAILED:
            return f"StepFailed({self.step})"
        if self.suppression:
            return f"{self.kind.value} (suppression)"
        return self.kind.value


class ChannelThresholds(NamedTuple):
    total: float
    path: float
    direct: float
    mediator: float


@dataclass(frozen=True)
class BatterySpec:
    outcome: str = "INV"
    treatment: str = "HOLD"
    mediators: Tuple[str, str] = ("AC1", "AC2")
    controls: Tuple[str, ...] = tuple(CONTROL_VARIABLES)
    fixed_effects: Tuple[str, ...] = ("year", "industry")
    thresholds: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    # Direction each mediator path is hypothesised to take: HOLD lowers AC1, raises AC2
    path_signs: Tuple[int, int] = (-1, 1)
    # AC1 is a classical channel, AC2 a suppression channel
    suppression_channels: Tuple[bool, bool] = (False, True)
    # Read each channel form from the fitted signs instead
    infer_channel_form: bool = False
    require_mediator_significance: bool = True
    cluster: Optional[str] = None
    star_levels: StarThresholds = DEFAULT_STARS

    def __post_init__(self):
        object.__setattr__(self, "mediators", tuple(self.mediators))
        object.__setattr__(self, "controls", tuple(self.controls))
        object.__setattr__(self, "fixed_effects", tuple(self.fixed_effects))
        object.__setattr__(self, "thresholds", {**DEFAULT_THRESHOLDS, **dict(self.thresholds)})
        if len(self.mediators) != 2:
            raise ConfigError(f"battery needs exactly two mediators, got {list(self.mediators)}")
        names = [self.outcome, self.treatment, *self.mediators, *self.controls]
        if len(set(names)) != len(names):
            raise ConfigError(f"outcome, treatment, mediators and controls overlap: {names}")

    def channel_thresholds(self, channel: int) -> ChannelThresholds:
        t = self.thresholds
        if channel == 0:
            return ChannelThresholds(t["alpha1"], t["beta1"], t["lambda1"], t["lambda2"])
        return ChannelThresholds(t["alpha1"], t["gamma1"], t["mu1"], t["mu2"])

    def channel_form(self, channel: int) -> Optional[bool]:
        return None if self.infer_channel_form else self.suppression_channels[channel]

    def model_specs(self) -> Dict[str, ModelSpec]:
        first, second = self.mediators
        head = (self.treatment,)
        return {
            "model1": ModelSpec(self.outcome, head + self.controls, self.fixed_effects),
            "model2": ModelSpec(first, head + self.controls, self.fixed_effects),
            "model3": ModelSpec(second, head + self.controls, self.fixed_effects),
            "model4": ModelSpec(self.outcome, head + (first,) + self.controls, self.fixed_effects),
            "model5": ModelSpec(self.outcome, head + (second,) + self.controls, self.fixed_effects),
        }


def classify_mediation(alpha1: CoefPair, path_coef: CoefPair, direct_coef: CoefPair, mediator_coef: CoefPair,
                       thresholds: ChannelThresholds, path_sign: int = 0,
                       require_mediator_significance: bool = True,
                       suppression: Optional[bool] = False) -> MediationVerdict:
    """Stepwise coefficient-comparison test for one mediator channel.

    A classical channel mediates when its direct coefficient falls below alpha1 (or loses
    significance). A suppression channel mediates when its direct coefficient rises above
    alpha1. suppression=None reads the form from the sign of path x mediator instead.
    """
    total_step = signed_significant_factory(1, thresholds.total)
    path_step = signed_significant_factory(path_sign, thresholds.path)
    if require_mediator_significance:
        mediator_step = significant_factory(thresholds.mediator)
    else:
        mediator_step = always_true_condition()

    if not total_step(alpha1):
        return MediationVerdict(VerdictKind.STEP_FAILED, step=1)
    if not path_step(path_coef):
        return MediationVerdict(VerdictKind.STEP_FAILED, step=2)
    if not mediator_step(mediator_coef):
        return MediationVerdict(VerdictKind.STEP_FAILED, step=3)

    direct_positive = signed_significant_factory(1, thresholds.direct)
    if suppression is None:
        suppression = path_coef[0] * mediator_coef[0] < 0

    if suppression:
        if not direct_positive(direct_coef):
            return MediationVerdict(VerdictKind.STEP_FAILED, step=4, suppression=True)
        if above_factory(alpha1[0])(direct_coef):
            return MediationVerdict(VerdictKind.PARTIAL, suppression=True)
        return MediationVerdict(VerdictKind.NONE, suppression=True)

    if not significant_factory(thresholds.direct)(direct_coef):
        return MediationVerdict(VerdictKind.FULL)
    if not direct_positive(direct_coef):
        return MediationVerdict(VerdictKind.STEP_FAILED, step=4)
    if below_factory(alpha1[0])(direct_coef):
        return MediationVerdict(VerdictKind.PARTIAL)
    return MediationVerdict(VerdictKind.NONE)


def mediation_ratio(path_a: float, path_b: float, total_effect: float) -> float:
    """Share of the total effect carried by the channel: a * b / total."""
    if total_effect == 0:
        raise ZeroTotalEffect()
    return path_a * path_b / total_effect


def hypothesis_verdicts(symbols: Mapping[str, CoefPair], verdict_ac1: MediationVerdict,
                        verdict_ac2: MediationVerdict,
                        thresholds: Optional[Mapping[str, float]] = None) -> Dict[str, bool]:
    t = {**DEFAULT_THRESHOLDS, **dict(thresholds or {})}
    return {
        "H1": signed_significant_factory(1, t["alpha1"])(symbols["alpha1"]),
        "H2a": signed_significant_factory(-1, t["beta1"])(symbols["beta1"]),
        "H2b": verdict_ac1.is_mediation and symbols["lambda2"][0] < 0,
        "H2c": signed_significant_factory(1, t["gamma1"])(symbols["gamma1"]),
        "H2d": (verdict_ac2.kind is VerdictKind.PARTIAL and verdict_ac2.suppression
                and symbols["mu2"][0] < 0),
    }


@dataclass(frozen=True, eq=False)
class MediationReport:
    spec: BatterySpec
    fits: Dict[str, FitResult]
    alpha1: CoefPair
    beta1: CoefPair
    gamma1: CoefPair
    lambda1: CoefPair
    lambda2: CoefPair
    mu1: CoefPair
    mu2: CoefPair
    verdict_ac1: MediationVerdict
    verdict_ac2: MediationVerdict
    ratio_ac1: Optional[float]
    ratio_ac2: Optional[float]
    hypothesis_verdicts: Dict[str, bool]

    @property
    def symbols(self) -> Dict[str, CoefPair]:
        return {name: getattr(self, name) for name in SYMBOLS}

    @property
    def n_obs(self) -> int:
        return self.fits["model1"].n_obs

    @property
    def dominant_channel(self) -> Optional[str]:
        if self.ratio_ac1 is None or self.ratio_ac2 is None:
            return None
        first, second = self.spec.mediators
        return first if abs(self.ratio_ac1) >= abs(self.ratio_ac2) else second


def _safe_ratio(path_a: CoefPair, path_b: CoefPair, total: CoefPair) -> Optional[float]:
    try:
        return mediation_ratio(path_a[0], path_b[0], total[0])
    except ZeroTotalEffect:
        logger.warning("Total effect is exactly zero, mediation ratio left undefined")
        return None


def run_battery(dataset: PanelDataset, spec: Optional[BatterySpec] = None,
                workers: Optional[int] = None) -> MediationReport:
    spec = spec or BatterySpec()
    if len(dataset) == 0:
        raise EmptyDataset()
    for name in (spec.outcome, spec.treatment, *spec.mediators, *spec.controls):
        if name not in dataset.variables:
            raise UnknownVariable(name)

    specs = spec.model_specs()
    with ThreadPoolExecutor(max_workers=workers or len(specs)) as pool:
        futures = {name: pool.submit(fit_model, dataset, model, spec.cluster, spec.star_levels)
                   for name, model in specs.items()}
        fits = {name: futures[name].result() for name in MODEL_NAMES}
    logger.info(f"Fitted the five-model battery on {fits['model1'].n_obs} observations")

    first, second = spec.mediators
    hold = spec.treatment
    symbols = {
        "alpha1": fits["model1"].coefficient(hold),
        "beta1": fits["model2"].coefficient(hold),
        "gamma1": fits["model3"].coefficient(hold),
        "lambda1": fits["model4"].coefficient(hold),
        "lambda2": fits["model4"].coefficient(first),
        "mu1": fits["model5"].coefficient(hold),
        "mu2": fits["model5"].coefficient(second),
    }
    verdict_ac1 = classify_mediation(symbols["alpha1"], symbols["beta1"], symbols["lambda1"], symbols["lambda2"],
                                     spec.channel_thresholds(0), spec.path_signs[0],
                                     spec.require_mediator_significance, spec.channel_form(0))
    verdict_ac2 = classify_mediation(symbols["alpha1"], symbols["gamma1"], symbols["mu1"], symbols["mu2"],
                                     spec.channel_thresholds(1), spec.path_signs[1],
                                     spec.require_mediator_significance, spec.channel_form(1))
    hypotheses = hypothesis_verdicts(symbols, verdict_ac1, verdict_ac2, spec.thresholds)
    logger.info(f"Verdicts: {first}={verdict_ac1}, {second}={verdict_ac2}")

    return MediationReport(
        spec=spec,
        fits=fits,
        verdict_ac1=verdict_ac1,
        verdict_ac2=verdict_ac2,
        ratio_ac1=_safe_ratio(symbols["beta1"], symbols["lambda2"], symbols["alpha1"]),
        ratio_ac2=_safe_ratio(symbols["gamma1"], symbols["mu2"], symbols["alpha1"]),
        hypothesis_verdicts=hypotheses,
        **symbols,
    )

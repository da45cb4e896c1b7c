"""Next-period outcome rerun of the total-effect model and the two mediator-adjusted models."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from panel.panel_conditions import signed_significant_factory
from panel.panel_core import PanelDataset
from panel.panel_errors import UnknownVariable
from panel.panel_mediation import BatterySpec
from panel.panel_regress import FitResult, ModelSpec, fit_model

logger = logging.getLogger("agency_panel.robustness")

ROBUST_COLUMNS: Tuple[str, ...] = ("lead1", "lead2", "lead3")


def lead_name(variable: str) -> str:
    return f"L{variable}"


def lead_outcome(dataset: PanelDataset, variable: str = "INV", name: Optional[str] = None) -> PanelDataset:
    """Add L<variable>(firm, t) = variable(firm, t + 1); rows without an exact t + 1 successor are dropped."""
    if variable not in dataset.variables:
        raise UnknownVariable(variable)
    name = name or lead_name(variable)
    frame = dataset.frame
    firm = frame.groupby("firm_id", sort=False)
    next_year = firm["year"].shift(-1)
    next_value = firm[variable].shift(-1)
    has_successor = next_year == frame["year"] + 1

    led = frame.loc[has_successor].copy()
    led[name] = next_value.loc[has_successor].astype(float)
    logger.info(f"Lead of {variable}: kept {len(led)} of {len(frame)} records")
    return dataset.with_frame(led.reset_index(drop=True))


@dataclass(frozen=True, eq=False)
class RobustnessReport:
    outcome: str
    fits: Dict[str, FitResult]
    n_source: int
    hold_significant: bool
    agency_costs_negative: bool

    @property
    def n_obs(self) -> int:
        return self.fits[ROBUST_COLUMNS[0]].n_obs


def run_robustness(dataset: PanelDataset, spec: Optional[BatterySpec] = None,
                   workers: Optional[int] = None) -> RobustnessReport:
    spec = spec or BatterySpec()
    led = lead_outcome(dataset, spec.outcome)
    outcome = lead_name(spec.outcome)
    first, second = spec.mediators
    head = (spec.treatment,)
    models = {
        "lead1": ModelSpec(outcome, head + spec.controls, spec.fixed_effects),
        "lead2": ModelSpec(outcome, head + (first,) + spec.controls, spec.fixed_effects),
        "lead3": ModelSpec(outcome, head + (second,) + spec.controls, spec.fixed_effects),
    }
    with ThreadPoolExecutor(max_workers=workers or len(models)) as pool:
        futures = {key: pool.submit(fit_model, led, model, spec.cluster, spec.star_levels)
                   for key, model in models.items()}
        fits = {key: futures[key].result() for key in ROBUST_COLUMNS}

    hold_step = signed_significant_factory(1, spec.thresholds["alpha1"])
    hold_significant = all(hold_step(fit.coefficient(spec.treatment)) for fit in fits.values())
    agency_costs_negative = (
        signed_significant_factory(-1, spec.thresholds["lambda2"])(fits["lead2"].coefficient(first))
        and signed_significant_factory(-1, spec.thresholds["mu2"])(fits["lead3"].coefficient(second))
    )
    logger.info(f"Lead rerun on {len(led)} observations: HOLD robust={hold_significant}, "
                f"agency costs negative={agency_costs_negative}")
    return RobustnessReport(outcome, fits, len(dataset), hold_significant, agency_costs_negative)

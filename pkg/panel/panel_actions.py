"""One handler per subcommand. Each takes the parsed arguments and returns the text to print."""
import sys
import logging
from argparse import Namespace
from dataclasses import replace
from pathlib import Path
from typing import Tuple

from adapters.config_adapter import dump_dgp_params, load_dgp_params
from adapters.csv_adapter import emit_csv, load_csv
from adapters.report_adapter import (
    render_correlation, render_descriptive, render_filter_log, render_fit, render_mediation, render_robustness,
    suffix_for,
)
from panel.panel_core import PanelDataset
from panel.panel_errors import OutputError
from panel.panel_ingest import FilterLog, construct_variables, filter_sample
from panel.panel_lookup import DERIVED_VARIABLES
from panel.panel_mediation import BatterySpec, run_battery
from panel.panel_prep import WinsorSpec, correlate, describe, winsorize
from panel.panel_regress import ModelSpec, fit_model, fit_within
from panel.panel_robustness import run_robustness
from panel.panel_synth import DgpParams, generate_records

logger = logging.getLogger("agency_panel.actions")

# --cluster choice -> panel column
CLUSTER_COLUMNS = {"firm": "firm_id"}


def _cluster_column(args: Namespace):
    return CLUSTER_COLUMNS[args.cluster] if args.cluster else None


def _battery_spec(args: Namespace) -> BatterySpec:
    return BatterySpec(cluster=_cluster_column(args), star_levels=args.stars)


def _write_text(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as error:
        raise OutputError(path, error) from None
    return path


def load_panel(args: Namespace) -> Tuple[PanelDataset, FilterLog]:
    """CSV -> sample screens -> analysis variables -> annual winsorization (unless --no-winsor)."""
    records = load_csv(args.input)
    screened, log = filter_sample(records)
    dataset = construct_variables(screened, log)
    if not args.no_winsor:
        dataset = winsorize(dataset, WinsorSpec(args.winsor_lower, args.winsor_upper))
    if args.filter_log:
        sys.stderr.write(render_filter_log(log, args.format))
    return dataset, log


def action_describe(args: Namespace) -> str:
    dataset, _ = load_panel(args)
    rows = describe(dataset, args.vars or DERIVED_VARIABLES)
    return render_descriptive(rows, args.format, labels=args.labels)


def action_correlate(args: Namespace) -> str:
    dataset, _ = load_panel(args)
    matrix = correlate(dataset, args.vars or DERIVED_VARIABLES)
    return render_correlation(matrix, args.format, args.stars)


def action_fit(args: Namespace) -> str:
    spec = ModelSpec.parse(args.model)
    dataset, _ = load_panel(args)
    fit = fit_within if args.within else fit_model
    result = fit(dataset, spec, _cluster_column(args), args.stars)
    return render_fit(result, args.format, args.stars)


def action_mediate(args: Namespace) -> str:
    dataset, _ = load_panel(args)
    report = run_battery(dataset, _battery_spec(args), args.workers)
    return render_mediation(report, args.format, args.stars)


def action_robust(args: Namespace) -> str:
    dataset, _ = load_panel(args)
    spec = _battery_spec(args)
    report = run_robustness(dataset, spec, args.workers)
    return render_robustness(report, args.format, args.stars, (spec.treatment, *spec.mediators, *spec.controls))


def action_synth(args: Namespace) -> str:
    params = load_dgp_params(args.config) if args.config else DgpParams()
    if args.seed is not None:
        params = replace(params, seed=args.seed)
    out = Path(args.out)
    records = generate_records(params)
    try:
        emit_csv(records, out)
        truth = dump_dgp_params(params, out.with_suffix(".dgp"))
    except OSError as error:
        raise OutputError(out, error) from None
    return f"{out}\n{truth}\n"


def action_run(args: Namespace) -> str:
    out = Path(args.out)
    dataset, log = load_panel(args)
    spec = _battery_spec(args)
    suffix = suffix_for(args.format)

    reports = {
        "descriptive": render_descriptive(describe(dataset, DERIVED_VARIABLES), args.format, labels=args.labels),
        "correlation": render_correlation(correlate(dataset, DERIVED_VARIABLES), args.format, args.stars),
        "mediation": render_mediation(run_battery(dataset, spec, args.workers), args.format, args.stars),
        "robustness": render_robustness(run_robustness(dataset, spec, args.workers), args.format, args.stars,
                                        (spec.treatment, *spec.mediators, *spec.controls)),
    }
    written = [_write_text(out / "filter_log.csv", render_filter_log(log, "csv"))]
    written.extend(_write_text(out / f"{name}.{suffix}", text) for name, text in reports.items())
    logger.info(f"Wrote {len(written)} report files to {out}")
    return "".join(f"{path}\n" for path in written)

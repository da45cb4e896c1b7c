"""Text / CSV / JSON renderings for every report the pipeline produces."""
import json
import math
from dataclasses import asdict
from typing import Dict, List, Optional, Sequence

import pandas as pd

from panel.panel_ingest import FilterLog
from panel.panel_lookup import describe_variable
from panel.panel_mediation import HYPOTHESES, MediationReport, MediationVerdict
from panel.panel_prep import COLLINEARITY_SCREEN, CorrelationMatrix, DescriptiveRow
from panel.panel_regress import CONSTANT, DEFAULT_STARS, FitResult, format_stars
from panel.panel_robustness import ROBUST_COLUMNS, RobustnessReport
from panel.panel_types import StarThresholds

FORMATS = ("text", "csv", "json")


def _coef_text(value: float) -> str:
    return f"{value:.3g}"


def _t_text(value: float) -> str:
    return f"({value:.4g})"


def _finite(value):
    """Non-finite floats become null; JSON has no Infinity or NaN."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _finite(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(item) for item in value]
    return value


def _json(payload) -> str:
    return json.dumps(_finite(payload), indent=2, allow_nan=False) + "\n"


def _fe_label(fit: FitResult) -> str:
    effects = fit.spec.fixed_effects if fit.spec else ()
    if set(effects) == {"year", "industry"}:
        return "yes"
    return "+".join(effects) if effects else "no"


def _term_order(fits: Sequence[FitResult], order: Optional[Sequence[str]]) -> List[str]:
    seen: List[str] = []
    for fit in fits:
        for term in fit.terms:
            if term != CONSTANT and "=" not in term and term not in seen:
                seen.append(term)
    if order:
        ranked = [term for term in order if term in seen]
        seen = ranked + [term for term in seen if term not in ranked]
    if any(CONSTANT in fit.terms for fit in fits):
        seen.append(CONSTANT)
    return seen


# --- regression tables -------------------------------------------------------------

def regression_table(fits: Sequence[FitResult], order: Optional[Sequence[str]] = None) -> pd.DataFrame:
    """Two rows per term (coefficient + stars, then the t-statistic in parentheses) and the footer rows."""
    terms = _term_order(fits, order)
    labels: List[str] = []
    for term in terms:
        labels.extend([term, ""])
    labels.extend(["Year/Ind", "Observations", "R-squared"])

    columns = {}
    for i, fit in enumerate(fits, start=1):
        cells: List[str] = []
        for term in terms:
            if term in fit.terms:
                j = fit.index(term)
                cells.extend([_coef_text(fit.coef[j]) + fit.stars[j], _t_text(fit.t_stat[j])])
            else:
                cells.extend(["", ""])
        cells.extend([_fe_label(fit), f"{fit.n_obs:,}", f"{fit.r_squared:.3f}"])
        dependent = fit.spec.dependent if fit.spec else "y"
        columns[(f"({i})", dependent)] = cells

    table = pd.DataFrame(columns, index=labels)
    table.columns = pd.MultiIndex.from_tuples(list(columns), names=["", "VARIABLES"])
    return table


def _regression_text(fits: Sequence[FitResult], order: Optional[Sequence[str]], levels: StarThresholds) -> str:
    strict, mid, loose = levels
    body = regression_table(fits, order).to_string()
    note = f"Note: ***, ** and * imply p<{strict:g}, p<{mid:g} and p<{loose:g}; t-statistics in parentheses."
    if any(fit.se_type == "cluster" for fit in fits):
        note += " Standard errors clustered by firm."
    return body + "\n" + note + "\n"


def _regression_csv(fits: Dict[str, FitResult]) -> str:
    frames = []
    for name, fit in fits.items():
        table = fit.table()
        if len(fits) > 1:
            table.insert(0, "model", name)
        frames.append(table)
    return pd.concat(frames, ignore_index=True).to_csv(index=False, lineterminator="\n")


def fit_to_dict(fit: FitResult) -> Dict[str, object]:
    return {
        "spec": asdict(fit.spec) if fit.spec else None,
        "formula": fit.spec.formula if fit.spec else None,
        "terms": list(fit.terms),
        "coef": fit.coef.tolist(),
        "std_err": fit.std_err.tolist(),
        "t_stat": fit.t_stat.tolist(),
        "p_value": fit.p_value.tolist(),
        "stars": list(fit.stars),
        "conf_int_95": [list(fit.conf_int(term)) for term in fit.terms],
        "n_obs": fit.n_obs,
        "r_squared": fit.r_squared,
        "dropped_terms": list(fit.dropped_terms),
        "df_resid": fit.df_resid,
        "rss": fit.rss,
        "se_type": fit.se_type,
        "n_clusters": fit.n_clusters,
    }


def render_fit(fit: FitResult, fmt: str = "text", levels: StarThresholds = DEFAULT_STARS) -> str:
    if fmt == "csv":
        return _regression_csv({"model": fit})
    if fmt == "json":
        return _json(fit_to_dict(fit))
    return _regression_text([fit], None, levels)


# --- mediation ---------------------------------------------------------------------------

def _verdict_dict(verdict: MediationVerdict) -> Dict[str, object]:
    return {"verdict": str(verdict), "kind": verdict.kind.value, "step": verdict.step,
            "suppression": verdict.suppression}


def _percent(ratio: Optional[float]) -> str:
    return "undefined" if ratio is None else f"{ratio * 100:.1f}%"


def mediation_to_dict(report: MediationReport) -> Dict[str, object]:
    spec = report.spec
    return {
        "spec": {
            "outcome": spec.outcome, "treatment": spec.treatment, "mediators": list(spec.mediators),
            "controls": list(spec.controls), "fixed_effects": list(spec.fixed_effects),
            "thresholds": dict(spec.thresholds), "path_signs": list(spec.path_signs),
            "suppression_channels": list(spec.suppression_channels), "infer_channel_form": spec.infer_channel_form,
            "require_mediator_significance": spec.require_mediator_significance, "cluster": spec.cluster,
        },
        "fits": {name: fit_to_dict(fit) for name, fit in report.fits.items()},
        "symbols": {name: {"value": value, "p": p} for name, (value, p) in report.symbols.items()},
        "verdict_ac1": _verdict_dict(report.verdict_ac1),
        "verdict_ac2": _verdict_dict(report.verdict_ac2),
        "ratio_ac1": report.ratio_ac1,
        "ratio_ac2": report.ratio_ac2,
        "dominant_channel": report.dominant_channel,
        "hypothesis_verdicts": dict(report.hypothesis_verdicts),
        "n_obs": report.n_obs,
    }


def _mediation_text(report: MediationReport, levels: StarThresholds) -> str:
    spec = report.spec
    first, second = spec.mediators
    order = (spec.treatment, *spec.mediators, *spec.controls)
    lines = [_regression_text(list(report.fits.values()), order, levels), "Hypotheses"]
    for name in HYPOTHESES:
        lines.append(f"  {name}: {'supported' if report.hypothesis_verdicts[name] else 'unsupported'}")
    lines.append("")
    lines.append("Mediation effects")
    lines.append(f"  {first}: {_percent(report.ratio_ac1)} ({report.verdict_ac1})")
    lines.append(f"  {second}: {_percent(report.ratio_ac2)} ({report.verdict_ac2})")
    if report.dominant_channel:
        lines.append(f"  Dominant channel: {report.dominant_channel}")
    return "\n".join(lines) + "\n"


def render_mediation(report: MediationReport, fmt: str = "text", levels: StarThresholds = DEFAULT_STARS) -> str:
    if fmt == "csv":
        return _regression_csv(report.fits)
    if fmt == "json":
        return _json(mediation_to_dict(report))
    return _mediation_text(report, levels)


# --- robustness ---------------------------------------------------------------------------

def robustness_to_dict(report: RobustnessReport) -> Dict[str, object]:
    return {
        "outcome": report.outcome,
        "fits": {name: fit_to_dict(fit) for name, fit in report.fits.items()},
        "n_source": report.n_source,
        "n_obs": report.n_obs,
        "hold_significant": report.hold_significant,
        "agency_costs_negative": report.agency_costs_negative,
    }


def render_robustness(report: RobustnessReport, fmt: str = "text", levels: StarThresholds = DEFAULT_STARS,
                      order: Optional[Sequence[str]] = None) -> str:
    if fmt == "csv":
        return _regression_csv(report.fits)
    if fmt == "json":
        return _json(robustness_to_dict(report))
    fits = [report.fits[name] for name in ROBUST_COLUMNS]
    lines = [
        _regression_text(fits, order, levels),
        f"Sample: {report.n_obs:,} of {report.n_source:,} firm-years have a next-year observation",
        f"HOLD significant in every column: {'yes' if report.hold_significant else 'no'}",
        f"Agency costs significantly negative: {'yes' if report.agency_costs_negative else 'no'}",
    ]
    return "\n".join(lines) + "\n"


# --- descriptive statistics and correlations ---------------------------------------------

def descriptive_table(rows: Sequence[DescriptiveRow], labels: bool = False) -> pd.DataFrame:
    table = pd.DataFrame({
        "Variable Name": [row.variable for row in rows],
        "Observation": [f"{row.n:,}" for row in rows],
        "Mean": [f"{row.mean:.4g}" for row in rows],
        "Std Dev.": [f"{row.std_dev:.4g}" for row in rows],
        "Min": [f"{row.min:.4g}" for row in rows],
        "Max": [f"{row.max:.4g}" for row in rows],
    })
    if labels:
        table["Definition"] = [describe_variable(row.variable) for row in rows]
    return table


def render_descriptive(rows: Sequence[DescriptiveRow], fmt: str = "text", labels: bool = False) -> str:
    if fmt == "csv":
        frame = pd.DataFrame([asdict(row) for row in rows])
        return frame.to_csv(index=False, lineterminator="\n")
    if fmt == "json":
        return _json([asdict(row) for row in rows])
    return descriptive_table(rows, labels).to_string(index=False) + "\n"


def correlation_table(matrix: CorrelationMatrix, levels: StarThresholds = DEFAULT_STARS) -> pd.DataFrame:
    names = list(matrix.variables)
    cells = []
    for i in range(len(names)):
        row = []
        for j in range(len(names)):
            if j > i:
                row.append("")
            elif j == i:
                row.append("1")
            else:
                row.append(f"{matrix.r[i, j]:.3f}{format_stars(matrix.p[i, j], levels)}")
        cells.append(row)
    return pd.DataFrame(cells, index=names, columns=names)


def render_correlation(matrix: CorrelationMatrix, fmt: str = "text", levels: StarThresholds = DEFAULT_STARS) -> str:
    names = list(matrix.variables)
    pairs = [(names[i], names[j], float(matrix.r[i, j]), float(matrix.p[i, j]))
             for i in range(len(names)) for j in range(i)]
    if fmt == "csv":
        frame = pd.DataFrame(pairs, columns=["var1", "var2", "r", "p"])
        frame["stars"] = [format_stars(p, levels) for p in frame["p"]]
        return frame.to_csv(index=False, lineterminator="\n")
    if fmt == "json":
        return _json({
            "variables": names,
            "r": matrix.r.tolist(),
            "p": matrix.p.tolist(),
            "n": matrix.n,
            "max_offdiagonal": matrix.max_offdiagonal,
            "below_collinearity_screen": matrix.below_collinearity_screen,
        })
    screen = "yes" if matrix.below_collinearity_screen else "no"
    return (correlation_table(matrix, levels).to_string() + "\n"
            + f"Observations: {matrix.n:,}\n"
            + f"Largest |r| off the diagonal: {matrix.max_offdiagonal:.3f} (below {COLLINEARITY_SCREEN}: {screen})\n")


def render_filter_log(log: FilterLog, fmt: str = "text") -> str:
    if fmt == "csv":
        frame = pd.DataFrame(list(log.counts.items()), columns=["reason", "count"])
        return frame.to_csv(index=False, lineterminator="\n")
    if fmt == "json":
        return _json({"counts": dict(log.counts), "total_removed": log.total_removed,
                      "zero_denominators": [str(issue) for issue in log.issues]})
    return log.summary() + "\n"


def suffix_for(fmt: str) -> str:
    return {"text": "txt", "csv": "csv", "json": "json"}[fmt]


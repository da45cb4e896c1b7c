import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

from dotenv import dotenv_values

from panel.panel_errors import ConfigError
from panel.panel_synth import EQUATIONS, DgpParams

logger = logging.getLogger("agency_panel.config")

PathLike = Union[str, Path]

_SCALARS = {"direct_effect": float, "a1": float, "b1": float, "a2": float, "b2": float,
            "n_firms": int, "n_industries": int, "seed": int}
_PER_EQUATION = ("intercept", "fe_scale", "noise_sd")
_FIELD_FOR = {"intercept": "intercepts", "fe_scale": "fe_scale", "noise_sd": "noise_sd"}


def _parse_years(text: str) -> Tuple[int, int]:
    low, sep, high = text.partition("-")
    if not sep:
        raise ValueError(text)
    return int(low), int(high)


def _convert(key: str, kind, text: str):
    try:
        return kind(text)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value {text!r} for {key}") from None


def load_dgp_params(path: PathLike) -> DgpParams:
    """Read DgpParams from a plain ``key = value`` file."""
    if not Path(path).is_file():
        raise ConfigError(f"config file {path} not found")
    values = dotenv_values(path)
    kwargs: Dict[str, object] = {}
    nested: Dict[str, Dict] = {"intercepts": {}, "fe_scale": {}, "noise_sd": {}, "control_effects": {}}

    for key, text in values.items():
        text = (text or "").strip()
        parts = key.split(".")
        if key in _SCALARS:
            kwargs[key] = _convert(key, _SCALARS[key], text)
        elif key == "years":
            kwargs["years"] = _convert(key, _parse_years, text)
        elif len(parts) == 2 and parts[0] in _PER_EQUATION and parts[1] in EQUATIONS:
            nested[_FIELD_FOR[parts[0]]][parts[1]] = _convert(key, float, text)
        elif len(parts) == 3 and parts[0] == "control_effect" and parts[1] in EQUATIONS:
            nested["control_effects"].setdefault(parts[1], {})[parts[2]] = _convert(key, float, text)
        else:
            raise ConfigError(f"unknown configuration key {key!r} in {path}")

    params = DgpParams(**kwargs, **nested)
    logger.info(f"Loaded DGP parameters from {path}")
    return params


def dgp_items(params: DgpParams) -> List[Tuple[str, str]]:
    items = {
        "n_firms": str(params.n_firms),
        "years": f"{params.years[0]}-{params.years[1]}",
        "direct_effect": repr(params.direct_effect),
        "a1": repr(params.a1),
        "b1": repr(params.b1),
        "a2": repr(params.a2),
        "b2": repr(params.b2),
        "n_industries": str(params.n_industries),
        "seed": str(params.seed),
    }
    for eq in EQUATIONS:
        items[f"intercept.{eq}"] = repr(params.intercepts[eq])
        items[f"fe_scale.{eq}"] = repr(params.fe_scale[eq])
        items[f"noise_sd.{eq}"] = repr(params.noise_sd[eq])
        for control, value in params.control_effects.get(eq, {}).items():
            items[f"control_effect.{eq}.{control}"] = repr(value)
    return sorted(items.items())


def dump_dgp_params(params: DgpParams, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# synthetic panel ground truth"]
    lines.extend(f"{key} = {value}" for key, value in dgp_items(params))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path

from typing import Dict, List, Tuple

# symbol -> (category, definition)
variables_lookup: Dict[str, Tuple[str, str]] = {
    "INV": ("explained", "R&D investment / Total assets"),
    "HOLD": ("explanatory", "Shares held by executives / Total shares"),
    "AC1": ("mediator", "Management expenses / Main business income"),
    "AC2": ("mediator", "Other receivables / Total assets"),
    "AGE": ("control", "Years since establishment"),
    "SIZE": ("control", "ln(Total assets)"),
    "TQ": ("control", "Tobin's Q"),
    "NCPS": ("control", "Net cash flow per share"),
    "GROWTH": ("control", "Growth rate of main business income"),
    "LOSS": ("control", "1 if year-end loss, otherwise 0"),
    "P": ("control", "ln(average compensation of the top three executives)"),
    "DUAL": ("control", "1 if chairman and CEO are the same person, otherwise 0"),
}

DERIVED_VARIABLES: List[str] = list(variables_lookup)
CONTROL_VARIABLES: List[str] = [name for name, (group, _) in variables_lookup.items() if group == "control"]
CONTINUOUS_VARIABLES: List[str] = ["INV", "HOLD", "AC1", "AC2", "SIZE", "TQ", "NCPS", "GROWTH", "P", "AGE"]
FIXED_EFFECT_DIMENSIONS: Dict[str, str] = {"year": "year", "industry": "industry"}


def describe_variable(name: str) -> str:
    return variables_lookup.get(name, ("", name))[1]

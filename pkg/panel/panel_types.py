from argparse import Namespace
from typing import Callable, Mapping, Sequence, Tuple

# (value, p) pair as read off a FitResult row
CoefPair = Tuple[float, float]
CoefCondition = Callable[[CoefPair], bool]

YearRange = Tuple[int, int]
StarThresholds = Sequence[float]

# subcommand name -> handler(parsed args) -> rendered report
Action = Callable[[Namespace], str]
ActionTable = Mapping[str, Action]

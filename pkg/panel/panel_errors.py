from typing import Iterable, Sequence, Tuple


class PanelError(Exception):
    exit_code: int = 1


class UsageError(PanelError):
    exit_code = 1


class ModelSyntaxError(UsageError):
    pass


class ConfigError(UsageError):
    pass


class DataError(PanelError):
    exit_code = 2


class DuplicateKey(DataError):
    def __init__(self, collisions: Iterable[Tuple[str, int]]):
        self.collisions: Sequence[Tuple[str, int]] = sorted(set(collisions))
        listed = ", ".join(f"({firm_id}, {year})" for firm_id, year in self.collisions)
        super().__init__(f"duplicate (firm_id, year) keys: {listed}")


class UnknownVariable(DataError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown variable {name!r}")


class SchemaMismatch(DataError):
    def __init__(self, missing: Sequence[str] = (), unknown: Sequence[str] = ()):
        self.missing = list(missing)
        self.unknown = list(unknown)
        parts = []
        if self.missing:
            parts.append(f"missing columns {self.missing}")
        if self.unknown:
            parts.append(f"unknown columns {self.unknown}")
        super().__init__("; ".join(parts) or "header does not match the input schema")


class ParseError(DataError):
    def __init__(self, row: int, column: str, value: str = ""):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"cannot parse {value!r} in row {row}, column {column}")


class EmptyDataset(DataError):
    def __init__(self, message: str = "dataset has no observations"):
        super().__init__(message)


class GroupTooSmall(DataError):
    def __init__(self, year, variable: str, n: int):
        self.year = year
        self.variable = variable
        self.n = n
        super().__init__(f"group year={year} variable={variable} has {n} observation(s), need at least 2")


class ZeroVariance(DataError):
    def __init__(self, variable: str):
        self.variable = variable
        super().__init__(f"variable {variable!r} has zero variance")


class NumericalError(PanelError):
    exit_code = 3


class InsufficientObservations(NumericalError):
    def __init__(self, n_obs: int, n_params: int):
        self.n_obs = n_obs
        self.n_params = n_params
        super().__init__(f"{n_obs} observations for {n_params} retained parameters")


class AllColumnsAliased(NumericalError):
    def __init__(self):
        super().__init__("every design column is aliased")


class ZeroTotalEffect(NumericalError):
    def __init__(self):
        super().__init__("total effect is zero, mediation ratio undefined")


class DenominatorZero(PanelError):
    """Non-fatal: the record is dropped and counted, never raised out of construct_variables."""

    def __init__(self, firm_id: str, year: int, field: str):
        self.firm_id = firm_id
        self.year = year
        self.field = field
        super().__init__(f"zero {field} for ({firm_id}, {year})")


class OutputError(UsageError):
    def __init__(self, path, reason: OSError):
        self.path = path
        super().__init__(f"cannot write {path}: {reason.strerror or reason}")

import logging
from pathlib import Path
from typing import Callable, Iterable, List, Union

import pandas as pd

from panel.panel_core import (
    FirmYearRecord, PanelDataset, RAW_COLUMNS, TEXT_COLUMNS, INTEGER_COLUMNS,
    frame_to_records, records_to_frame,
)
from panel.panel_errors import DataError, SchemaMismatch, ParseError

logger = logging.getLogger("agency_panel.csv")

PathLike = Union[str, Path]


def _parse_column(name: str, cells: List[str], parse: Callable[[str], object], required: bool) -> List[object]:
    parsed = []
    for row, text in enumerate(cells, start=1):
        if text == "":
            if required:
                raise ParseError(row, name, text)
            parsed.append(None)
            continue
        try:
            parsed.append(parse(text))
        except ValueError:
            raise ParseError(row, name, text) from None
    return parsed


def _parse_int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(text)
    return int(value)


def load_csv(path: PathLike) -> List[FirmYearRecord]:
    """Read the raw firm-year schema. Blank cells become missing values."""
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (OSError, UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as error:
        raise DataError(f"cannot read {path}: {error}") from None
    header = [name.strip() for name in raw.columns]
    missing = [name for name in RAW_COLUMNS if name not in header]
    unknown = [name for name in header if name not in RAW_COLUMNS]
    if missing or unknown:
        raise SchemaMismatch(missing, unknown)
    raw.columns = header

    columns = {}
    for name in RAW_COLUMNS:
        cells = [cell.strip() for cell in raw[name].tolist()]
        if name in TEXT_COLUMNS:
            columns[name] = _parse_column(name, cells, str, required=name == "firm_id")
        elif name in INTEGER_COLUMNS:
            columns[name] = _parse_column(name, cells, _parse_int, required=name == "year")
        else:
            columns[name] = _parse_column(name, cells, float, required=False)

    records = [FirmYearRecord(**dict(zip(RAW_COLUMNS, values))) for values in zip(*columns.values())]
    logger.info(f"Loaded {len(records)} firm-year records from {path}")
    return records


def _format_cell(value) -> str:
    if value is None or (isinstance(value, float) and value != value):
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(records: Union[PanelDataset, Iterable[FirmYearRecord], pd.DataFrame], path: PathLike) -> Path:
    """Write records in the exact ingest schema; load_csv reads them back unchanged."""
    if isinstance(records, PanelDataset):
        rows = records.raw_records()
    elif isinstance(records, pd.DataFrame):
        rows = frame_to_records(records_to_frame(records))
    else:
        rows = list(records)
    table = pd.DataFrame(
        [[_format_cell(getattr(record, name)) for name in RAW_COLUMNS] for record in rows],
        columns=RAW_COLUMNS,
        dtype=str,
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    logger.info(f"Wrote {len(rows)} firm-year records to {path}")
    return path

"""Reading and writing result tables (CSV and JSON lines) with a schema record."""

import io
import json
import logging
import sys
from pathlib import Path

import pandas as pd

from config.settings import OUTPUT_CONFIG

logger = logging.getLogger(__name__)

CSV, JSON_LINES = "csv", "json-lines"


def _meta_value(value):
    if isinstance(value, float):
        # shortest text that parses back to the same double
        return repr(float(value))
    return str(value)


def _plain(value):
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return int(value)
    return float(value)


def render_table(table, fmt=CSV, meta=None):
    """Serialize a DataFrame to text; `meta` adds key=value records after the schema version."""
    if fmt not in OUTPUT_CONFIG["formats"]:
        raise ValueError(f"Unknown format '{fmt}'. Use one of {OUTPUT_CONFIG['formats']}")
    header = {"schema_version": OUTPUT_CONFIG["schema_version"]}
    header.update(meta or {})

    if fmt == CSV:
        lines = [f"# {key}={_meta_value(value)}" for key, value in header.items()]
        # float columns are written in repr form, so they parse back exactly
        body = table.to_csv(index=False, na_rep="", lineterminator="\n")
        return "\n".join(lines) + "\n" + body

    record = json.dumps({key: _plain(value) for key, value in header.items()}, ensure_ascii=False)
    body = table.to_json(orient="records", lines=True, double_precision=OUTPUT_CONFIG["json_precision"])
    body = body.strip("\n")
    return record + "\n" + (body + "\n" if body else "")


def write_table(table, destination="-", fmt=CSV, meta=None):
    """Write a table to a path, or to standard output for None / '-'."""
    text = render_table(table, fmt, meta)
    if destination in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(destination)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    logger.info(f"✅ Wrote {len(table)} rows to {path}")


def _parse_meta_value(raw):
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def read_table(source):
    """Parse a table written by write_table. Returns (DataFrame, meta dict)."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = str(source)

    lines = [line for line in text.splitlines() if line.strip()]
    if lines and lines[0].lstrip().startswith("{"):
        meta = json.loads(lines[0])
        body = "\n".join(lines[1:])
        if body:
            table = pd.read_json(
                io.StringIO(body), lines=True, dtype=False, precise_float=True, convert_dates=False
            )
        else:
            table = pd.DataFrame()
    else:
        meta = {}
        for line in lines:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            meta[key] = _parse_meta_value(value)
        table = pd.read_csv(io.StringIO(text), comment="#", float_precision="round_trip")

    for column in table.columns:
        table[column] = pd.to_numeric(table[column], errors="coerce")
    if "schema_version" not in meta:
        logger.warning("⚠️ Table has no schema_version record")
    return table, meta

"""CSV ingestion of price tables and weight files.

Price files have a header row whose first column is ``date`` (ISO
``YYYY-MM-DD``) followed by one column of prices per asset. An empty cell
marks a missing quote; any date with a missing quote in a requested column is
dropped for every asset so the panel stays aligned.

Weight files have the header ``asset,weight`` and one row per asset.
"""
import csv
from dataclasses import dataclass
import math

import numpy as np

from .errors import IoError, ParseError, SchemaError, ValidationError
from .timeseries import PriceSeries, log_return_panel


@dataclass(frozen=True)
class PriceTable:
    dates: np.ndarray
    assets: tuple
    prices: np.ndarray
    dropped_rows: int = 0

    def series(self, asset):
        return PriceSeries(self.prices[:, self.assets.index(asset)], self.dates, asset)

    def returns(self):
        panel = log_return_panel(self.prices, self.assets, self.dates)
        return type(panel)(panel.matrix, panel.assets, panel.dates, panel.kind,
                           dropped_rows=self.dropped_rows)


def _read_rows(path):
    try:
        with open(path, newline="") as fh:
            return list(csv.reader(fh))
    except FileNotFoundError:
        raise IoError(f"no such file: {path}") from None
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from None


def _parse_date(text, row):
    try:
        return np.datetime64(text.strip(), "D")
    except ValueError:
        raise ParseError(f"row {row}: bad date {text!r}", row=row, column="date") from None


def read_prices(path, columns=None):
    """Read a price table, keeping ``columns`` (all non-date columns by default).

    Rows are numbered as in the file, the header being row 1.
    """
    rows = _read_rows(path)
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise SchemaError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if not header or header[0].lower() != "date":
        raise SchemaError("first column must be 'date'")
    available = header[1:]
    if columns is None:
        columns = available
    columns = [str(c) for c in columns]
    missing = [c for c in columns if c not in available]
    if missing:
        raise SchemaError(f"missing columns {missing}; file has {available}")
    if not columns:
        raise SchemaError("no price columns")
    idx = [header.index(c) for c in columns]

    dates, values, dropped = [], [], 0
    for line, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            raise ParseError(f"row {line}: expected {len(header)} cells, got {len(r)}", row=line)
        date = _parse_date(r[0], line)
        vals, gap = [], False
        for j, c in zip(idx, columns):
            cell = r[j].strip()
            if cell == "":
                gap = True
                continue
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"row {line}, column {c}: cannot parse {cell!r}",
                                 row=line, column=c) from None
            if not math.isfinite(v):
                raise ParseError(f"row {line}, column {c}: non-finite price", row=line, column=c)
            vals.append(v)
        if gap:
            dropped += 1
            continue
        dates.append(date)
        values.append(vals)

    if not values:
        raise SchemaError(f"{path} has no complete rows")
    dates = np.array(dates, dtype="datetime64[D]")
    if np.any(dates[1:] <= dates[:-1]):
        bad = int(np.flatnonzero(dates[1:] <= dates[:-1])[0]) + 1
        raise ParseError(f"dates are not strictly increasing at {dates[bad]}", column="date")
    return PriceTable(dates, tuple(columns), np.array(values, dtype=float), dropped)


def ingest(path, columns=None):
    """Aligned log-return panel of the requested price columns.

    The number of dates dropped for missing quotes is kept in
    ``panel.dropped_rows``.
    """
    return read_prices(path, columns).returns()


def read_weights(path):
    """Read an ``asset,weight`` file into an ordered ``{asset: weight}`` dict."""
    rows = [r for r in _read_rows(path) if any(cell.strip() for cell in r)]
    if not rows:
        raise SchemaError(f"{path} is empty")
    header = [h.strip().lower() for h in rows[0]]
    if header[:2] != ["asset", "weight"]:
        raise SchemaError("weight file header must be 'asset,weight'")
    out = {}
    for line, r in enumerate(rows[1:], start=2):
        if len(r) < 2:
            raise ParseError(f"row {line}: expected asset and weight", row=line)
        asset = r[0].strip()
        try:
            w = float(r[1])
        except ValueError:
            raise ParseError(f"row {line}: cannot parse weight {r[1]!r}", row=line,
                             column="weight") from None
        if asset in out:
            raise ValidationError(f"asset {asset!r} listed twice")
        out[asset] = w
    return out


def write_text(path, text):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None

"""Column-typed datasets and their CSV form.

Continuous columns are stored as ``float64`` arrays. Discrete columns are
stored as integer codes into an ordered tuple of level labels, so that
contingency tables and one-hot encodings can be built without re-parsing.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError

__all__ = ["Column", "Dataset", "read_csv", "write_csv", "format_csv", "parse_csv"]


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # "continuous" | "discrete"
    levels: tuple = ()

    @property
    def discrete(self) -> bool:
        return self.kind == "discrete"


@dataclass(eq=False)
class Dataset:
    """Named columns over a shared row index.

    ``values[name]`` is a float array for continuous columns and an ``int64``
    code array for discrete ones. Use :meth:`from_columns` to build one from
    raw labels.
    """

    columns: tuple
    values: dict
    domain_label: Optional[str] = None
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        self._index = {c.name: c for c in self.columns}
        if len(self._index) != len(self.columns):
            raise InvalidArgumentError("duplicate column names")
        lengths = {len(self.values[c.name]) for c in self.columns}
        if len(lengths) > 1:
            raise InvalidArgumentError("columns have different lengths")
        if self.columns and lengths.pop() < 1:
            raise InvalidArgumentError("a dataset needs at least one row")
        for c in self.columns:
            v = self.values[c.name]
            if c.discrete:
                if v.dtype.kind not in "iu":
                    raise InvalidArgumentError(f"{c.name}: discrete codes must be integers")
                if len(v) and (v.min() < 0 or v.max() >= len(c.levels)):
                    raise InvalidArgumentError(f"{c.name}: value outside its levels")

    @classmethod
    def from_columns(cls, data: dict, discrete: dict | None = None, domain_label=None):
        """Build from ``name -> sequence``.

        ``discrete`` maps discrete column names to their ordered levels; every
        other column is treated as continuous.
        """
        discrete = discrete or {}
        columns, values = [], {}
        for name, seq in data.items():
            if name in discrete:
                levels = tuple(str(x) for x in discrete[name])
                lookup = {lv: i for i, lv in enumerate(levels)}
                try:
                    codes = np.array([lookup[str(x)] for x in seq], dtype=np.int64)
                except KeyError as exc:
                    raise InvalidArgumentError(f"{name}: value {exc.args[0]!r} not among levels") from None
                columns.append(Column(name, "discrete", levels))
                values[name] = codes
            else:
                columns.append(Column(name, "continuous"))
                values[name] = np.asarray(seq, dtype=float)
        return cls(tuple(columns), values, domain_label)

    # -- access -------------------------------------------------------------
    @property
    def names(self) -> tuple:
        return tuple(c.name for c in self.columns)

    @property
    def n_rows(self) -> int:
        return len(self.values[self.columns[0].name]) if self.columns else 0

    def __len__(self):
        return self.n_rows

    def __contains__(self, name):
        return name in self._index

    def column(self, name) -> Column:
        try:
            return self._index[name]
        except KeyError:
            raise InvalidArgumentError(f"unknown column {name!r}") from None

    def __getitem__(self, name) -> np.ndarray:
        self.column(name)
        return self.values[name]

    def labels(self, name) -> list:
        """Column values as strings (levels for discrete columns)."""
        col = self.column(name)
        if col.discrete:
            return [col.levels[i] for i in self.values[name]]
        return [repr(float(x)) for x in self.values[name]]

    def select(self, names: Sequence[str]) -> "Dataset":
        cols = tuple(self.column(n) for n in names)
        return Dataset(cols, {n: self.values[n] for n in names}, self.domain_label)

    def drop(self, names) -> "Dataset":
        names = set(names)
        return self.select([n for n in self.names if n not in names])

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(self.columns, {n: v[rows] for n, v in self.values.items()}, self.domain_label)

    def with_label(self, label) -> "Dataset":
        return Dataset(self.columns, dict(self.values), label)

    def equals(self, other: "Dataset") -> bool:
        return (
            self.columns == other.columns
            and self.domain_label == other.domain_label
            and all(np.array_equal(self.values[n], other.values[n]) for n in self.names)
        )

    @staticmethod
    def concat(parts: Sequence["Dataset"], label=None) -> "Dataset":
        """Row-wise union over the columns common to all parts.

        Discrete levels are merged in first-seen order.
        """
        names = [n for n in parts[0].names if all(n in p for p in parts)]
        columns, values = [], {}
        for n in names:
            first = parts[0].column(n)
            if first.discrete:
                levels = list(first.levels)
                for p in parts[1:]:
                    col = p.column(n)
                    if not col.discrete:
                        raise InvalidArgumentError(f"{n}: kind differs between datasets")
                    levels += [lv for lv in col.levels if lv not in levels]
                lookup = {lv: i for i, lv in enumerate(levels)}
                codes = [
                    np.array([lookup[lv] for lv in p.column(n).levels], dtype=np.int64)[p.values[n]]
                    for p in parts
                ]
                columns.append(Column(n, "discrete", tuple(levels)))
                values[n] = np.concatenate(codes)
            else:
                if any(p.column(n).discrete for p in parts):
                    raise InvalidArgumentError(f"{n}: kind differs between datasets")
                columns.append(first)
                values[n] = np.concatenate([p.values[n] for p in parts])
        return Dataset(tuple(columns), values, label)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

_FLOAT_MARKERS = (".", "e", "E", "inf", "nan")


def _natural_levels(tokens):
    uniq = set(tokens)
    try:
        return tuple(sorted(uniq, key=lambda s: (float(s), s)))
    except ValueError:
        return tuple(sorted(uniq))


def parse_csv(text: str, discrete=None, continuous=None, domain_label=None) -> Dataset:
    """Parse comma-separated text with a header row.

    A column is continuous when every token parses as a float and at least one
    token is written in float notation (``1.0``, ``2e-3``); otherwise it is
    discrete with levels in natural order. ``discrete``/``continuous`` force a
    kind for the named columns; ``discrete`` may also map names to their full
    ordered level lists, which keeps levels that happen not to occur.
    """
    declared = dict(discrete) if isinstance(discrete, dict) else {}
    discrete = set(discrete or ())
    continuous = set(continuous or ())
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise InvalidArgumentError("empty CSV") from None
    header = [h.strip() for h in header]
    rows = [r for r in reader if r]
    for i, r in enumerate(rows, 2):
        if len(r) != len(header):
            raise InvalidArgumentError(f"line {i}: expected {len(header)} fields, got {len(r)}")
    if not rows:
        raise InvalidArgumentError("CSV has no data rows")
    data, levels = {}, {}
    for j, name in enumerate(header):
        tokens = [r[j].strip() for r in rows]
        if any(t == "" for t in tokens):
            raise InvalidArgumentError(f"column {name!r} has missing values")
        as_float = None
        if name not in discrete:
            try:
                as_float = [float(t) for t in tokens]
            except ValueError:
                if name in continuous:
                    raise InvalidArgumentError(f"column {name!r} is not numeric") from None
        floaty = as_float is not None and any(m in t for t in tokens for m in _FLOAT_MARKERS)
        if as_float is not None and (floaty or name in continuous):
            data[name] = as_float
        else:
            data[name] = tokens
            levels[name] = declared.get(name) or _natural_levels(tokens)
    return Dataset.from_columns(data, levels, domain_label)


def read_csv(path, discrete=None, continuous=None, domain_label=None) -> Dataset:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_csv(fh.read(), discrete, continuous, domain_label)


def _fmt(x: float) -> str:
    # repr is the shortest round-trip form and always carries a float marker
    return repr(float(x))


def format_csv(d: Dataset) -> str:
    """Render with shortest round-trip decimals and bare level tokens."""
    cols = [d.labels(n) if d.column(n).discrete else [_fmt(x) for x in d.values[n]] for n in d.names]
    out = [",".join(d.names)]
    out += [",".join(row) for row in zip(*cols)]
    return "\n".join(out) + "\n"


def write_csv(d: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(d))

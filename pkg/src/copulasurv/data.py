"""Observed semi-competing-risks data.

Each subject carries the time to the first event X with indicator d1
(1 if the non-terminal event occurred first), the time to the second
event Y with indicator d2 (1 if the terminal event occurred before
censoring), and a vector of binary covariates.  By construction X = Y
whenever d1 = 0 and X <= Y always.

The on-disk interchange format is CSV with header
``x,d1,y,d2,w1,...,wp`` (UTF-8, LF or CRLF).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class SubjectRecord:
    """One observation: first/second event times, indicators, covariates."""

    x: float
    d1: int
    y: float
    d2: int
    w: tuple

    def __post_init__(self):
        if self.d1 not in (0, 1) or self.d2 not in (0, 1):
            raise ValueError("event indicators must be 0 or 1")
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise ValueError("event times must be finite")
        if self.x < 0 or self.y < 0:
            raise ValueError("event times must be non-negative")
        if self.d1 == 1 and self.x > self.y:
            raise ValueError("first-event time exceeds second-event time")


@dataclass
class SurvivalData:
    """Column-oriented dataset of SubjectRecords.

    Attributes
    ----------
    x, y : ndarray, shape (n,)
        First- and second-event times.
    d1, d2 : ndarray, shape (n,)
        Event indicators (0/1 integers).
    w : ndarray, shape (n, p)
        Binary covariate matrix; p may be 0.
    """

    x: np.ndarray
    d1: np.ndarray
    y: np.ndarray
    d2: np.ndarray
    w: np.ndarray
    _design: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.d1 = np.asarray(self.d1, dtype=int)
        self.d2 = np.asarray(self.d2, dtype=int)
        self.w = np.asarray(self.w, dtype=float)
        if self.w.ndim == 1:
            self.w = self.w.reshape(len(self.x), -1)
        n = len(self.x)
        if not (len(self.y) == len(self.d1) == len(self.d2) == n
                and self.w.shape[0] == n):
            raise ValueError("all columns must have the same length")
        if n == 0:
            raise ValueError("dataset must contain at least one record")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise ValueError("event times must be finite")
        if np.any(self.x < 0) or np.any(self.y < 0):
            raise ValueError("event times must be non-negative")
        if not (np.isin(self.d1, (0, 1)).all() and np.isin(self.d2, (0, 1)).all()):
            raise ValueError("event indicators must be 0 or 1")
        if not np.isin(self.w, (0.0, 1.0)).all():
            raise ValueError("covariates must be binary (0/1)")
        if np.any((self.d1 == 1) & (self.x > self.y)):
            raise ValueError("first-event time exceeds second-event time")

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def n_covariates(self) -> int:
        return self.w.shape[1]

    @property
    def design(self) -> np.ndarray:
        """(n, p+1) matrix with a leading column of ones."""
        if self._design is None:
            self._design = np.column_stack([np.ones(self.n), self.w])
        return self._design

    @classmethod
    def from_records(cls, records) -> "SurvivalData":
        records = list(records)
        if not records:
            raise ValueError("dataset must contain at least one record")
        return cls(
            x=np.array([r.x for r in records]),
            d1=np.array([r.d1 for r in records]),
            y=np.array([r.y for r in records]),
            d2=np.array([r.d2 for r in records]),
            w=np.array([r.w for r in records], dtype=float).reshape(
                len(records), -1
            ),
        )

    def to_records(self):
        return [
            SubjectRecord(
                x=float(self.x[i]),
                d1=int(self.d1[i]),
                y=float(self.y[i]),
                d2=int(self.d2[i]),
                w=tuple(self.w[i]),
            )
            for i in range(self.n)
        ]

    def to_csv(self, path) -> None:
        """Write the dataset as ``x,d1,y,d2,w1,...,wp``."""
        path = Path(path)
        header = ["x", "d1", "y", "d2"]
        header += [f"w{j + 1}" for j in range(self.n_covariates)]
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for i in range(self.n):
                row = [repr(float(self.x[i])), int(self.d1[i]),
                       repr(float(self.y[i])), int(self.d2[i])]
                row += [int(v) for v in self.w[i]]
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path) -> "SurvivalData":
        """Parse a dataset CSV; malformed rows report their line number."""
        path = Path(path)
        with path.open("r", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValueError(f"{path}: empty file") from None
            header = [h.strip() for h in header]
            p = len(header) - 4
            expected = ["x", "d1", "y", "d2"] + [f"w{j + 1}" for j in range(p)]
            if p < 0 or header != expected:
                raise ValueError(
                    f"{path}: header must be x,d1,y,d2,w1,...,wp "
                    f"(got {','.join(header)})"
                )
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise ValueError(
                        f"{path}: line {lineno}: expected {len(header)} "
                        f"fields, got {len(row)}"
                    )
                try:
                    rows.append([float(v) for v in row])
                except ValueError:
                    raise ValueError(
                        f"{path}: line {lineno}: non-numeric field"
                    ) from None
        if not rows:
            raise ValueError(f"{path}: no data rows")
        arr = np.array(rows)
        for col in (1, 3):
            if not np.isin(arr[:, col], (0.0, 1.0)).all():
                raise ValueError(f"{path}: event indicators must be 0 or 1")
        try:
            return cls(x=arr[:, 0], d1=arr[:, 1].astype(int), y=arr[:, 2],
                       d2=arr[:, 3].astype(int), w=arr[:, 4:])
        except ValueError as exc:
            raise ValueError(f"{path}: {exc}") from None

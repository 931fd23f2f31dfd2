"""Variable schemas, dataset container, and the CSV dataset format.

A dataset is a two-column CSV with header ``a,y``; each column is either
continuous or ``discrete:K`` (raw class indices 0..K-1 on disk).  Discrete
columns are dequantized at ingestion so the model always trains on
continuous values.
"""

import io
from dataclasses import dataclass

import numpy as np

from .dequant import DequantSpec, encode
from .errors import InvalidInputError, SchemaError

DEFAULT_MODE_SIGMA = 0.1


@dataclass(frozen=True)
class VarSchema:
    kind: str  # "continuous" or "discrete"
    n_classes: int = 0
    sigma: float = DEFAULT_MODE_SIGMA

    def __post_init__(self):
        if self.kind not in ("continuous", "discrete"):
            raise SchemaError(f"unknown schema kind {self.kind!r}")
        if self.kind == "discrete" and self.n_classes < 2:
            raise SchemaError("discrete schema needs at least 2 classes")

    @property
    def is_discrete(self):
        return self.kind == "discrete"

    def codec(self) -> DequantSpec:
        if not self.is_discrete:
            raise SchemaError("continuous columns have no codec")
        return DequantSpec(self.n_classes, self.sigma)

    def __str__(self):
        return "continuous" if not self.is_discrete else f"discrete:{self.n_classes}"

    @classmethod
    def parse(cls, text: str) -> "VarSchema":
        text = text.strip().lower()
        if text == "continuous":
            return cls("continuous")
        if text.startswith("discrete:"):
            try:
                k = int(text.split(":", 1)[1])
            except ValueError as exc:
                raise SchemaError(f"bad schema {text!r}") from exc
            return cls("discrete", n_classes=k)
        raise SchemaError(f"bad schema {text!r}")


CONTINUOUS = VarSchema("continuous")


@dataclass
class Dataset:
    """Raw (a, y) columns plus their schemas."""

    a: np.ndarray
    y: np.ndarray
    a_schema: VarSchema = CONTINUOUS
    y_schema: VarSchema = CONTINUOUS

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=np.float64).reshape(-1)
        self.y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        if self.a.shape != self.y.shape:
            raise InvalidInputError("columns a and y must have equal length")
        for col, schema, name in ((self.a, self.a_schema, "a"),
                                  (self.y, self.y_schema, "y")):
            if schema.is_discrete:
                k = np.rint(col)
                if np.any(np.abs(col - k) > 1e-9) or k.min() < 0 or \
                        k.max() >= schema.n_classes:
                    raise SchemaError(
                        f"column {name} does not match schema {schema}"
                    )

    def __len__(self):
        return self.a.shape[0]

    def encoded(self, rng: np.random.Generator):
        """Dequantize discrete columns; continuous ones pass through."""
        a = self.a
        y = self.y
        if self.a_schema.is_discrete:
            a = encode(self.a_schema.codec(), a.astype(np.int64), rng)
        if self.y_schema.is_discrete:
            y = encode(self.y_schema.codec(), y.astype(np.int64), rng)
        return a, y


def write_csv(path, a, y):
    """Write the two-column dataset format with a stable float rendering."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if a.shape != y.shape:
        raise InvalidInputError("columns must have equal length")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("a,y\n")
        for av, yv in zip(a, y):
            fh.write(f"{av:.17g},{yv:.17g}\n")


def read_csv(path):
    """Parse the two-column dataset format; errors carry line numbers."""
    with open(path, "r", encoding="utf-8") as fh:
        return _parse_csv(fh, str(path))


def _parse_csv(fh, label):
    header = fh.readline()
    if header.strip() != "a,y":
        raise SchemaError(f"{label}:1: expected header 'a,y', got {header.strip()!r}")
    a_vals, y_vals = [], []
    for lineno, line in enumerate(fh, start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise SchemaError(f"{label}:{lineno}: expected two columns")
        try:
            a_vals.append(float(parts[0]))
            y_vals.append(float(parts[1]))
        except ValueError as exc:
            raise SchemaError(f"{label}:{lineno}: non-numeric value") from exc
    return np.asarray(a_vals), np.asarray(y_vals)


def read_csv_text(text, label="<string>"):
    return _parse_csv(io.StringIO(text), label)

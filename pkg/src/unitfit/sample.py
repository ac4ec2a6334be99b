from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSampleError, DomainError
from .mbur import Y_MAX, Y_MIN


@dataclass(frozen=True)
class Sample:
    """Sorted observations strictly inside (0, 1).

    Use :meth:`from_values`; the constructor assumes validated, sorted input.
    """

    values: np.ndarray
    has_ties: bool = field(default=False)

    @classmethod
    def from_values(cls, values) -> "Sample":
        if isinstance(values, Sample):
            return values
        arr = np.asarray(values, dtype=float).ravel()
        if arr.size == 0:
            raise DegenerateSampleError("sample is empty")
        bad = ~((arr >= Y_MIN) & (arr <= Y_MAX))
        if np.any(bad):
            idx = int(np.flatnonzero(bad)[0])
            raise DomainError(f"observation {idx} = {arr[idx]!r} is not strictly inside (0, 1)")
        arr = np.sort(arr)
        arr.setflags(write=False)
        return cls(arr, bool(np.any(np.diff(arr) == 0.0)))

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.n

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def mean(self) -> float:
        return float(self.values.mean())

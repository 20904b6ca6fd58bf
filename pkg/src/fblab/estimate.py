"""Certified intervals and search budgets shared by every estimator."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

__all__ = ["NormEstimate", "Budget", "ConsistencyError", "METHODS"]

METHODS = (
    "exact_vertices",
    "exact_signs",
    "exact_svd",
    "exact_closed_form",
    "search_lower",
    "structural_upper",
)


class ConsistencyError(RuntimeError):
    """A lower bound exceeded an upper bound: an implementation bug."""


def _jsonable(obj):
    if obj is None:
        return None
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (list, tuple)):
        return [_jsonable(o) for o in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


@dataclass
class NormEstimate:
    """An interval ``[lower, upper]`` for a supremum.

    ``witness`` reproduces ``lower`` when re-evaluated.  ``certified`` is
    False when ``upper`` is only a heuristic (search-based) value.
    """

    lower: float
    upper: float
    method: str
    witness: object = None
    certified: bool = True

    def __post_init__(self):
        self.lower = float(self.lower)
        self.upper = float(self.upper)
        if self.lower < 0:
            raise ValueError(f"negative lower bound {self.lower}")
        if self.lower > self.upper * (1 + 1e-9) + 1e-12:
            raise ConsistencyError(f"lower {self.lower!r} exceeds upper {self.upper!r}")

    @property
    def exact(self) -> bool:
        return self.certified and self.lower == self.upper

    @property
    def value(self) -> float:
        return self.lower

    def to_json(self) -> dict:
        upper = self.upper if math.isfinite(self.upper) else "inf"
        return {
            "lower": self.lower,
            "upper": upper,
            "method": self.method,
            "certified": self.certified,
            "witness": _jsonable(self.witness),
        }

    @classmethod
    def from_json(cls, obj) -> "NormEstimate":
        upper = obj["upper"]
        upper = math.inf if upper == "inf" else float(upper)
        return cls(obj["lower"], upper, obj["method"], obj.get("witness"), obj.get("certified", True))


@dataclass(frozen=True)
class Budget:
    """Search effort knobs.

    ``restarts``/``steps``/``step`` drive multistart ascent; ``samples`` is the
    number of seeded sphere samples; ``tuple_max`` caps witness tuple length
    and ``pool`` the candidate pool used to grow tuples.
    """

    samples: int = 256
    restarts: int = 32
    steps: int = 500
    step: float = 0.1
    tuple_max: int = 8
    pool: int = 48
    refine_steps: int = 40
    sign_cap: int = 20
    tuple_sizes: tuple = field(default=(1, 2, 4, 8))

    def __post_init__(self):
        for name in ("samples", "restarts", "tuple_max", "pool", "sign_cap"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        for name in ("steps", "refine_steps"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
        if not (isinstance(self.step, (int, float)) and self.step > 0):
            raise ValueError(f"step must be positive, got {self.step!r}")
        if not self.tuple_sizes or any(not isinstance(k, int) or k < 1 for k in self.tuple_sizes):
            raise ValueError(f"tuple_sizes must be positive integers, got {self.tuple_sizes!r}")

    @classmethod
    def from_dict(cls, d: dict | None) -> "Budget":
        if not d:
            return cls()
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown budget keys {sorted(unknown)}")
        d = dict(d)
        if "tuple_sizes" in d:
            d["tuple_sizes"] = tuple(d["tuple_sizes"])
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tuple_sizes"] = list(self.tuple_sizes)
        return d

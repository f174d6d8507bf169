"""Kernel functions and Gram matrix assembly.

Families:

* ``linear``      K(x, z) = x.z
* ``polynomial``  K(x, z) = (1 + x.z / c) ** d
* ``rbf``         K(x, z) = exp(-||x - z||^2 / sigma^2)   (sigma squared, no factor 2)
* ``mlp``         K(x, z) = tanh(k * x.z + theta)           (not PSD in general)
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from . import _backend
from .errors import DimensionMismatchError, ValidationError

FAMILIES = ("linear", "polynomial", "rbf", "mlp")
ALIASES = {"poly": "polynomial", "sigmoid": "mlp", "tanh": "mlp", "gaussian": "rbf"}
_CODES = {"linear": 0, "polynomial": 1, "rbf": 2, "mlp": 3}
# parameter names each family accepts, in the order they map onto backend slots
PARAM_NAMES = {
    "linear": (),
    "polynomial": ("degree", "offset"),
    "rbf": ("sigma",),
    "mlp": ("scale", "bias"),
}


def canonical_family(name: str) -> str:
    key = name.strip().lower()
    key = ALIASES.get(key, key)
    if key not in FAMILIES:
        raise ValidationError(f"unknown kernel family {name!r}; expected one of {FAMILIES}")
    return key


@dataclass(frozen=True)
class KernelSpec:
    family: str
    params: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        family = canonical_family(self.family)
        object.__setattr__(self, "family", family)
        given = dict(self.params)
        allowed = PARAM_NAMES[family]
        extra = set(given) - set(allowed)
        if extra:
            raise ValidationError(f"{family} kernel does not take {sorted(extra)}")
        if family == "polynomial":
            given.setdefault("offset", 1.0)
            given.setdefault("degree", 2)
            if int(given["degree"]) != given["degree"] or given["degree"] < 1:
                raise ValidationError(f"polynomial degree must be an integer >= 1, got {given['degree']}")
            if not given["offset"] > 0:
                raise ValidationError(f"polynomial offset must be > 0, got {given['offset']}")
        elif family == "rbf":
            given.setdefault("sigma", 1.0)
            if not given["sigma"] > 0 or not math.isfinite(given["sigma"]):
                raise ValidationError(f"rbf sigma must be finite and > 0, got {given['sigma']}")
        elif family == "mlp":
            given.setdefault("scale", 1.0)
            given.setdefault("bias", 0.0)
        for name, value in given.items():
            if not math.isfinite(value):
                raise ValidationError(f"kernel parameter {name} must be finite")
        object.__setattr__(
            self, "params", tuple((name, float(given[name])) for name in allowed)
        )

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls("linear")

    @classmethod
    def polynomial(cls, degree: int = 2, offset: float = 1.0) -> "KernelSpec":
        return cls("polynomial", (("degree", degree), ("offset", offset)))

    @classmethod
    def rbf(cls, sigma: float = 1.0) -> "KernelSpec":
        return cls("rbf", (("sigma", sigma),))

    @classmethod
    def mlp(cls, scale: float = 1.0, bias: float = 0.0) -> "KernelSpec":
        return cls("mlp", (("scale", scale), ("bias", bias)))

    @classmethod
    def build(cls, family: str, **params: float) -> "KernelSpec":
        return cls(family, tuple(params.items()))

    def __getitem__(self, name: str) -> float:
        return dict(self.params)[name]

    @property
    def code(self) -> int:
        return _CODES[self.family]

    def _slots(self) -> tuple[float, float]:
        vals = [v for _, v in self.params] + [0.0, 0.0]
        return vals[0], vals[1]

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, **dict(self.params)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "KernelSpec":
        data = dict(data)
        family = data.pop("family")
        return cls(family, tuple((k, float(v)) for k, v in data.items()))


def _as_matrix(X, what: str) -> np.ndarray:
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    if arr.ndim != 2:
        raise ValidationError(f"{what} must be a 2-D matrix")
    return arr


def kernel_eval(spec: KernelSpec, x, z) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    z = np.asarray(z, dtype=np.float64).ravel()
    if x.shape != z.shape or x.size == 0:
        raise DimensionMismatchError(f"vectors of length {x.size} and {z.size}")
    if spec.family == "rbf":
        d = x - z
        return math.exp(-float(d @ d) / spec["sigma"] ** 2)
    dot = float(x @ z)
    if spec.family == "linear":
        return dot
    if spec.family == "polynomial":
        return (1.0 + dot / spec["offset"]) ** spec["degree"]
    return math.tanh(spec["scale"] * dot + spec["bias"])


def gram_matrix(spec: KernelSpec, X) -> np.ndarray:
    """Symmetric n x n Gram matrix; each unordered pair is evaluated once."""
    X = _as_matrix(X, "X")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise ValidationError(f"X must be non-empty, got shape {X.shape}")
    return _backend.impl.gram_sym(X, spec.code, *spec._slots())


def gram_cross(spec: KernelSpec, X, Q) -> np.ndarray:
    """m x n matrix with entry (i, j) = K(Q_i, X_j)."""
    X = _as_matrix(X, "X")
    Q = np.asarray(Q, dtype=np.float64)
    if Q.ndim == 1 and Q.size == 0:
        Q = Q.reshape(0, X.shape[1])
    Q = _as_matrix(Q, "Q")
    if Q.shape[1] != X.shape[1]:
        raise DimensionMismatchError(f"Q has {Q.shape[1]} columns, X has {X.shape[1]}")
    return _backend.impl.gram_cross(Q, X, spec.code, *spec._slots())

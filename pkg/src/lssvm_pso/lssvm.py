"""Least-squares SVM regression.

Training solves the bordered KKT system

    [ 0   1^T        ] [b]   [0]
    [ 1   K + I / C  ] [a] = [y]

and prediction evaluates ``f(q) = sum_j a_j K(q, x_j) + b``.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import DimensionMismatchError, NumericalFailure, ValidationError
from .kernels import KernelSpec, gram_cross, gram_matrix

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-6
_REFINE_STEPS = 2


@dataclass(frozen=True)
class LssvmHyperparams:
    C: float
    kernel: KernelSpec

    def __post_init__(self):
        if not (self.C > 0 and math.isfinite(self.C) and math.isfinite(1.0 / self.C)):
            raise ValidationError(f"C must be finite and > 0 with finite 1/C, got {self.C}")


@dataclass(frozen=True, eq=False)
class LssvmModel:
    alphas: np.ndarray
    bias: float
    kernel: KernelSpec
    train_inputs: np.ndarray
    C: float
    kkt_residual: float
    solver: str = "cholesky"
    meta: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return self.train_inputs.shape[1]

    def predict(self, Q) -> np.ndarray:
        return predict(self, Q)

    def to_json(self) -> str:
        doc = {
            "kernel": self.kernel.to_dict(),
            "C": self.C,
            "bias": self.bias,
            "alphas": self.alphas.tolist(),
            "train_inputs": self.train_inputs.tolist(),
            "kkt_residual": self.kkt_residual,
            "solver": self.solver,
            "meta": self.meta,
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "LssvmModel":
        doc = json.loads(text)
        X = np.asarray(doc["train_inputs"], dtype=np.float64)
        if X.size == 0:
            X = X.reshape(0, 0)
        return cls(
            alphas=np.asarray(doc["alphas"], dtype=np.float64),
            bias=float(doc["bias"]),
            kernel=KernelSpec.from_dict(doc["kernel"]),
            train_inputs=X,
            C=float(doc["C"]),
            kkt_residual=float(doc["kkt_residual"]),
            solver=doc.get("solver", "cholesky"),
            meta=doc.get("meta", {}),
        )

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "LssvmModel":
        return cls.from_json(Path(path).read_text())


def kkt_matrix(K: np.ndarray, C: float) -> np.ndarray:
    """Assemble the full (n+1) x (n+1) bordered matrix."""
    n = K.shape[0]
    A = np.empty((n + 1, n + 1))
    A[0, 0] = 0.0
    A[0, 1:] = 1.0
    A[1:, 0] = 1.0
    A[1:, 1:] = K
    A[np.arange(1, n + 1), np.arange(1, n + 1)] += 1.0 / C
    return A


def _relative_residual(A: np.ndarray, sol: np.ndarray, rhs: np.ndarray) -> float:
    scale = np.linalg.norm(rhs)
    r = np.linalg.norm(A @ sol - rhs)
    if scale == 0:
        return float(r)
    return float(r / scale)


def _validate_xy(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2 or y.ndim != 1:
        raise ValidationError("X must be n x p and y a length-n vector")
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatchError(f"X has {X.shape[0]} rows, y has {y.shape[0]}")
    if X.shape[0] < 2:
        raise ValidationError(f"need at least 2 training points, got {X.shape[0]}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValidationError("training data contains non-finite values")
    return X, y


def _solve_block(H_factor, y: np.ndarray, r0: float) -> np.ndarray:
    """Block elimination for [0 1^T; 1 H][b; a] = [r0; y] given a Cholesky factor of H."""
    n = y.shape[0]
    eta = scipy.linalg.cho_solve(H_factor, np.ones(n))
    nu = scipy.linalg.cho_solve(H_factor, y)
    b = (nu.sum() - r0) / eta.sum()
    return np.concatenate(([b], nu - b * eta))


def fit(X, y, hp: LssvmHyperparams) -> LssvmModel:
    X, y = _validate_xy(X, y)
    n = X.shape[0]
    K = gram_matrix(hp.kernel, X)
    A = kkt_matrix(K, hp.C)
    rhs = np.concatenate(([0.0], y))

    solver = "cholesky"
    try:
        H = A[1:, 1:]
        factor = scipy.linalg.cho_factor(H, lower=True, check_finite=False)
        sol = _solve_block(factor, y, 0.0)
        if not np.all(np.isfinite(sol)):
            raise np.linalg.LinAlgError("non-finite block solution")
        resid = _relative_residual(A, sol, rhs)
        for _ in range(_REFINE_STEPS):
            if resid <= 1e-14:
                break
            r = rhs - A @ sol
            candidate = sol + _solve_block(factor, r[1:], r[0])
            cand_resid = _relative_residual(A, candidate, rhs)
            if not cand_resid < resid:
                break
            sol, resid = candidate, cand_resid
    except (np.linalg.LinAlgError, ValueError):
        # indefinite K + I/C (e.g. mlp kernel): pivoted LU on the full system
        solver = "lu"
        try:
            sol = scipy.linalg.solve(A, rhs, check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalFailure(f"KKT solve failed: {exc}", _condition(A)) from exc
        resid = _relative_residual(A, sol, rhs) if np.all(np.isfinite(sol)) else math.inf

    if not resid <= RESIDUAL_TOLERANCE:
        raise NumericalFailure(
            f"KKT relative residual {resid:.3e} exceeds {RESIDUAL_TOLERANCE:g}", _condition(A)
        )
    logger.debug("fit n=%d solver=%s residual=%.2e", n, solver, resid)
    return LssvmModel(
        alphas=sol[1:].copy(),
        bias=float(sol[0]),
        kernel=hp.kernel,
        train_inputs=X.copy(),
        C=float(hp.C),
        kkt_residual=resid,
        solver=solver,
    )


def _condition(A: np.ndarray) -> float:
    try:
        return float(np.linalg.cond(A))
    except np.linalg.LinAlgError:
        return math.inf


def predict(model: LssvmModel, Q) -> np.ndarray:
    Q = np.asarray(Q, dtype=np.float64)
    if Q.size == 0:
        return np.zeros(0)
    if Q.ndim == 1:
        Q = Q.reshape(1, -1)
    if Q.shape[1] != model.n_features:
        raise DimensionMismatchError(
            f"query has {Q.shape[1]} columns, model was trained on {model.n_features}"
        )
    return gram_cross(model.kernel, model.train_inputs, Q) @ model.alphas + model.bias


def kkt_residual(model: LssvmModel, X, y, hp: LssvmHyperparams | None = None) -> float:
    """Relative residual of (b, a) in the KKT system rebuilt from (X, y, hp)."""
    X, y = _validate_xy(X, y)
    C = hp.C if hp is not None else model.C
    kernel = hp.kernel if hp is not None else model.kernel
    A = kkt_matrix(gram_matrix(kernel, X), C)
    sol = np.concatenate(([model.bias], model.alphas))
    return _relative_residual(A, sol, np.concatenate(([0.0], y)))

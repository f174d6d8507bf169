"""Global-best particle swarm optimization over a bounded box.

Positions live in *search coordinates*: log10 of the value for log-scaled
dimensions, the raw value otherwise. :meth:`SearchSpace.decode` maps back.

Random draws come from a PCG64 generator whose state travels inside
:class:`SwarmState`, so :func:`step` is a pure function of its inputs.
Draw order:

* init: positions ``uniform(size=(swarm, dims))`` then velocities of the
  same shape, both row-major (particle-major, dimension-minor);
* step: ``random(size=(swarm, dims, 2))``; ``[..., 0]`` is q (cognitive),
  ``[..., 1]`` is r (social), so for each particle and dimension q is drawn
  before r.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import InitializationError, NumericalFailure, ValidationError
from .kernels import KernelSpec, PARAM_NAMES, canonical_family

logger = logging.getLogger(__name__)

Fitness = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class Dimension:
    name: str
    lower: float
    upper: float
    scale: str = "linear"

    def __post_init__(self):
        if self.scale not in ("linear", "log10"):
            raise ValidationError(f"{self.name}: scale must be 'linear' or 'log10'")
        if not self.lower < self.upper:
            raise ValidationError(f"{self.name}: lower bound must be below upper bound")
        if self.scale == "log10" and not self.lower > 0:
            raise ValidationError(f"{self.name}: log10 dimension needs lower > 0")

    @property
    def search_bounds(self) -> tuple[float, float]:
        if self.scale == "log10":
            return math.log10(self.lower), math.log10(self.upper)
        return self.lower, self.upper


@dataclass(frozen=True)
class SearchSpace:
    dims: tuple[Dimension, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        if not self.dims:
            raise ValidationError("search space needs at least one dimension")
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate dimension names in {names}")

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.dims]

    @property
    def lower(self) -> np.ndarray:
        return np.array([d.search_bounds[0] for d in self.dims])

    @property
    def upper(self) -> np.ndarray:
        return np.array([d.search_bounds[1] for d in self.dims])

    def __len__(self) -> int:
        return len(self.dims)

    def decode(self, position) -> dict[str, float]:
        """Search coordinates -> natural parameter values."""
        out = {}
        for d, x in zip(self.dims, np.asarray(position, dtype=np.float64)):
            out[d.name] = 10.0 ** float(x) if d.scale == "log10" else float(x)
        return out

    def encode(self, values: Mapping[str, float]) -> np.ndarray:
        return np.array(
            [math.log10(values[d.name]) if d.scale == "log10" else values[d.name] for d in self.dims]
        )

    def center(self) -> np.ndarray:
        """Midpoint of the box in search coordinates (geometric mean for log dims)."""
        return (self.lower + self.upper) / 2.0

    def contains(self, position) -> bool:
        p = np.asarray(position)
        return bool(np.all(p >= self.lower) and np.all(p <= self.upper))


@dataclass(frozen=True)
class PsoConfig:
    swarm_size: int = 30
    max_iters: int = 100
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445
    seed: int = 0
    vmax_fraction: float = 0.5

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValidationError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if self.swarm_size < 2:
            out.append(f"swarm_size must be >= 2, got {self.swarm_size}")
        if self.max_iters < 0:
            out.append(f"max_iters must be >= 0, got {self.max_iters}")
        if not 0 <= self.inertia <= 1:
            out.append(f"inertia must be in [0, 1], got {self.inertia}")
        if self.cognitive < 0 or self.social < 0:
            out.append("cognitive and social coefficients must be >= 0")
        if not 0 < self.vmax_fraction <= 1:
            out.append(f"vmax_fraction must be in (0, 1], got {self.vmax_fraction}")
        if not 0 <= self.seed < 2**64:
            out.append(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        return out


@dataclass(frozen=True, eq=False)
class SwarmState:
    positions: np.ndarray
    velocities: np.ndarray
    pbest_positions: np.ndarray
    pbest_fitness: np.ndarray
    gbest_position: np.ndarray
    gbest_fitness: float
    gbest_index: int
    iteration: int
    rng_state: dict = field(repr=False)

    def __post_init__(self):
        for name in ("positions", "velocities", "pbest_positions", "pbest_fitness", "gbest_position"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def _evaluate(fitness: Fitness, positions: np.ndarray, executor=None) -> np.ndarray:
    """Evaluate every row; non-finite results and exceptions from numerics count as +inf."""

    def one(x):
        try:
            value = float(fitness(x.copy()))
        except (NumericalFailure, ArithmeticError, np.linalg.LinAlgError):
            return math.inf
        return value if math.isfinite(value) else math.inf

    rows = list(positions)
    values = executor.map(one, rows) if executor is not None else map(one, rows)
    return np.fromiter(values, dtype=np.float64, count=len(rows))


def _generator(state: dict) -> np.random.Generator:
    bitgen = np.random.PCG64()
    bitgen.state = state
    return np.random.Generator(bitgen)


def init_swarm(space: SearchSpace, cfg: PsoConfig, fitness: Fitness, executor=None) -> SwarmState:
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    lo, hi = space.lower, space.upper
    span = hi - lo
    shape = (cfg.swarm_size, len(space))
    positions = lo + rng.uniform(size=shape) * span
    positions = np.clip(positions, lo, hi)
    vmax = cfg.vmax_fraction * span
    velocities = (2.0 * rng.uniform(size=shape) - 1.0) * vmax
    scores = _evaluate(fitness, positions, executor)
    if not np.any(np.isfinite(scores)):
        raise InitializationError(
            f"fitness was non-finite at all {cfg.swarm_size} initial positions"
        )
    best = int(np.argmin(scores))  # argmin returns the lowest index on ties
    return SwarmState(
        positions=positions,
        velocities=velocities,
        pbest_positions=positions,
        pbest_fitness=scores,
        gbest_position=positions[best],
        gbest_fitness=float(scores[best]),
        gbest_index=best,
        iteration=0,
        rng_state=rng.bit_generator.state,
    )


def step(state: SwarmState, space: SearchSpace, cfg: PsoConfig, fitness: Fitness, executor=None) -> SwarmState:
    """One velocity/position update followed by evaluation and best bookkeeping."""
    rng = _generator(state.rng_state)
    lo, hi = space.lower, space.upper
    vmax = cfg.vmax_fraction * (hi - lo)
    x = state.positions
    draws = rng.random(size=x.shape + (2,))
    q, r = draws[..., 0], draws[..., 1]

    v = (
        cfg.inertia * state.velocities
        + cfg.cognitive * q * (state.pbest_positions - x)
        + cfg.social * r * (state.gbest_position - x)
    )
    v = np.clip(v, -vmax, vmax)
    x_new = x + v
    out_of_box = (x_new < lo) | (x_new > hi)
    x_new = np.clip(x_new, lo, hi)
    v = np.where(out_of_box, 0.0, v)

    scores = _evaluate(fitness, x_new, executor)
    improved = scores < state.pbest_fitness
    pbest_x = np.where(improved[:, None], x_new, state.pbest_positions)
    pbest_f = np.where(improved, scores, state.pbest_fitness)

    gbest_x, gbest_f, gbest_i = state.gbest_position, state.gbest_fitness, state.gbest_index
    cand = int(np.argmin(pbest_f))
    if pbest_f[cand] < gbest_f:
        gbest_x, gbest_f, gbest_i = pbest_x[cand], float(pbest_f[cand]), cand

    return SwarmState(
        positions=x_new,
        velocities=v,
        pbest_positions=pbest_x,
        pbest_fitness=pbest_f,
        gbest_position=gbest_x,
        gbest_fitness=gbest_f,
        gbest_index=gbest_i,
        iteration=state.iteration + 1,
        rng_state=rng.bit_generator.state,
    )


@dataclass(frozen=True, eq=False)
class PsoResult:
    best_position: np.ndarray
    best_fitness: float
    history: list[float]
    trace: list[tuple[int, float, tuple[float, ...]]]
    evaluated: np.ndarray  # every position evaluated, (iters + 1) x swarm x dims

    def best_params(self, space: SearchSpace) -> dict[str, float]:
        return space.decode(self.best_position)


def optimize(
    space: SearchSpace,
    cfg: PsoConfig,
    fitness: Fitness,
    executor=None,
    callback: Callable[[SwarmState], None] | None = None,
) -> PsoResult:
    """Run ``max_iters`` PSO steps after initialization. No early stopping."""
    state = init_swarm(space, cfg, fitness, executor)
    history = [state.gbest_fitness]
    trace = [(0, state.gbest_fitness, tuple(state.gbest_position))]
    evaluated = [state.positions]
    if callback:
        callback(state)
    for _ in range(cfg.max_iters):
        state = step(state, space, cfg, fitness, executor)
        history.append(state.gbest_fitness)
        trace.append((state.iteration, state.gbest_fitness, tuple(state.gbest_position)))
        evaluated.append(state.positions)
        if callback:
            callback(state)
    logger.debug("pso finished: best %.6g after %d iterations", state.gbest_fitness, cfg.max_iters)
    return PsoResult(
        best_position=np.array(state.gbest_position),
        best_fitness=state.gbest_fitness,
        history=history,
        trace=trace,
        evaluated=np.stack(evaluated),
    )


def write_trace(path, result: PsoResult, space: SearchSpace) -> None:
    """CSV trace: iteration, best_fitness, then one column per dimension in natural units."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "best_fitness", *space.names])
        for it, fit, pos in result.trace:
            decoded = space.decode(pos)
            writer.writerow([it, repr(fit), *(repr(decoded[n]) for n in space.names)])


# LS-SVM hyperparameter search ---------------------------------------------

WORST_FITNESS = math.inf

DEFAULT_BOUNDS: dict[str, Dimension] = {
    "C": Dimension("C", 1e-2, 1e6, "log10"),
    "sigma": Dimension("sigma", 1e-2, 1e2, "log10"),
    "offset": Dimension("offset", 1e-2, 1e2, "log10"),
    "scale": Dimension("scale", 1e-3, 10.0, "log10"),
    "bias": Dimension("bias", -5.0, 5.0, "linear"),
}


def default_space(family: str) -> SearchSpace:
    """C plus every continuous kernel parameter of ``family`` (polynomial degree is fixed)."""
    family = canonical_family(family)
    names = ["C"] + [p for p in PARAM_NAMES[family] if p != "degree"]
    return SearchSpace(tuple(DEFAULT_BOUNDS[n] for n in names))


def hyperparams_from(family: str, params: Mapping[str, float], degree: int = 2):
    """Build LssvmHyperparams from decoded search values."""
    from .lssvm import LssvmHyperparams

    family = canonical_family(family)
    kparams = {k: v for k, v in params.items() if k != "C"}
    if family == "polynomial":
        kparams.setdefault("degree", degree)
    return LssvmHyperparams(C=params["C"], kernel=KernelSpec.build(family, **kparams))


def lssvm_fitness(train, val, kernel_family: str, params: Mapping[str, float], degree: int = 2) -> float:
    """Validation MSE of an LS-SVM fitted on ``train`` with the given hyperparameters.

    ``train``/``val`` are FeatureMatrix-like objects with ``X`` and ``y``.
    Any fit failure maps to :data:`WORST_FITNESS`.
    """
    from .lssvm import fit

    try:
        hp = hyperparams_from(kernel_family, params, degree)
        model = fit(train.X, train.y, hp)
        pred = model.predict(val.X)
    except (NumericalFailure, ValidationError, ArithmeticError, np.linalg.LinAlgError):
        return WORST_FITNESS
    err = float(np.mean((pred - val.y) ** 2))
    return err if math.isfinite(err) else WORST_FITNESS


def make_lssvm_fitness(train, val, space: SearchSpace, kernel_family: str, degree: int = 2) -> Fitness:
    def fitness(position: np.ndarray) -> float:
        return lssvm_fitness(train, val, kernel_family, space.decode(position), degree)

    return fitness

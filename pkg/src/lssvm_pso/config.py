"""Run configuration: one INI file, overridden by command-line flags.

Precedence is flags > file > built-in defaults. Example::

    [data]
    paths = SYN01.csv, SYN02.csv      ; relative to the config file
    symbols = SYN01, SYN02            ; optional, defaults to file stems

    [csv]
    date = Date
    close = Adj Close

    [indicators]
    rsi_period = 14
    ema_alpha = 0.1818

    [kernel]
    family = mlp
    degree = 2
    fixed_C = 100                     ; optional fixed-default overrides

    [search]
    C = 1e-2, 1e6, log10
    scale = 1e-3, 10, log10
    bias = -5, 5, linear

    [pso]
    swarm_size = 30
    max_iters = 100

    [split]
    train_fraction = 0.7
    val_fraction = 0.2

    [run]
    seed = 0
    out = results
    workers = 1
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError, ValidationError
from .evaluate import ExperimentConfig
from .indicators import IndicatorParams
from .kernels import PARAM_NAMES, canonical_family
from .pipeline import CsvSchema
from .pso import Dimension, PsoConfig, SearchSpace, default_space
from .synthetic import DATA_DIR, BENCHMARK_SYMBOL


@dataclass(frozen=True)
class RunConfig:
    paths: tuple[Path, ...] = ()
    symbols: tuple[str, ...] = ()
    schema: CsvSchema = field(default_factory=CsvSchema)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    out: Path = Path("results")
    seed: int = 0
    workers: int = 1

    def datasets(self) -> list[tuple[str, Path]]:
        return list(zip(self.symbols, self.paths))


_INT_FIELDS = {"rsi_period", "mfi_period", "stoch_period", "swarm_size", "max_iters", "degree", "workers"}


def _number(section: str, key: str, raw: str, problems: list[str]):
    try:
        if key in _INT_FIELDS:
            return int(raw)
        return float(raw)
    except ValueError:
        problems.append(f"[{section}] {key}: not a number: {raw!r}")
        return None


def _resolve_paths(entries: list[str], base: Path) -> list[Path]:
    """Expand directories to their *.csv files (sorted); keep files as given."""
    out = []
    for entry in entries:
        p = Path(entry).expanduser()
        if not p.is_absolute():
            p = base / p
        if p.is_dir():
            out.extend(sorted(p.glob("*.csv")))
        else:
            out.append(p)
    return out


def _split_list(raw: str) -> list[str]:
    return [item.strip() for item in raw.replace("\n", ",").split(",") if item.strip()]


def load(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None,
         default_data: str = "single") -> RunConfig:
    """Build a validated RunConfig. Every problem found is reported in one ConfigError.

    ``overrides`` keys: data (list of paths), symbol, seed, out, kernel, workers.
    ``default_data`` picks the bundled fallback when no data is configured:
    ``"single"`` for the benchmark series only, ``"all"`` for every bundled file.
    """
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    problems: list[str] = []
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keep key case (C vs c)
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError([f"config file not found: {path}"])
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise ConfigError([f"config file unreadable: {exc}"]) from None
        base = path.parent

    def section(name: str) -> dict[str, str]:
        return dict(parser[name]) if parser.has_section(name) else {}

    known = {"data", "csv", "indicators", "kernel", "search", "pso", "split", "run"}
    for name in parser.sections():
        if name not in known:
            problems.append(f"unknown section [{name}]")

    # data
    data = section("data")
    if "data" in overrides:
        entries = [str(p) for p in overrides["data"]]
        paths = _resolve_paths(entries, Path.cwd())
        symbols: list[str] = []
    else:
        paths = _resolve_paths(_split_list(data.get("paths", "")), base)
        symbols = _split_list(data.get("symbols", ""))
    if not paths:
        if default_data == "all":
            paths = sorted(DATA_DIR.glob("*.csv"))
        else:
            paths = [DATA_DIR / f"{BENCHMARK_SYMBOL}.csv"]
    if "symbol" in overrides:
        wanted = overrides["symbol"]
        matches = [p for p in paths if p.stem == wanted]
        if len(paths) == 1 and not matches:
            symbols = [wanted]
        elif matches:
            paths, symbols = matches[:1], [wanted]
        else:
            problems.append(f"--symbol {wanted!r} matches none of the data files")
    if symbols and len(symbols) != len(paths):
        problems.append(f"[data] symbols lists {len(symbols)} names for {len(paths)} paths")
        symbols = []
    if not symbols:
        symbols = [p.stem for p in paths]
    for p in paths:
        if not p.is_file():
            problems.append(f"data file not found: {p}")

    # csv schema
    schema_fields = {f.name for f in dataclasses.fields(CsvSchema)}
    csv_section = section("csv")
    for key in csv_section:
        if key not in schema_fields:
            problems.append(f"[csv] unknown key {key!r}")
    schema = CsvSchema(**{k: v for k, v in csv_section.items() if k in schema_fields})

    # indicators
    ind_kwargs = {}
    ind_fields = {f.name for f in dataclasses.fields(IndicatorParams)}
    for key, raw in section("indicators").items():
        if key not in ind_fields:
            problems.append(f"[indicators] unknown key {key!r}")
            continue
        value = _number("indicators", key, raw, problems)
        if value is not None:
            ind_kwargs[key] = value
    indicators = IndicatorParams()
    try:
        indicators = IndicatorParams(**ind_kwargs)
    except ValidationError as exc:
        problems.extend(f"[indicators] {p}" for p in str(exc).split("; "))

    # kernel
    kern = section("kernel")
    family = overrides.get("kernel", kern.get("family", "mlp"))
    try:
        family = canonical_family(family)
    except ValidationError as exc:
        problems.append(f"[kernel] family: {exc}")
        family = "mlp"
    degree = 2
    if "degree" in kern:
        degree = _number("kernel", "degree", kern["degree"], problems) or 2
        if degree < 1:
            problems.append("[kernel] degree must be >= 1")
    fixed = {}
    allowed_fixed = {"C", *PARAM_NAMES[family]} - {"degree"}
    for key, raw in kern.items():
        if key in ("family", "degree"):
            continue
        if not key.startswith("fixed_") or key[6:] not in allowed_fixed:
            problems.append(f"[kernel] unknown key {key!r} for {family} kernel")
            continue
        value = _number("kernel", key, raw, problems)
        if value is not None:
            fixed[key[6:]] = value

    # search space
    space = default_space(family)
    search = section("search")
    if search:
        dims = {d.name: d for d in space.dims}
        for name, raw in search.items():
            if name not in dims:
                problems.append(f"[search] {name!r} is not a parameter of the {family} kernel")
                continue
            parts = _split_list(raw)
            if len(parts) not in (2, 3):
                problems.append(f"[search] {name}: expected 'lower, upper[, scale]'")
                continue
            try:
                lo, hi = float(parts[0]), float(parts[1])
                dims[name] = Dimension(name, lo, hi, parts[2] if len(parts) == 3 else dims[name].scale)
            except ValueError as exc:
                problems.append(f"[search] {name}: {exc}")
        space = SearchSpace(tuple(dims.values()))

    # pso
    pso_kwargs: dict[str, Any] = {}
    pso_fields = {f.name for f in dataclasses.fields(PsoConfig)} - {"seed"}
    for key, raw in section("pso").items():
        if key not in pso_fields:
            problems.append(f"[pso] unknown key {key!r}")
            continue
        value = _number("pso", key, raw, problems)
        if value is not None:
            pso_kwargs[key] = value
    pso_cfg = PsoConfig()
    try:
        pso_cfg = PsoConfig(**pso_kwargs)
    except ValidationError as exc:
        problems.extend(f"[pso] {p}" for p in str(exc).split("; "))

    # split
    split = section("split")
    fractions = {}
    for key in ("train_fraction", "val_fraction"):
        raw = overrides.get(key, split.get(key))
        value = 0.7 if key == "train_fraction" else 0.2
        if raw is not None:
            parsed = _number("split", key, str(raw), problems)
            if parsed is not None:
                value = parsed
        if not 0 < value < 1:
            problems.append(f"[split] {key} must be in (0, 1), got {value}")
        fractions[key] = value
    for key in split:
        if key not in fractions:
            problems.append(f"[split] unknown key {key!r}")

    # run
    run = section("run")
    for key in run:
        if key not in ("seed", "out", "workers"):
            problems.append(f"[run] unknown key {key!r}")
    seed = 0
    raw_seed = overrides.get("seed", run.get("seed", 0))
    try:
        seed = int(raw_seed)
        if not 0 <= seed < 2**64:
            raise ValueError
    except (TypeError, ValueError):
        problems.append(f"[run] seed must be an unsigned 64-bit integer, got {raw_seed!r}")
        seed = 0
    out = Path(overrides.get("out", run.get("out", "results")))
    if not out.is_absolute() and "out" not in overrides and "out" in run:
        out = base / out
    workers = overrides.get("workers", run.get("workers", 1))
    try:
        workers = int(workers)
        if workers < 1:
            raise ValueError
    except (TypeError, ValueError):
        problems.append(f"[run] workers must be a positive integer, got {workers!r}")
        workers = 1

    if problems:
        raise ConfigError(problems)

    experiment = ExperimentConfig(
        indicators=indicators,
        kernel=family,
        degree=int(degree),
        space=space,
        pso=pso_cfg,
        train_fraction=fractions["train_fraction"],
        val_fraction=fractions["val_fraction"],
        fixed_params=fixed or None,
    )
    return RunConfig(
        paths=tuple(paths),
        symbols=tuple(symbols),
        schema=schema,
        experiment=experiment,
        out=out,
        seed=seed,
        workers=workers,
    )

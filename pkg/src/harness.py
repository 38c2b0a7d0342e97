#!/usr/bin/env python3
# Copyright 2024 Jon Seager (@jnsgruk)
# See LICENSE file for licensing details.

"""Desk-scale numerical studies of the entropy estimator and the test statistic.

An experiment is described by an `ExperimentConfig` and produces long-format rows:
one per (grid point, N, repetition), or per histogram bin for `empirical-pdf`.
Every row of a group also carries the group's mean and sample variance, so the
output can be plotted directly. Rows are produced in canonical order, sorted by
grid key, N and repetition, whatever the number of threads.
"""

import csv
import hashlib
import logging
import math
from functools import partial
from multiprocessing.pool import ThreadPool
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Literal, Optional, TextIO, Tuple

import numpy as np
import yaml
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from distributions import (
    GGParams,
    RandomStream,
    STParams,
    canonical_gg,
    gg_coordinate_variance,
    gg_log_pdf,
    iep,
    sample_gg,
    sample_st,
    standardize,
)
from errors import ConfigurationError
from gof import library_version, test_statistic
from neighbors import Sample
from normality import normality_of_statistic

logger = logging.getLogger(__name__)

Experiment = Literal["consistency", "misspec", "student-t", "normality", "empirical-pdf"]

EXPERIMENTS = ("consistency", "misspec", "student-t", "normality", "empirical-pdf")

# Largest sample size an experiment grid may request.
MAX_DESK_SIZE = 100_000

# Histogram range of the standardized first coordinate in `empirical-pdf`.
HISTOGRAM_RANGE = (-4.0, 4.0)

COLUMNS = [
    "experiment",
    "quantity",
    "m",
    "s0",
    "s1",
    "nu",
    "N",
    "k",
    "repetition",
    "x",
    "value",
    "mean",
    "variance",
    "reference",
]

EXPERIMENT_DEFAULTS: Dict[str, dict] = {
    "consistency": {"dims": [2], "shapes": [1.0]},
    "misspec": {"dims": [2], "shapes": [0.5, 1.0, 2.0, 4.0], "data_shapes": [2.0]},
    "student-t": {"dims": [1, 2], "shapes": [1.0, 2.0], "dofs": [3.0, 5.0]},
    "normality": {"dims": [1], "shapes": [2.0], "sizes": [500], "replicates": 200},
    "empirical-pdf": {"dims": [1], "shapes": [1.0, 2.0, 4.0], "sizes": [10_000]},
}


class ExperimentConfig(BaseModel):
    """Settings of one experiment run; together with the library version they fix its output."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    experiment: Experiment
    dims: List[int] = Field(default=[2], description="Dimensions m.")
    shapes: List[float] = Field(
        default=[1.0], description="Shapes s tested (s₀); the data shape too, except in misspec."
    )
    data_shapes: List[float] = Field(default=[2.0], description="Data shapes s₁ (misspec).")
    dofs: List[float] = Field(default=[3.0], description="Student-t degrees of freedom ν.")
    sizes: List[int] = Field(default=[500, 1000, 2000, 4000], description="N schedule.")
    ks: List[int] = Field(default=[1], description="Neighbour orders k.")
    repetitions: int = Field(default=10, ge=1, description="Repetitions M per grid point.")
    replicates: int = Field(default=200, ge=3, description="Values of T per Shapiro-Wilk test.")
    bins: int = Field(default=40, ge=2, description="Histogram bins (empirical-pdf).")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Master seed.")
    output: Optional[str] = Field(default=None, description="CSV path; stdout when unset.")
    output_format: Literal["csv"] = "csv"

    @field_validator("dims", "sizes", "ks")
    @classmethod
    def _positive_integers(cls, value):
        if not value:
            raise ValueError("grid must not be empty")
        if any(v < 1 for v in value):
            raise ValueError(f"grid values must be positive, got {value}")
        return sorted(set(value))

    @field_validator("shapes", "data_shapes", "dofs")
    @classmethod
    def _positive_reals(cls, value):
        if not value:
            raise ValueError("grid must not be empty")
        if any(not (v > 0 and math.isfinite(v)) for v in value):
            raise ValueError(f"grid values must be positive and finite, got {value}")
        return sorted(set(float(v) for v in value))

    @field_validator("sizes")
    @classmethod
    def _desk_scale(cls, value):
        if max(value) > MAX_DESK_SIZE:
            raise ValueError(f"sample sizes are capped at {MAX_DESK_SIZE}")
        return value

    @model_validator(mode="after")
    def _check_orders(self):
        if max(self.ks) >= min(self.sizes):
            raise ValueError("every k must be smaller than every N")
        return self

    def digest(self) -> str:
        """Report a short SHA-256 of the settings that determine the rows."""
        payload = self.model_dump_json(exclude={"output"})
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def load_config_file(path) -> dict:
    """Read a flat YAML mapping of config keys."""
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as e:
        raise ConfigurationError(f"{path} is not valid YAML: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path} must hold a mapping of config keys")
    return data


def build_config(
    experiment: str, file_values: Optional[dict] = None, overrides: Optional[dict] = None
) -> ExperimentConfig:
    """Merge per-experiment defaults, file values and flag overrides, in that order."""
    if experiment not in EXPERIMENTS:
        raise ConfigurationError(
            f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}"
        )
    file_values = dict(file_values or {})
    named = file_values.pop("experiment", experiment)
    if named != experiment:
        logger.warning("config names experiment %r; running %r", named, experiment)

    merged = {**EXPERIMENT_DEFAULTS[experiment], **file_values}
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in file_values:
            logger.warning("flag overrides config key %s=%r with %r", key, file_values[key], value)
        merged[key] = value
    try:
        return ExperimentConfig(experiment=experiment, **merged)
    except ValidationError as e:
        raise ConfigurationError(f"invalid {experiment} config: {e}") from e


def _row(config: ExperimentConfig, quantity: str, **fields) -> dict:
    row = dict.fromkeys(COLUMNS)
    row.update(experiment=config.experiment, quantity=quantity, **fields)
    return row


Task = Callable[[], List[dict]]
Grid = Iterator[Tuple[dict, float, Callable[[RandomStream], Sample]]]


def _consistency_grid(config: ExperimentConfig) -> Grid:
    for m in config.dims:
        for s in config.shapes:
            for n in config.sizes:
                yield {"m": m, "s1": s, "N": n}, s, partial(sample_gg, canonical_gg(m, s), n)


def _misspec_grid(config: ExperimentConfig) -> Grid:
    for m in config.dims:
        for s1 in config.data_shapes:
            for n in config.sizes:
                draw = partial(sample_gg, canonical_gg(m, s1), n)
                for s0 in config.shapes:
                    yield {"m": m, "s1": s1, "N": n}, s0, draw


def _student_t_grid(config: ExperimentConfig) -> Grid:
    for m in config.dims:
        for nu in config.dofs:
            for n in config.sizes:
                draw = partial(sample_st, STParams(dim=m, dof=nu), n)
                for s in config.shapes:
                    yield {"m": m, "nu": nu, "N": n}, s, draw


def _statistic_rows(config, stream, data_key, s0, k, j, draw) -> List[dict]:
    # The stream is keyed by the data alone, so every tested s₀ and k sees the same sample.
    sample = draw(stream.derive(config.experiment, *data_key.values(), j))
    value = test_statistic(sample, s0, k)
    return [_row(config, "T", s0=s0, k=k, repetition=j, value=value, **data_key)]


def _statistic_tasks(config: ExperimentConfig, stream: RandomStream, grid: Grid) -> List[Task]:
    return [
        partial(_statistic_rows, config, stream, data_key, s0, k, j, draw)
        for data_key, s0, draw in grid
        for k in config.ks
        for j in range(config.repetitions)
    ]


def _normality_rows(config, stream, m, s, n, k) -> List[dict]:
    p_values = normality_of_statistic(
        m,
        s,
        n,
        k,
        config.replicates,
        config.repetitions,
        stream.derive(config.experiment, m, s, n, k),
    )
    return [
        _row(config, "sw_p_value", m=m, s0=s, s1=s, N=n, k=k, repetition=j, value=p)
        for j, p in enumerate(p_values)
    ]


def _normality_tasks(config: ExperimentConfig, stream: RandomStream) -> List[Task]:
    return [
        partial(_normality_rows, config, stream, m, s, n, k)
        for m in config.dims
        for s in config.shapes
        for n in config.sizes
        for k in config.ks
    ]


def _histogram_edges(config: ExperimentConfig) -> np.ndarray:
    lo, hi = HISTOGRAM_RANGE
    return np.linspace(lo, hi, config.bins + 1)


def _reference_density(params: GGParams, centres: np.ndarray) -> list:
    if params.dim != 1:
        return [None] * len(centres)
    sigma = math.sqrt(gg_coordinate_variance(params))
    # X/σ has density σ·f(σx).
    return [float(v) for v in sigma * np.exp(gg_log_pdf(params, sigma * centres))]


def _empirical_pdf_rows(config, stream, m, s, n, j) -> List[dict]:
    params = iep(m, s)
    edges = _histogram_edges(config)
    centres = 0.5 * (edges[:-1] + edges[1:])
    width = edges[1] - edges[0]
    raw = sample_gg(params, n, stream.derive(config.experiment, m, s, n, j))
    sample = standardize(raw, params)
    counts, _ = np.histogram(sample.points[:, 0], bins=edges)
    heights = counts / (n * width)
    return [
        _row(
            config,
            "density",
            m=m,
            s0=s,
            s1=s,
            N=n,
            repetition=j,
            x=float(x),
            value=float(h),
            reference=ref,
        )
        for x, h, ref in zip(centres, heights, _reference_density(params, centres))
    ]


def _empirical_pdf_tasks(config: ExperimentConfig, stream: RandomStream) -> List[Task]:
    return [
        partial(_empirical_pdf_rows, config, stream, m, s, n, j)
        for m in config.dims
        for s in config.shapes
        for n in config.sizes
        for j in range(config.repetitions)
    ]


def _group_key(row: dict) -> tuple:
    return tuple(row[c] for c in COLUMNS if c not in ("repetition", "value", "mean", "variance"))


def _aggregate(rows: List[dict]) -> None:
    groups: Dict[tuple, List[dict]] = {}
    for row in rows:
        groups.setdefault(_group_key(row), []).append(row)
    for members in groups.values():
        values = np.array([r["value"] for r in members], dtype=np.float64)
        mean = math.fsum(values) / len(values)
        variance = (
            math.fsum((values - mean) ** 2) / (len(values) - 1) if len(values) > 1 else None
        )
        for r in members:
            r["mean"] = mean
            r["variance"] = variance


def _sort_key(row: dict) -> tuple:
    def part(value):
        return (value is None, value if value is not None else 0)

    order = ("m", "s1", "nu", "s0", "k", "N", "repetition", "x")
    return tuple(part(row[c]) for c in order)


def run_experiment(config: ExperimentConfig, threads: int = 1) -> List[dict]:
    """Run the experiment and return its rows in canonical order."""
    stream = RandomStream(seed=config.seed)
    grids = {
        "consistency": _consistency_grid,
        "misspec": _misspec_grid,
        "student-t": _student_t_grid,
    }
    if config.experiment in grids:
        tasks = _statistic_tasks(config, stream, grids[config.experiment](config))
    elif config.experiment == "normality":
        tasks = _normality_tasks(config, stream)
    else:
        tasks = _empirical_pdf_tasks(config, stream)

    logger.info("running %s: %d tasks on %d threads", config.experiment, len(tasks), threads)
    if threads > 1:
        with ThreadPool(processes=threads) as pool:
            results = pool.map(lambda task: task(), tasks)
    else:
        results = [task() for task in tasks]

    rows = [row for result in results for row in result]
    _aggregate(rows)
    rows.sort(key=_sort_key)
    logger.info("%s finished with %d rows", config.experiment, len(rows))
    return rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return repr(value) if math.isfinite(value) else str(value)
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_rows(rows: List[dict], config: ExperimentConfig, out: TextIO) -> None:
    """Write rows as CSV, preceded by `#` lines naming the seed, config digest and version."""
    out.write(f"# experiment: {config.experiment}\n")
    out.write(f"# seed: {config.seed}\n")
    out.write(f"# config_sha256: {config.digest()}\n")
    out.write(f"# version: {library_version()}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in COLUMNS])

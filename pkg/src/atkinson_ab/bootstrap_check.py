"""Bootstrap-vs-theoretical variance verification on synthetic lognormal data.

For each (sample size, eps) cell the harness draws fresh base samples,
bootstraps the index, and reports the ratio of the bootstrap variance to the
delta-method variance. Ratios near 1 confirm the variance formula; the
production inference path never uses the bootstrap.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import AversionParam, _as_aversion, _validate_values, estimate
from .errors import ValidationError

RNG_NAME = "numpy PCG64 (independent streams spawned per (seed, cell, repeat))"

_CHUNK = 250


@dataclass(frozen=True)
class LognormalSpec:
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.sigma) or self.sigma <= 0.0:
            raise ValidationError(f"sigma must be > 0, got {self.sigma!r}")
        if not math.isfinite(self.mu):
            raise ValidationError(f"mu must be finite, got {self.mu!r}")


@dataclass(frozen=True)
class BootstrapConfig:
    sample_sizes: tuple[int, ...]
    epsilons: tuple[AversionParam, ...]
    bootstrap_runs: int = 1000
    outer_repeats: int = 50
    rng_seed: int = 0
    distribution: LognormalSpec = field(default_factory=LognormalSpec)

    def __post_init__(self) -> None:
        if not self.sample_sizes or any(n < 2 for n in self.sample_sizes):
            raise ValidationError("sample_sizes must be a nonempty list of counts >= 2")
        if not self.epsilons:
            raise ValidationError("epsilons must be nonempty")
        if self.bootstrap_runs < 100:
            raise ValidationError(f"bootstrap_runs must be >= 100, got {self.bootstrap_runs}")
        if self.outer_repeats < 1:
            raise ValidationError(f"outer_repeats must be >= 1, got {self.outer_repeats}")

    @classmethod
    def from_dict(cls, raw: dict) -> "BootstrapConfig":
        dist = raw.get("distribution", {})
        return cls(
            sample_sizes=tuple(int(n) for n in raw.get("sample_sizes", [])),
            epsilons=tuple(AversionParam(e) for e in raw.get("epsilons", [])),
            bootstrap_runs=int(raw.get("bootstrap_runs", 1000)),
            outer_repeats=int(raw.get("outer_repeats", 50)),
            rng_seed=int(raw.get("rng_seed", 0)),
            distribution=LognormalSpec(
                mu=float(dist.get("mu", 0.0)), sigma=float(dist.get("sigma", 1.0))
            ),
        )


def bootstrap_variance(
    values: Sequence[float] | np.ndarray,
    eps: AversionParam | float,
    runs: int,
    seed: int | None = None,
    *,
    rng: np.random.Generator | None = None,
) -> float:
    """Sample variance of the index over ``runs`` resamples with replacement.

    Deterministic for a fixed seed. An all-equal sample yields exactly 0 (every
    resample has index 0); downstream ratio computation rejects that case.
    """
    eps = _as_aversion(eps)
    x = _validate_values(values, allow_empty=False)
    if runs < 2:
        raise ValidationError(f"need at least 2 bootstrap runs, got {runs}")
    if rng is None:
        rng = np.random.default_rng(seed)
    n = x.size
    a = 1.0 - eps.epsilon
    xp = x**a
    indices_dtype = np.int32 if n < 2**31 else np.int64
    out = np.empty(runs, dtype=np.float64)
    done = 0
    while done < runs:
        m = min(_CHUNK, runs - done)
        idx = rng.integers(0, n, size=(m, n), dtype=indices_dtype)
        mean_x = x[idx].mean(axis=1)
        mean_p = xp[idx].mean(axis=1)
        out[done : done + m] = 1.0 - mean_p ** (1.0 / a) / mean_x
        done += m
    return float(np.var(out, ddof=1))


@dataclass(frozen=True)
class RatioCell:
    n: int
    epsilon: float
    mean_ratio: float
    p10: float
    p90: float
    repeats: int
    bootstrap_runs: int
    seed: int
    ratios: tuple[float, ...]


@dataclass(frozen=True)
class RatioTable:
    cells: list[RatioCell]
    rng_name: str
    distribution: LognormalSpec

    def to_csv(self, dest: io.TextIOBase) -> None:
        writer = csv.writer(dest, lineterminator="\n")
        writer.writerow(["n", "epsilon", "mean_ratio", "p10", "p90", "repeats", "B", "seed"])
        for c in self.cells:
            writer.writerow(
                [c.n, c.epsilon, c.mean_ratio, c.p10, c.p90, c.repeats, c.bootstrap_runs, c.seed]
            )

    def to_json_dict(self) -> dict:
        return {
            "rng": self.rng_name,
            "distribution": {"lognormal_mu": self.distribution.mu, "lognormal_sigma": self.distribution.sigma},
            "cells": [
                {
                    "n": c.n,
                    "epsilon": c.epsilon,
                    "mean_ratio": c.mean_ratio,
                    "p10": c.p10,
                    "p90": c.p90,
                    "repeats": c.repeats,
                    "B": c.bootstrap_runs,
                    "seed": c.seed,
                }
                for c in self.cells
            ],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)


def _one_ratio(cfg: BootstrapConfig, cell_index: int, n: int, eps: AversionParam, repeat: int) -> float:
    seq = np.random.SeedSequence([cfg.rng_seed, cell_index, repeat])
    rng = np.random.default_rng(seq)
    xs = rng.lognormal(cfg.distribution.mu, cfg.distribution.sigma, n)
    est = estimate(xs, eps)
    theory = est.variance
    if theory <= 0.0:
        raise ValidationError(
            f"zero theoretical variance in cell (n={n}, eps={eps.epsilon}); ratio undefined"
        )
    boot = bootstrap_variance(xs, eps, cfg.bootstrap_runs, rng=rng)
    return boot / theory


def ratio_table(cfg: BootstrapConfig, threads: int | None = None) -> RatioTable:
    """Mean and dispersion of bootstrap/theoretical variance ratios per (n, eps).

    Every (cell, repeat) unit owns an RNG stream derived from the seed and its
    position in the grid, so the result is independent of thread count.
    """
    grid = [
        (ci * len(cfg.epsilons) + ei, n, eps)
        for ci, n in enumerate(cfg.sample_sizes)
        for ei, eps in enumerate(cfg.epsilons)
    ]
    units = [(cell, n, eps, r) for cell, n, eps in grid for r in range(cfg.outer_repeats)]
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(lambda u: _one_ratio(cfg, u[0], u[1], u[2], u[3]), units)
            )
    else:
        results = [_one_ratio(cfg, *u) for u in units]

    cells: list[RatioCell] = []
    for i, (cell, n, eps) in enumerate(grid):
        ratios = results[i * cfg.outer_repeats : (i + 1) * cfg.outer_repeats]
        arr = np.asarray(ratios)
        cells.append(
            RatioCell(
                n=n,
                epsilon=eps.epsilon,
                mean_ratio=float(arr.mean()),
                p10=float(np.percentile(arr, 10)),
                p90=float(np.percentile(arr, 90)),
                repeats=cfg.outer_repeats,
                bootstrap_runs=cfg.bootstrap_runs,
                seed=cfg.rng_seed,
                ratios=tuple(float(r) for r in ratios),
            )
        )
    return RatioTable(cells=cells, rng_name=RNG_NAME, distribution=cfg.distribution)

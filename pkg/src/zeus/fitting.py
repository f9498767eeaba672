"""Binned model fitting on top of the optimization pipeline.

A model prediction is compared to observed bin counts through a
chi-square objective with Gaussian per-bin errors; fit quality is judged
by the pull in each bin, (observed - predicted) / sigma.  Ships a
smoothly-falling spectrum family p0 * (1-x)**p1 / x**p2 over normalized
bin centers and a synthetic-data generator, so the demo is self
contained; the family is illustrative, not a physics model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence, TextIO

import numpy as np

from .autodiff import DomainError, powf
from .driver import ZeusConfig, ZeusResult, zeus_run

__all__ = [
    "BinnedDataset",
    "FitModel",
    "chi_square_objective",
    "pulls",
    "falling_spectrum",
    "generate_spectrum_data",
    "load_dataset",
    "save_dataset",
    "fit",
    "FitOutcome",
    "write_report",
]


def _default_sigma(counts: np.ndarray) -> np.ndarray:
    # sqrt(N) statistical error with a floor of 1 so empty bins stay usable.
    return np.sqrt(np.maximum(counts, 1.0))


@dataclass
class BinnedDataset:
    """Histogram data: B+1 ascending edges, B counts, B positive sigmas."""

    bin_edges: np.ndarray
    counts: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.bin_edges.ndim != 1 or len(self.bin_edges) != len(self.counts) + 1:
            raise ValueError("need exactly len(counts) + 1 bin edges")
        if not np.all(np.diff(self.bin_edges) > 0):
            raise ValueError("bin edges must be strictly ascending")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")
        if self.sigma is None:
            self.sigma = _default_sigma(self.counts)
        else:
            self.sigma = np.asarray(self.sigma, dtype=float)
            if len(self.sigma) != len(self.counts):
                raise ValueError("need one sigma per bin")
            if np.any(self.sigma <= 0):
                raise ValueError("sigma must be positive")

    @property
    def n_bins(self) -> int:
        return len(self.counts)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


@dataclass(frozen=True)
class FitModel:
    """Parametric prediction of the expected count in a bin.

    ``predict(params, center)`` must follow the generic-scalar contract:
    the parameters may be floats or Dual scalars and the returned value
    has the same kind, so the fit objective is differentiable by forward
    AD without any extra code.
    """

    n_params: int
    predict: Callable[[Sequence, float], object]
    name: str = "model"


def chi_square_objective(
    model: FitModel, data: BinnedDataset
) -> Callable[[Sequence], object]:
    """Sum of squared normalized residuals as a generic-scalar objective.

    f(theta) = sum_b ((counts_b - predict(theta, center_b)) / sigma_b)**2

    Raises :class:`zeus.autodiff.DomainError` from inside the returned
    objective when a prediction is non-finite.
    """
    centers = data.centers.tolist()
    counts = data.counts.tolist()
    sigmas = data.sigma.tolist()

    def objective(theta: Sequence) -> object:
        total = 0.0
        for center, observed, sigma in zip(centers, counts, sigmas):
            predicted = model.predict(theta, center)
            value = predicted.real if hasattr(predicted, "real") else predicted
            if not math.isfinite(value):
                raise DomainError(
                    f"non-finite model prediction at bin center {center}"
                )
            residual = (observed - predicted) / sigma
            total = total + residual * residual
        return total

    return objective


def pulls(
    model: FitModel, theta: Sequence[float], data: BinnedDataset
) -> np.ndarray:
    """Per-bin (observed - predicted) / sigma at the given parameters."""
    theta = [float(v) for v in theta]
    predicted = np.array(
        [model.predict(theta, c) for c in data.centers.tolist()], dtype=float
    )
    return (data.counts - predicted) / data.sigma


def falling_spectrum(scale: float) -> FitModel:
    """Three-parameter smoothly-falling spectrum.

    predict((p0, p1, p2), m) = p0 * (1 - x)**p1 / x**p2 with x = m/scale.
    Bin centers must satisfy 0 < m < scale so both power bases stay
    positive.
    """

    def predict(theta: Sequence, center: float) -> object:
        x = center / scale
        if not 0.0 < x < 1.0:
            raise DomainError("bin center outside (0, scale)")
        p0, p1, p2 = theta[0], theta[1], theta[2]
        # written as a product so extreme exponents overflow to infinity
        # (caught by the objective's finiteness check) instead of
        # underflowing into a division by zero
        return p0 * powf(1.0 - x, p1) * powf(x, -p2)

    return FitModel(n_params=3, predict=predict, name="falling_spectrum")


def generate_spectrum_data(
    model: FitModel,
    theta: Sequence[float],
    bin_edges: Sequence[float],
    rng: np.random.Generator | None = None,
) -> BinnedDataset:
    """Synthetic dataset drawn from the model.

    Without ``rng`` the counts are the exact model predictions
    (noiseless); with it they are Poisson fluctuations around the
    predictions.
    """
    edges = np.asarray(bin_edges, dtype=float)
    centers = 0.5 * (edges[:-1] + edges[1:])
    theta = [float(v) for v in theta]
    expected = np.array([model.predict(theta, c) for c in centers], dtype=float)
    counts = rng.poisson(expected).astype(float) if rng is not None else expected
    return BinnedDataset(bin_edges=edges, counts=counts)


def load_dataset(path) -> BinnedDataset:
    """Read a dataset from delimited text.

    One row per bin with columns edge_low, edge_high, count and an
    optional fourth column sigma; fields split on commas or whitespace,
    blank lines and ``#`` comments ignored.  Bins must be contiguous and
    ascending.
    """
    rows = []
    with open(path) as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p for p in line.replace(",", " ").split() if p]
            if len(parts) not in (3, 4):
                raise ValueError(
                    f"{path}:{lineno}: expected 3 or 4 columns, got {len(parts)}"
                )
            rows.append([float(p) for p in parts])
    if not rows:
        raise ValueError(f"{path}: no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: inconsistent column counts")
    edges = [rows[0][0]]
    for i, row in enumerate(rows):
        if abs(row[0] - edges[-1]) > 1e-9 * max(1.0, abs(row[0])):
            raise ValueError(f"{path}: bin {i} is not contiguous with bin {i-1}")
        edges.append(row[1])
    counts = [row[2] for row in rows]
    sigma = [row[3] for row in rows] if widths == {4} else None
    return BinnedDataset(
        bin_edges=np.array(edges), counts=np.array(counts),
        sigma=None if sigma is None else np.array(sigma),
    )


def save_dataset(data: BinnedDataset, path) -> None:
    """Write a dataset in the format :func:`load_dataset` reads."""
    with open(path, "w") as handle:
        handle.write("# edge_low edge_high count sigma\n")
        for lo, hi, count, sigma in zip(
            data.bin_edges[:-1].tolist(), data.bin_edges[1:].tolist(),
            data.counts.tolist(), data.sigma.tolist(),
        ):
            handle.write(f"{lo!r} {hi!r} {count!r} {sigma!r}\n")


@dataclass
class FitOutcome:
    """Fitted parameters with the machinery's full result attached."""

    theta: tuple[float, ...]
    chi_square: float
    pulls: np.ndarray
    result: ZeusResult
    model: FitModel = field(repr=False)
    data: BinnedDataset = field(repr=False)


def fit(
    model: FitModel,
    data: BinnedDataset,
    param_lower: Sequence[float],
    param_upper: Sequence[float],
    config: ZeusConfig | None = None,
    seed: int = 0,
) -> FitOutcome:
    """Fit the model to the data by minimizing the chi-square objective.

    The per-parameter box [param_lower, param_upper] is mapped onto the
    optimizer's unit cube, so parameters of very different magnitudes are
    searched on equal footing.  ``config`` overrides the default small
    multistart setup; its ``dim`` and ``range`` are forced to the fit's.
    """
    lower = [float(v) for v in param_lower]
    upper = [float(v) for v in param_upper]
    if len(lower) != model.n_params or len(upper) != model.n_params:
        raise ValueError("parameter bounds must match the model's n_params")
    if not all(lo < up for lo, up in zip(lower, upper)):
        raise ValueError("parameter bounds require lower < upper")
    span = [up - lo for lo, up in zip(lower, upper)]
    objective = chi_square_objective(model, data)

    def scaled_objective(u: Sequence) -> object:
        theta = [lo + ui * sp for ui, lo, sp in zip(u, lower, span)]
        return objective(theta)

    if config is None:
        # Chi-square surfaces for falling spectra are stiff: most of the
        # box is either a flat plateau (predictions underflow toward zero)
        # or an overflow region whose runs end in domain errors.  A large
        # swarm with a deep backtracking budget and no early stop lets the
        # swarm contract onto the valley first, so enough refinements
        # start inside it.
        config = ZeusConfig(
            N=256,
            dim=model.n_params,
            range=(0.0, 1.0),
            iter_pso=10,
            iter_bfgs=600,
            iter_ls=40,
            theta=1e-8,
            seed=seed,
        )
    else:
        config = replace_fit_fields(config, model.n_params)
    result = zeus_run(scaled_objective, config)
    theta = tuple(
        float(lo + ui * sp)
        for ui, lo, sp in zip(result.best.x_final, lower, span)
    )
    return FitOutcome(
        theta=theta,
        chi_square=float(objective(list(theta))),
        pulls=pulls(model, theta, data),
        result=result,
        model=model,
        data=data,
    )


def replace_fit_fields(config: ZeusConfig, n_params: int) -> ZeusConfig:
    """Copy of ``config`` with dimension and range pinned to the fit's."""
    return replace(config, dim=n_params, range=(0.0, 1.0))


def write_report(handle: TextIO, outcome: FitOutcome) -> None:
    """Human-readable fit report: parameters, chi-square, per-bin pulls."""
    handle.write(f"model: {outcome.model.name}\n")
    handle.write(f"bins: {outcome.data.n_bins}\n")
    for i, value in enumerate(outcome.theta):
        handle.write(f"p{i}: {value!r}\n")
    handle.write(f"chi_square: {outcome.chi_square!r}\n")
    handle.write(f"converged_runs: {outcome.result.converged_count}\n")
    handle.write("# bin_center observed predicted pull\n")
    theta = list(outcome.theta)
    for center, observed, pull in zip(
        outcome.data.centers, outcome.data.counts, outcome.pulls
    ):
        predicted = outcome.model.predict(theta, float(center))
        handle.write(f"{center:g} {observed:g} {predicted:.6g} {pull:+.4f}\n")

"""Exploratory statistics over a cleaned weather table: Pearson correlation
matrix, distribution estimates, and monthly climatology profiles. Results
are exported as CSV so any plotting tool can render them.
"""

from __future__ import annotations

import dataclasses

import numpy as np


@dataclasses.dataclass(frozen=True)
class CorrelationMatrix:
    values: np.ndarray
    feature_names: tuple

    def top_partners(self, feature, count=4):
        """Strongest |r| partners of one feature, excluding itself."""
        i = self.feature_names.index(feature)
        strength = np.abs(self.values[i]).copy()
        strength[i] = -1.0
        order = np.argsort(-strength, kind="stable")[:count]
        return [(self.feature_names[j], float(self.values[i, j])) for j in order]


@dataclasses.dataclass(frozen=True)
class MonthlyProfile:
    feature: str
    months: tuple  # 1..12
    mean: np.ndarray
    median: np.ndarray
    q1: np.ndarray
    q3: np.ndarray


@dataclasses.dataclass(frozen=True)
class DensityEstimate:
    grid: np.ndarray
    density: np.ndarray
    method: str  # "histogram" or "gaussian_kde"
    fallback: bool = False  # kde degenerated to a histogram


def pearson_matrix(table):
    """Pairwise Pearson r over all features of a cleaned table.

    Constant columns correlate 0 with everything (convention) and 1 with
    themselves.
    """
    matrix = table.to_matrix()
    if matrix.shape[0] < 2:
        raise ValueError("need at least 2 rows")
    constant = (matrix == matrix[0]).all(axis=0)  # exact, no mean-roundoff
    centered = matrix - matrix.mean(axis=0)
    cov = centered.T @ centered / (matrix.shape[0] - 1)
    std = np.sqrt(np.diag(cov))
    safe_std = np.where(constant | (std == 0.0), 1.0, std)
    denom = np.outer(safe_std, safe_std)
    values = cov / denom
    values[constant, :] = 0.0
    values[:, constant] = 0.0
    np.fill_diagonal(values, 1.0)
    values = np.clip(values, -1.0, 1.0)
    return CorrelationMatrix(values=values, feature_names=tuple(table.feature_names))


def density_estimate(values, method="histogram", bins=40):
    """Distribution estimate for one feature.

    histogram: densities over ``bins`` equal-width bins (integrates to 1
    over the data range). gaussian_kde: Gaussian kernel with the Silverman
    bandwidth 1.06 * sigma * n^(-1/5), evaluated on a 256-point grid over
    [min - 3h, max + 3h]; degenerates to a histogram when variance is zero.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        raise ValueError("need at least 2 values")
    if method == "histogram":
        if bins < 1:
            raise ValueError("bins must be >= 1")
        density, edges = np.histogram(values, bins=bins, density=True)
        centers = 0.5 * (edges[:-1] + edges[1:])
        return DensityEstimate(grid=centers, density=density, method="histogram")
    if method != "gaussian_kde":
        raise ValueError(f"unknown density method {method!r}")

    sigma = values.std(ddof=1)
    if sigma == 0.0:
        est = density_estimate(values, method="histogram", bins=bins)
        return dataclasses.replace(est, fallback=True)
    h = 1.06 * sigma * len(values) ** (-1.0 / 5.0)
    grid = np.linspace(values.min() - 3.0 * h, values.max() + 3.0 * h, 256)
    z = (grid[:, None] - values[None, :]) / h
    density = np.exp(-0.5 * z * z).sum(axis=1) / (len(values) * h * np.sqrt(2.0 * np.pi))
    return DensityEstimate(grid=grid, density=density, method="gaussian_kde")


def monthly_profile(table, feature):
    """Per calendar month (pooled across years): mean, median, quartiles."""
    values = table.column(feature)
    months = np.array([r.date.month for r in table.records])
    mean, median, q1, q3 = (np.empty(12) for _ in range(4))
    for m in range(1, 13):
        sample = values[months == m]
        if sample.size == 0:
            raise ValueError(f"no rows for month {m}")
        mean[m - 1] = sample.mean()
        q1[m - 1], median[m - 1], q3[m - 1] = np.quantile(sample, [0.25, 0.5, 0.75])
    return MonthlyProfile(
        feature=feature, months=tuple(range(1, 13)),
        mean=mean, median=median, q1=q1, q3=q3,
    )


def correlation_to_csv(corr):
    lines = ["feature," + ",".join(corr.feature_names)]
    for name, row in zip(corr.feature_names, corr.values):
        lines.append(name + "," + ",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def density_to_csv(est):
    lines = [f"# method={est.method} fallback={est.fallback}", "grid,density"]
    for g, d in zip(est.grid, est.density):
        lines.append(f"{float(g)!r},{float(d)!r}")
    return "\n".join(lines) + "\n"


def monthly_to_csv(profile):
    lines = ["month,mean,median,q1,q3"]
    for i, month in enumerate(profile.months):
        cells = (profile.mean[i], profile.median[i], profile.q1[i], profile.q3[i])
        lines.append(f"{month}," + ",".join(repr(float(v)) for v in cells))
    return "\n".join(lines) + "\n"

"""Distribution comparison metrics and tidy plot-data exports."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import EmptySampleError, LengthMismatchError

__all__ = [
    "ks_statistic",
    "tv_distance",
    "class_frequencies",
    "MarginalRow",
    "MarginalReport",
    "marginal_report",
    "export_marginal_hist",
    "export_pairwise_scatter",
    "export_shift_curve",
    "export_cf_curve",
    "export_coef_history",
]


def ks_statistic(a, b) -> float:
    """Exact two-sample Kolmogorov-Smirnov statistic.

    Both empirical CDFs are right-continuous steps, so the supremum is
    attained at one of the merged sample points.
    """
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise EmptySampleError("ks_statistic needs two non-empty samples")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def tv_distance(freq_a, freq_b) -> float:
    """Total-variation distance of two class-frequency vectors."""
    fa = np.asarray(freq_a, dtype=np.float64).ravel()
    fb = np.asarray(freq_b, dtype=np.float64).ravel()
    if fa.shape != fb.shape:
        raise LengthMismatchError(f"frequency vectors {fa.shape} vs {fb.shape}")
    if fa.sum() <= 0 or fb.sum() <= 0:
        raise EmptySampleError("frequency vectors must have positive mass")
    return float(0.5 * np.abs(fa / fa.sum() - fb / fb.sum()).sum())


def class_frequencies(levels, k: int) -> np.ndarray:
    x = np.asarray(levels).astype(np.int64)
    return np.bincount(x - 1, minlength=k)[:k].astype(np.float64)


@dataclass
class MarginalRow:
    name: str
    metric: str  # "ks" for continuous, "tv" for discrete
    value: float
    mean_diff: float
    var_ratio: float


@dataclass
class MarginalReport:
    rows: list[MarginalRow]
    n_a: int
    n_b: int

    def worst(self) -> float:
        return max(r.value for r in self.rows)


def marginal_report(names, a: np.ndarray, b: np.ndarray,
                    discrete: list[bool] | None = None) -> MarginalReport:
    """Per-column comparison of two sample matrices over the same nodes."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[1] != len(names) or b.shape[1] != len(names):
        raise LengthMismatchError("matrices do not match the name list")
    discrete = discrete or [False] * len(names)
    rows = []
    for j, name in enumerate(names):
        xa, xb = a[:, j], b[:, j]
        if discrete[j]:
            k = int(max(xa.max(), xb.max()))
            value = tv_distance(class_frequencies(xa, k), class_frequencies(xb, k))
            metric = "tv"
        else:
            value = ks_statistic(xa, xb)
            metric = "ks"
        var_b = float(np.var(xb, ddof=1)) if len(xb) > 1 else float("nan")
        var_a = float(np.var(xa, ddof=1)) if len(xa) > 1 else float("nan")
        rows.append(
            MarginalRow(
                name=name,
                metric=metric,
                value=value,
                mean_diff=float(xa.mean() - xb.mean()),
                var_ratio=var_a / var_b if var_b else float("nan"),
            )
        )
    return MarginalReport(rows=rows, n_a=a.shape[0], n_b=b.shape[0])


# -- plot-data exports: tidy CSV, one observation per row ---------------------


def _write_rows(path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                             for v in row])


def freedman_diaconis_bins(x: np.ndarray) -> int:
    x = np.asarray(x, dtype=np.float64)
    q75, q25 = np.percentile(x, [75, 25])
    width = 2.0 * (q75 - q25) / max(len(x), 1) ** (1.0 / 3.0)
    if width <= 0:
        return 10
    return max(int(np.ceil((x.max() - x.min()) / width)), 1)


def export_marginal_hist(path, node: str, samples_by_source: dict[str, np.ndarray],
                         bins: int = 0) -> None:
    """Shared-edge histogram counts per source; bins <= 0 picks Freedman-Diaconis."""
    pooled = np.concatenate([np.asarray(v, dtype=np.float64) for v in samples_by_source.values()])
    if bins <= 0:
        bins = freedman_diaconis_bins(pooled)
    edges = np.histogram_bin_edges(pooled, bins=bins)
    rows = []
    for source, x in samples_by_source.items():
        counts, _ = np.histogram(x, bins=edges)
        widths = np.diff(edges)
        dens = counts / (counts.sum() * widths) if counts.sum() else counts * 0.0
        for i, c in enumerate(counts):
            rows.append([source, node, edges[i], edges[i + 1], int(c), dens[i]])
    _write_rows(path, ["source", "node", "bin_left", "bin_right", "count", "density"], rows)


def export_pairwise_scatter(path, names, matrix_by_source: dict[str, np.ndarray],
                            max_points: int = 2000) -> None:
    """Wide rows (source + one column per node) for pair plots."""
    rows = []
    for source, matrix in matrix_by_source.items():
        m = np.asarray(matrix, dtype=np.float64)[:max_points]
        for r in m:
            rows.append([source] + list(r))
    _write_rows(path, ["source"] + list(names), rows)


def export_shift_curve(path, grid, fitted, reference) -> None:
    grid = np.asarray(grid, dtype=np.float64)
    fitted = np.asarray(fitted, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if not grid.shape == fitted.shape == reference.shape:
        raise LengthMismatchError("grid, fitted and reference must align")
    fc = fitted - fitted.mean()
    rc = reference - reference.mean()
    rows = [
        [grid[i], fitted[i], reference[i], fc[i], rc[i]]
        for i in range(len(grid))
    ]
    _write_rows(
        path,
        ["x", "fitted", "reference", "fitted_centered", "reference_centered"],
        rows,
    )


def export_cf_curve(path, alphas, model_values, oracle_values) -> None:
    alphas = np.asarray(alphas, dtype=np.float64)
    mv = np.asarray(model_values, dtype=np.float64)
    ov = np.asarray(oracle_values, dtype=np.float64)
    if not alphas.shape == mv.shape == ov.shape:
        raise LengthMismatchError("alpha grid and value arrays must align")
    rows = [[alphas[i], mv[i], ov[i]] for i in range(len(alphas))]
    _write_rows(path, ["alpha", "model_value", "oracle_value"], rows)


def export_coef_history(path, coefficients: dict[str, list[float]],
                        true_values: dict[str, float]) -> None:
    """Long format: one row per epoch per tracked edge."""
    rows = []
    for edge, series in coefficients.items():
        truth = true_values.get(edge, float("nan"))
        for epoch, beta in enumerate(series, start=1):
            rows.append([epoch, edge, beta, truth])
    _write_rows(path, ["epoch", "edge", "beta_hat", "beta_true"], rows)

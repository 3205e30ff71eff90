"""Report rendering: delimited outputs, aligned text tables, and figures.

Every CLI report path writes machine-readable CSV next to a human-readable
text table, and renders matplotlib figures to SVG files alongside them.
Figure output is deterministic (fixed hash salt, no embedded dates) so a
rerun of the same command reproduces the output directory byte for byte.
"""

from __future__ import annotations

import csv
from typing import Mapping, Sequence

import numpy as np

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "wavevol"
import matplotlib.pyplot as plt

from scipy import stats

from .estimators import VarianceEstimate
from .simulate import DAYS_PER_YEAR
from .study import BiasTable, ForecastEvalReport

__all__ = [
    "ANNUALIZATION_DAYS",
    "fmt",
    "write_csv",
    "estimate_rows",
    "write_estimates_csv",
    "read_estimates_csv",
    "bias_table_text",
    "bias_table_rows",
    "mz_report_text",
    "mz_report_rows",
    "save_figure",
    "fig_estimates",
    "fig_bias_table",
    "fig_decomposition",
    "fig_forecasts",
]

ANNUALIZATION_DAYS = DAYS_PER_YEAR


def fmt(value: float) -> str:
    """Shortest round-tripping decimal form (stable across runs)."""
    return format(float(value), ".17g")


def write_csv(path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, float) else v for v in row])


def estimate_rows(
    estimates: Sequence[tuple[str, VarianceEstimate]], levels: int
) -> tuple[list[str], list[list]]:
    """Rows (day, estimator, value, jump variation, scales..., G, flag)."""
    header = ["day", "estimator", "value", "jump_variation"]
    header += [f"scale_{j}" for j in range(1, levels + 1)] + ["smooth"]
    header += ["grids", "small_sample_adjusted"]
    rows = []
    for day, est in estimates:
        scales = [""] * (levels + 1)
        if est.per_scale is not None and est.per_scale.size == levels + 1:
            scales = [fmt(v) for v in est.per_scale]
        rows.append(
            [
                day,
                est.estimator,
                fmt(est.value),
                "" if est.jump_variation is None else fmt(est.jump_variation),
                *scales,
                "" if est.grids is None else est.grids,
                int(est.small_sample_adjusted),
            ]
        )
    return header, rows


def write_estimates_csv(path, estimates, levels: int) -> None:
    header, rows = estimate_rows(estimates, levels)
    write_csv(path, header, rows)


def read_estimates_csv(path) -> list[dict]:
    """Read back an estimates CSV into per-row dicts with parsed floats."""
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        rows = []
        for raw in reader:
            row = dict(raw)
            for key, value in raw.items():
                if key in ("day", "estimator"):
                    continue
                row[key] = float(value) if value not in ("", None) else None
            rows.append(row)
    return rows


def bias_table_rows(table: BiasTable) -> tuple[list[str], list[list]]:
    header = ["noise_sd", "jump_intensity"]
    for name in table.estimators:
        header += [f"bias_{name}", f"var_{name}"]
    rows = []
    for noise in table.noise_levels:
        for lam in table.jump_counts:
            key = (noise, lam)
            row: list = [fmt(noise), fmt(float(lam))]
            for name in table.estimators:
                row += [fmt(table.bias[key][name]), fmt(table.variance[key][name])]
            rows.append(row)
    return header, rows


def bias_table_text(table: BiasTable) -> str:
    """Aligned text table, one block per jump level with noise rows."""
    width = 18
    header = "noise sd".ljust(10) + "".join(
        name.rjust(width) for name in table.estimators
    )
    lines = [
        f"Bias (variance in parenthesis), {table.unit}",
        f"model={table.model}  paths per cell={table.paths}",
    ]
    for lam in table.jump_counts:
        label = "No jumps" if lam == 0 else f"{lam:g} jump(s) per day"
        lines += ["", f"-- {label} --", header]
        for noise in table.noise_levels:
            key = (noise, lam)
            cells = "".join(
                f"{table.bias[key][n]:9.2f} ({table.variance[key][n]:.2f})".rjust(width)
                for n in table.estimators
            )
            lines.append(f"{noise:<10g}{cells}")
    return "\n".join(lines) + "\n"


def _stars(estimate: float, se: float, null: float, df: int) -> str:
    if se <= 0:
        return ""
    tcrit = stats.t.ppf(0.975, df)
    return "*" if abs(estimate - null) / se > tcrit else ""


def mz_report_rows(report: ForecastEvalReport) -> tuple[list[str], list[list]]:
    header = ["block", "estimator", "coefficient", "value", "std_error", "r2"]
    rows = []
    for name, fit in report.individual.items():
        rows.append(["individual", name, "alpha", fmt(fit.alpha), fmt(fit.se_alpha), fmt(fit.r2)])
        rows.append(["individual", name, "beta", fmt(fit.beta), fmt(fit.se_beta), fmt(fit.r2)])
    for name, coef, se in zip(
        report.joint.names, report.joint.coefficients, report.joint.standard_errors
    ):
        rows.append(["joint", name, "coef", fmt(coef), fmt(se), fmt(report.joint.r2)])
    for name, (a, b) in report.ar1_coefficients.items():
        rows.append(["ar1", name, "intercept", fmt(a), "", ""])
        rows.append(["ar1", name, "slope", fmt(b), "", ""])
    return header, rows


def mz_report_text(report: ForecastEvalReport) -> str:
    """Mincer-Zarnowitz summary: individual block then the joint regression.

    Stars mark rejections of alpha = 0 / beta = 1 / joint coef = 0 at 95%
    (classical OLS standard errors).
    """
    lines = [
        f"Mincer-Zarnowitz forecast evaluation ({report.paths} out-of-sample paths)",
    ]
    if report.noise_sd is not None:
        lines.append(
            f"noise_sd={report.noise_sd:g}  jump_intensity={report.jump_intensity:g}"
        )
    lines += ["", "Individual regressions (true IV = alpha + beta * forecast)"]
    lines.append(
        f"{'estimator':<12}{'alpha':>12}{'(se)':>11}{'beta':>10}{'(se)':>11}{'R2':>8}"
    )
    for name, fit in report.individual.items():
        df = fit.n_obs - 2
        lines.append(
            f"{name:<12}"
            f"{fit.alpha:>11.2e}{_stars(fit.alpha, fit.se_alpha, 0.0, df):<1}"
            f"({fit.se_alpha:.1e})"
            f"{fit.beta:>9.3f}{_stars(fit.beta, fit.se_beta, 1.0, df):<1}"
            f"({fit.se_beta:.3f})"
            f"{fit.r2:>8.3f}"
        )
    lines += ["", "Joint regression"]
    df = report.joint.n_obs - len(report.joint.names)
    for name, coef, se in zip(
        report.joint.names, report.joint.coefficients, report.joint.standard_errors
    ):
        null = 0.0
        lines.append(
            f"{name:<12}{coef:>11.3e}{_stars(coef, se, null, df):<1} ({se:.2e})"
        )
    lines.append(f"{'R2':<12}{report.joint.r2:>12.3f}")
    if report.ar1_coefficients:
        lines += ["", "Mean AR(1) coefficients (intercept, slope)"]
        for name, (a, b) in report.ar1_coefficients.items():
            lines.append(f"{name:<12}{a:>12.3e}{b:>10.4f}")
    return "\n".join(lines) + "\n"


def save_figure(fig, path) -> None:
    """Write a figure as SVG with run-independent bytes."""
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def fig_estimates(estimates_by_name: Mapping[str, Sequence[float]], days: Sequence[str]):
    """Annualised volatility per estimator across days."""
    fig, ax = plt.subplots(figsize=(9, 4.5))
    x = np.arange(len(days))
    for name, values in estimates_by_name.items():
        vol = np.sqrt(np.maximum(np.asarray(values, dtype=float), 0.0) * ANNUALIZATION_DAYS)
        ax.plot(x, vol, marker="o", markersize=3, linewidth=1.2, label=name)
    ax.set_xticks(x)
    ax.set_xticklabels(days, rotation=45, ha="right", fontsize=7)
    ax.set_ylabel("annualized volatility")
    ax.set_title("Integrated volatility estimates")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def fig_bias_table(table: BiasTable):
    """One panel per jump level: bias against noise level per estimator."""
    n_panels = len(table.jump_counts)
    fig, axes = plt.subplots(
        1, n_panels, figsize=(3.2 * n_panels, 3.6), sharey=True, squeeze=False
    )
    for ax, lam in zip(axes[0], table.jump_counts):
        for name in table.estimators:
            ys = [table.bias[(noise, lam)][name] for noise in table.noise_levels]
            ax.plot(table.noise_levels, ys, marker="o", markersize=3, label=name)
        ax.axhline(0.0, color="black", linewidth=0.6)
        ax.set_title(f"jump intensity {lam:g}")
        ax.set_xlabel("noise sd")
    axes[0][0].set_ylabel(f"bias ({table.unit})")
    axes[0][-1].legend(fontsize=7)
    fig.tight_layout()
    return fig


def fig_decomposition(
    days: Sequence[str],
    components: Mapping[str, Sequence[float]],
    jump_variation: Sequence[float] | None = None,
):
    """Stacked annualised-volatility shares per horizon, plus jumps if given."""
    n_rows = 2 if jump_variation is not None else 1
    fig, axes = plt.subplots(
        n_rows, 1, figsize=(9, 3.2 * n_rows), sharex=True, squeeze=False
    )
    ax = axes[0][0]
    x = np.arange(len(days))
    labels = list(components)
    matrix = np.array([components[k] for k in labels], dtype=float)
    total = matrix.sum(axis=0)
    vol_total = np.sqrt(np.maximum(total, 0.0) * ANNUALIZATION_DAYS)
    shares = np.divide(matrix, total, out=np.zeros_like(matrix), where=total > 0)
    ax.stackplot(x, shares * vol_total, labels=labels)
    ax.plot(x, vol_total, color="black", linewidth=1.0, label="total")
    ax.set_ylabel("annualized volatility")
    ax.set_title("Volatility by investment horizon")
    ax.legend(fontsize=7, ncol=3)
    if jump_variation is not None:
        ax2 = axes[-1][0]
        ax2.bar(x, np.asarray(jump_variation, dtype=float), color="dimgray")
        ax2.set_ylabel("jump variation")
    axes[-1][0].set_xticks(x)
    axes[-1][0].set_xticklabels(days, rotation=45, ha="right", fontsize=7)
    fig.tight_layout()
    return fig


def fig_forecasts(report: ForecastEvalReport):
    """Bar chart of individual Mincer-Zarnowitz R^2 per estimator."""
    fig, ax = plt.subplots(figsize=(6, 3.6))
    names = list(report.individual)
    r2 = [report.individual[n].r2 for n in names]
    ax.bar(names, r2, color="steelblue")
    ax.set_ylim(0, 1)
    ax.set_ylabel("Mincer-Zarnowitz R$^2$")
    ax.set_title("One-day-ahead forecast accuracy")
    fig.tight_layout()
    return fig

from typing import Dict, List, Sequence

from app.utils.schemas import FitSummary, PointEstimateRecord, PredictionMetrics

RULE = "════════════════════════════════════════"


def _table(names: Sequence[str], columns: Dict[str, Sequence[float]]) -> str:
    width = max([len(n) for n in names] + [9])
    header = f"{'':<{width}}" + "".join(f"{title:>12}" for title in columns)
    rows = [header]
    for i, name in enumerate(names):
        rows.append(f"{name:<{width}}" + "".join(f"{values[i]:>12.4f}" for values in columns.values()))
    return "\n".join(rows)


def get_fit_summary_text(summary: FitSummary) -> str:
    text = (
        f"📈 Posterior at kappa={summary.kappa:g} ({summary.kept} kept samples)\n"
        f"{RULE}\n"
        + _table(summary.names, {
            "mean": summary.posterior_mean,
            "sd": summary.posterior_sd,
            "mean (raw)": summary.posterior_mean_raw,
            "ESS": summary.ess,
        })
        + f"\n\nnu: mean {summary.nu_mean:.4g}, sd {summary.nu_sd:.4g}, ESS {summary.ess_nu:.1f}\n"
        f"lambda acceptance: {summary.acceptance_rate:.3f}\n"
        f"⏱️ {summary.wall_time:.2f}s"
    )
    if summary.slice_rejections:
        stats = ", ".join(f"{k} {v:g}" for k, v in summary.slice_rejections.items())
        text += f"\nslice rejections: {stats}"
    if any(summary.degenerate):
        text += "\n⚠️ Constant samples for: " + ", ".join(
            n for n, flag in zip(summary.names, summary.degenerate) if flag
        )
    return text


def get_estimate_text(record: PointEstimateRecord) -> str:
    nu = "n/a" if record.nu is None else f"{record.nu:.4g}" + (" (fixed)" if record.nu_fixed else "")
    text = (
        f"🎯 {record.kind.upper()} estimate, schedule {record.schedule}\n"
        f"{RULE}\n"
        + _table(record.names, {"scaled": record.beta, "raw": record.beta_raw})
        + f"\n\nnu: {nu}\n"
    )
    for stage in record.stages:
        text += (
            f" kappa {stage.kappa:>6g}: {stage.iterations} sweeps, acceptance {stage.acceptance_rate:.3f}, "
            f"min ESS {stage.ess_min:.1f}, {stage.wall_time:.2f}s\n"
        )
    return text.rstrip()


def get_prediction_text(metrics: PredictionMetrics) -> str:
    text = f"🔮 {metrics.rows} rows, misclassification {metrics.misclassification:.4f}"
    if metrics.expected_log_likelihood is not None:
        text += f", ELL {metrics.expected_log_likelihood:.4f}"
    return text


def get_bench_text(cells: List[Dict], speedup: Dict[str, float]) -> str:
    text = f"🧪 Binomial benchmark\n{RULE}\n"
    text += f"{'rep':<6}{'encoding':<10}{'RMSE':>10}{'(sd)':>10}{'time':>10}{'(sd)':>10}\n"
    for cell in cells:
        text += (
            f"{cell['rep']:<6}{cell['encoding']:<10}{cell['rmse_mean']:>10.4f}{cell['rmse_sd']:>10.4f}"
            f"{cell['time_mean']:>10.2f}{cell['time_sd']:>10.2f}\n"
        )
    text += "\n" + "\n".join(f"flat/multi time ratio ({rep}): {ratio:.2f}x" for rep, ratio in speedup.items())
    return text


def get_key_value_text(title: str, values: Dict[str, object]) -> str:
    lines = [f"📋 {title}", RULE]
    for key, value in values.items():
        shown = f"{value:.4g}" if isinstance(value, float) else str(value)
        lines.append(f"{key}: {shown}")
    return "\n".join(lines)

"""Report rendering for the command-line runs.

Certificate-style results (fatness, zero-plane certificates) render to JSON
with every numeric term spelled out; sampling results (scans, sweeps) render
to CSV with provenance comment lines. All formatting is deterministic, so a
rerun under the same seed produces byte-identical output. Figures are drawn
with the Agg backend and written next to the delimited report.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ValidationError


def _f(value) -> str:
    """Shortest round-trip decimal form; deterministic across runs."""
    return repr(float(value))


def _coords(element) -> list:
    return [float(c) for c in element.coords]


def _matrix(g) -> list:
    return [[float(v) for v in row] for row in g.matrix]


# -- JSON reports -------------------------------------------------------------


def fatness_report(config: dict, seed: int, result, verdict: str) -> str:
    doc = {
        "command": "fatness",
        "config": config,
        "seed": seed,
        "verdict": verdict,
        "deficit": float(result.deficit),
        "witness": {
            "fiber_direction": _coords(result.x),
            "base_direction": _coords(result.y),
        },
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _certificate_dict(cert) -> dict:
    return {
        "eps": float(cert.eps),
        "value": float(cert.value),
        "scale": float(cert.scale),
        "terms": {
            "group": float(cert.sample.group_term),
            "fiber": float(cert.sample.fiber_term),
            "vertical": float(cert.sample.vertical_term),
        },
        "normalizer": float(cert.sample.normalizer),
        "residuals": {
            "stationarity": float(cert.grad_residual),
            "pair_commutation": float(cert.commute_residual),
            "second_order": float(cert.second_order_residual),
        },
        "iterations": int(cert.iterations),
        "start_index": int(cert.start_index),
        "plane": {
            "x": _coords(cert.x),
            "y": _coords(cert.y),
            "base_point": _matrix(cert.g0),
        },
    }


def certify_report(config: dict, seed: int, certificates) -> str:
    doc = {
        "command": "certify",
        "config": config,
        "seed": seed,
        "certificates": [_certificate_dict(c) for c in certificates],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# -- CSV reports --------------------------------------------------------------


def _csv_header(command: str, config: dict, seed: int) -> list:
    return [
        f"# command: {command}",
        f"# seed: {seed}",
        "# config: " + json.dumps(config, sort_keys=True),
    ]


def histogram_rows(values: np.ndarray, bins: int):
    counts, edges = np.histogram(values, bins=bins)
    return [
        (float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(len(counts))
    ]


def scan_report(config: dict, seed: int, result, bins: int) -> str:
    if bins < 1:
        raise ValidationError("histogram needs at least one bin")
    lines = _csv_header("scan", config, seed)
    lines.append(f"# n_values: {len(result.values)}")
    lines.append(f"# floor: {_f(result.floor)}")
    lines.append("# worst_x: " + json.dumps(_coords(result.worst_x)))
    lines.append("# worst_y: " + json.dumps(_coords(result.worst_y)))
    lines.append("# worst_base_point: " + json.dumps(_matrix(result.worst_g0)))
    lines.append("bin_low,bin_high,count")
    for lo, hi, count in histogram_rows(result.values, bins):
        lines.append(f"{_f(lo)},{_f(hi)},{count}")
    return "\n".join(lines) + "\n"


def sweep_report(config: dict, seed: int, rows) -> str:
    lines = _csv_header("sweep", config, seed)
    lines.append("t,floor,positive_fraction")
    for row in rows:
        lines.append(f"{_f(row.t)},{_f(row.floor)},{_f(row.positive_fraction)}")
    return "\n".join(lines) + "\n"


# -- file output and figures --------------------------------------------------


def write_report(text: str, out_path) -> Path:
    p = Path(out_path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)
    return p


def _figure_path(out_path) -> Path:
    p = Path(out_path)
    return p.with_suffix(".png")


def scan_figure(result, bins: int, out_path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.hist(result.values, bins=bins, color="#4878a8", edgecolor="white")
    ax.axvline(result.floor, color="#b0413e", linestyle="--", label=f"floor {result.floor:.3e}")
    ax.set_xlabel("sectional numerator")
    ax.set_ylabel("count")
    ax.set_title("sampled sectional values")
    ax.legend()
    fig.tight_layout()
    target = _figure_path(out_path)
    fig.savefig(target, dpi=120)
    plt.close(fig)
    return target


def sweep_figure(rows, out_path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ts = [row.t for row in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(ts, [row.floor for row in rows], "o-", color="#4878a8")
    ax1.axhline(0.0, color="#999999", linewidth=0.8)
    ax1.set_xlabel("t")
    ax1.set_ylabel("floor")
    ax1.set_title("sampled floor along the family")
    ax2.plot(ts, [row.positive_fraction for row in rows], "o-", color="#5a9367")
    ax2.set_xlabel("t")
    ax2.set_ylabel("positive fraction")
    ax2.set_ylim(-0.02, 1.02)
    ax2.set_title("base points with positive minimum")
    fig.tight_layout()
    target = _figure_path(out_path)
    fig.savefig(target, dpi=120)
    plt.close(fig)
    return target


def certify_figure(certificates, out_path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    eps = [c.eps for c in certificates]
    values = [c.value for c in certificates]
    resid = [max(c.grad_residual, 1e-17) for c in certificates]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(eps, values, "o-", color="#4878a8")
    ax1.axhline(0.0, color="#999999", linewidth=0.8)
    ax1.set_xlabel("eps")
    ax1.set_ylabel("plane numerator")
    ax1.set_title("certificate value along the schedule")
    ax2.semilogy(eps, resid, "o-", color="#b0413e")
    ax2.set_xlabel("eps")
    ax2.set_ylabel("stationarity residual")
    ax2.set_title("maximizer convergence")
    fig.tight_layout()
    target = _figure_path(out_path)
    fig.savefig(target, dpi=120)
    plt.close(fig)
    return target

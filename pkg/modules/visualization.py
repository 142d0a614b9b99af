"""
visualization.py — Reusable Plotly Chart Builder
Chart factory functions with consistent styling for spectra, noise sweeps and
restart residuals, plus standalone HTML export.
"""

import logging
import re
from pathlib import Path

import numpy as np
import pandas as pd
import plotly.express as px
import plotly.graph_objects as go

import config

logger = logging.getLogger(__name__)


def line_chart(df, x, y, title, y_label="", color=None, log_y=False):
    """Create a Plotly line chart.

    Args:
        df: DataFrame with the data.
        x: Column name for x-axis.
        y: Column name (or list) for y-axis.
        title: Chart title.
        y_label: Optional y-axis label.
        color: Optional column for color grouping.
        log_y: Logarithmic y-axis.

    Returns:
        plotly.graph_objects.Figure
    """
    if df.empty:
        return _empty_chart(title)

    fig = px.line(df, x=x, y=y, color=color, title=title, markers=True, log_y=log_y,
                  color_discrete_sequence=config.CHART_COLORS)
    fig.update_layout(**_base_layout(y_label))
    return fig


def bar_chart(df, x, y, title, y_label="", color=None, log_y=False):
    """Create a Plotly bar chart.

    Returns:
        plotly.graph_objects.Figure
    """
    if df.empty:
        return _empty_chart(title)

    fig = px.bar(df, x=x, y=y, color=color, title=title, log_y=log_y,
                 color_discrete_sequence=config.CHART_COLORS)
    fig.update_layout(**_base_layout(y_label))
    return fig


def spectrum_chart(spectrum, title="Coefficient Matrix Spectrum"):
    """Relative singular values, largest first, on a log axis.

    The drop at the last index is the corank-1 certificate.
    """
    values = np.asarray(spectrum, dtype=float)
    df = pd.DataFrame({
        "index": np.arange(1, values.size + 1),
        # log axes cannot show exact zeros
        "sigma": np.maximum(values, np.finfo(float).tiny),
    })
    return line_chart(df, x="index", y="sigma", title=title, y_label="σ_k / σ_1", log_y=True)


def noise_chart(sweep, title="Estimation Error vs Noise"):
    """Error and its allowed bound against sigma, both log-scaled.

    Args:
        sweep: DataFrame from correspond.noise_sweep.
    """
    if sweep.empty:
        return _empty_chart(title)

    df = sweep[sweep["sigma"] > 0]
    if df.empty:
        return _empty_chart(title)

    fig = go.Figure()
    for i, col in enumerate(["error", "bound"]):
        fig.add_trace(go.Scatter(
            x=df["sigma"], y=np.maximum(df[col], np.finfo(float).tiny), mode="lines+markers",
            name=col.title(), line=dict(color=config.CHART_COLORS[i], width=2),
        ))
    fig.update_layout(title=title, **_base_layout("projective distance"))
    fig.update_xaxes(type="log", title="sigma")
    fig.update_yaxes(type="log")
    return fig


def restart_chart(restarts, title="Residual per Restart"):
    """Final LM residual of every restart, accepted ones colored apart.

    Args:
        restarts: DataFrame with columns restart, residual, accepted.
    """
    if restarts.empty:
        return _empty_chart(title)

    df = restarts.assign(
        residual=np.maximum(restarts["residual"], np.finfo(float).tiny),
        accepted=restarts["accepted"].map({True: "accepted", False: "rejected"}),
    )
    return bar_chart(df, x="restart", y="residual", color="accepted", title=title,
                     y_label="residual", log_y=True)


def write_html(fig, directory, name=None):
    """Save a figure as standalone HTML; the file name is derived from the title."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    title = name or fig.layout.title.text or "chart"
    path = directory / (re.sub(r"[^a-z0-9]+", "_", title.lower()).strip("_") + ".html")
    fig.write_html(str(path), include_plotlyjs="cdn")
    logger.info("wrote chart %s", path)
    return path


def format_number(value, decimals=3):
    """Scientific notation for residuals and margins; 'N/A' for None."""
    if value is None:
        return "N/A"
    try:
        return f"{float(value):.{decimals}e}"
    except (ValueError, TypeError):
        return "N/A"


def _base_layout(y_label=""):
    """Return common layout settings for charts."""
    layout = {
        "template": config.CHART_TEMPLATE,
        "height": config.CHART_HEIGHT,
        "margin": dict(l=40, r=20, t=50, b=40),
        "font": dict(size=12),
        "autosize": True,
    }
    if y_label:
        layout["yaxis_title"] = y_label
    return layout


def _empty_chart(title):
    """Return an empty chart with a 'No data' message."""
    fig = go.Figure()
    fig.update_layout(
        title=title,
        template=config.CHART_TEMPLATE,
        height=config.CHART_HEIGHT,
        annotations=[dict(
            text="Not enough data to display",
            xref="paper", yref="paper",
            x=0.5, y=0.5, showarrow=False,
            font=dict(size=16, color="gray"),
        )],
    )
    return fig

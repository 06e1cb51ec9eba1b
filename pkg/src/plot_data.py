"""CSV panels behind the figures, plus a plain-text stub describing them."""
import logging
import os

import numpy as np
import pandas as pd

from src.utils.errors import OutputError, ShapeError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def write_csv(frame, path):
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as exc:
        raise OutputError(path, exc) from exc
    logger.debug("wrote %s (%d rows)", path, len(frame))
    return path


def trajectory_frame(traj, labels):
    """t, m_<label>... for a coherence trajectory."""
    if traj.states.shape[1] != len(labels):
        raise ShapeError(f"{len(labels)} labels for {traj.states.shape[1]} coordinates")
    frame = pd.DataFrame(traj.states, columns=[f"m_{label}" for label in labels])
    frame.insert(0, "t", traj.times)
    return frame


def controls_frame(times, controls, labels):
    """t, u_<label>... for sampled controls of shape (len(times), len(labels))."""
    controls = np.asarray(controls, dtype=float).reshape(len(times), -1)
    if controls.shape[1] != len(labels):
        raise ShapeError(f"{len(labels)} labels for {controls.shape[1]} control channels")
    frame = pd.DataFrame(controls, columns=[f"u_{label}" for label in labels])
    frame.insert(0, "t", np.asarray(times, dtype=float))
    return frame


def emit_plot_data(trajectories, metrics, figure_id, directory, prefix, coordinate=None, times=None):
    """Write one panel `<prefix>_<figure_id>.csv`.

    Columns are t, then column `coordinate` of every trajectory (named by
    its key), then every metric series. All inputs share one grid.
    """
    trajectories = dict(trajectories or {})
    metrics = dict(metrics or {})
    if times is None and trajectories:
        times = next(iter(trajectories.values())).times
    times = np.asarray([] if times is None else times, dtype=float)
    columns = {"t": times}
    for name, traj in trajectories.items():
        if len(traj.times) != len(times) or not np.allclose(traj.times, times, rtol=0.0, atol=1e-12):
            raise ShapeError(f"trajectory {name!r} is not on the panel grid")
        columns[name] = traj.states[:, coordinate]
    for name, series in metrics.items():
        series = np.asarray(series, dtype=float)
        if series.shape != times.shape:
            raise ShapeError(f"metric {name!r} has {series.shape[0]} points, panel grid has {times.size}")
        columns[name] = series
    path = os.path.join(directory, f"{prefix}_{figure_id}.csv")
    write_csv(pd.DataFrame(columns), path)
    return path, list(columns)


def write_plot_stub(path, scenario, panels):
    """panels: (file name, column names) pairs; the first column is the abscissa."""
    lines = [f"# plot data for scenario {scenario}", "# file: x column -> y columns"]
    for file_name, columns in panels:
        lines.append(f"{file_name}: {columns[0]} -> {', '.join(columns[1:]) or '(none)'}")
    try:
        with open(path, 'w') as f:
            f.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OutputError(path, exc) from exc
    return path

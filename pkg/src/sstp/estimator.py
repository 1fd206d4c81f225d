"""Reduction of weighted trajectory ensembles to observable curves with
statistical error bars and weight-variance stability diagnostics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adiabatic import sigma_z_adiabatic
from .engine import EnsembleResult, TrajectoryResult

__all__ = ["ObservableSeries", "estimate", "estimate_trajectories"]


@dataclass(frozen=True)
class ObservableSeries:
    """Observable mean, standard error and weight diagnostics on the time grid."""

    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    weight_var: np.ndarray
    n_eff: np.ndarray
    n_traj: int
    n_excluded: int = 0


def _jackknife_stderr(est: np.ndarray) -> np.ndarray:
    """Leave-one-out jackknife standard error over trajectories (axis 0)."""
    n = est.shape[0]
    total = est.sum(axis=0)
    loo = (total[None, :] - est) / (n - 1)
    center = loo.mean(axis=0)
    var = (n - 1) / n * np.sum((loo - center) ** 2, axis=0)
    return np.sqrt(var)


def estimate(result: EnsembleResult, truncate_flagged: bool | None = None) -> ObservableSeries:
    """Ensemble mean of the weighted observable with jackknife error bars.

    With truncation enabled, flagged (weight-overflow) trajectories are
    excluded from the mean and error bars and reported via `n_excluded`;
    the weight-moment diagnostics always cover every weight series.
    """
    if truncate_flagged is None:
        truncate_flagged = result.config.truncate_flagged
    est = result.estimates
    n_excluded = 0
    if truncate_flagged:
        keep = ~result.flagged
        n_excluded = int(np.count_nonzero(result.flagged))
        est = est[keep]
    n = est.shape[0]
    if n < 2:
        raise ValueError("at least 2 trajectories are required for error bars")
    mean = est.mean(axis=0)
    stderr = _jackknife_stderr(est)
    m = result.n_weight_series
    weight_var = np.maximum(result.sum_absw2 / m - (result.sum_absw / m) ** 2, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        n_eff = np.where(
            result.sum_absw2 > 0, result.sum_absw**2 / result.sum_absw2, 0.0
        )
    return ObservableSeries(
        times=result.times,
        mean=mean,
        stderr=stderr,
        weight_var=weight_var,
        n_eff=n_eff,
        n_traj=n,
        n_excluded=n_excluded,
    )


def estimate_trajectories(
    trajectories: list[TrajectoryResult],
    observable=sigma_z_adiabatic,
    model=None,
    bath=None,
) -> ObservableSeries:
    """Reduce fully recorded trajectories, contracting a configuration-dependent
    observable against the weighted surface-pair element.

    With the default observable and no (model, bath) given, the estimates
    precomputed by the engine are used directly.
    """
    if not trajectories:
        raise ValueError("no trajectories given")
    times = trajectories[0].times
    n_rec = times.shape[0]
    rows = []
    sum_absw = np.zeros(n_rec)
    sum_absw2 = np.zeros(n_rec)
    n_series = 0
    for traj in trajectories:
        row = np.zeros(n_rec)
        for sub in traj.subtrajectories:
            if model is None or bath is None:
                contrib = sub.estimates
            else:
                contrib = np.empty(n_rec)
                for r in range(n_rec):
                    mat = observable(sub.R[r], model, bath)
                    elem = mat[int(sub.kets[r]) - 1, int(sub.bras[r]) - 1]
                    contrib[r] = (sub.weights[r] * elem).real
            row += contrib
            sum_absw += sub.abs_weights
            sum_absw2 += sub.abs_weights**2
            n_series += 1
        rows.append(row)
    est = np.array(rows)
    n = est.shape[0]
    if n < 2:
        raise ValueError("at least 2 trajectories are required for error bars")
    weight_var = np.maximum(
        sum_absw2 / n_series - (sum_absw / n_series) ** 2, 0.0
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        n_eff = np.where(sum_absw2 > 0, sum_absw**2 / sum_absw2, 0.0)
    return ObservableSeries(
        times=times,
        mean=est.mean(axis=0),
        stderr=_jackknife_stderr(est),
        weight_var=weight_var,
        n_eff=n_eff,
        n_traj=n,
    )

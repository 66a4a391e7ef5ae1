"""Log-log least-squares power-law fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class DecayFit:
    """Power law ``value ~ constant * t**(-exponent)`` fitted on ``window``.

    ``residual`` is the RMS misfit in natural-log units; ``excluded`` counts
    non-positive samples dropped before fitting.
    """

    exponent: float
    constant: float
    residual: float
    window: tuple[float, float]
    n_points: int
    excluded: int = 0

    def predict(self, t):
        return self.constant * np.asarray(t, dtype=float) ** (-self.exponent)


def fit_decay(t, values, window=None, min_points=4):
    """Fit ``values ~ C t^{-p}`` by least squares of ``log values`` on ``log t``.

    Parameters
    ----------
    t, values : array_like
        Sample abscissae (positive) and values.
    window : (float, float), optional
        Closed interval of ``t`` used for the fit. Defaults to all samples.
    min_points : int
        Minimum number of usable (positive, finite, in-window) points.

    Returns
    -------
    DecayFit

    Raises
    ------
    DomainError
        If fewer than ``min_points`` usable samples remain.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.shape != values.shape:
        raise DomainError("t and values must have the same shape")
    if window is None:
        window = (float(t.min()), float(t.max()))
    lo, hi = window
    in_window = (t >= lo) & (t <= hi) & (t > 0)
    usable = in_window & np.isfinite(values) & (values > 0)
    excluded = int(np.count_nonzero(in_window & ~usable))
    n = int(np.count_nonzero(usable))
    if n < min_points:
        raise DomainError(f"need at least {min_points} positive samples in window, got {n}")
    x = np.log(t[usable])
    y = np.log(values[usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return DecayFit(
        exponent=float(-slope),
        constant=float(np.exp(intercept)),
        residual=float(np.sqrt(np.mean(resid**2))),
        window=(float(lo), float(hi)),
        n_points=n,
        excluded=excluded,
    )


def geometric_grid(t0, t1, points):
    """Log-spaced grid from ``t0`` to ``t1`` inclusive."""
    if not (0 < t0 < t1) or points < 2:
        raise DomainError("geometric grid needs 0 < t0 < t1 and at least 2 points")
    return np.geomspace(t0, t1, int(points))

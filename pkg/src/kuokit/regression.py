"""Log-log least squares for empirical power-law exponents."""

from __future__ import annotations

import numpy as np

from .errors import EstimationError

#: fewest points accepted for an exponent fit
MIN_FIT_POINTS = 4

#: variance floor (log2 units squared, per point) used in the fit-quality score;
#: keeps near-constant power laws with tiny residuals from scoring as poor fits
FLAT_VARIANCE_FLOOR = 0.0625


def power_fit(abscissa: np.ndarray, values: np.ndarray):
    """Fit ``log2 values ~ slope * log2 abscissa + intercept``.

    Returns ``(slope, intercept, r2)``.  The quality score is the usual
    coefficient of determination except that the total variance is floored at
    ``FLAT_VARIANCE_FLOOR`` per point, so a flat sequence fitted by a flat
    line scores 1.0 instead of 0/0.  Inputs must be positive.
    """
    abscissa = np.asarray(abscissa, dtype=float)
    values = np.asarray(values, dtype=float)
    if abscissa.shape != values.shape or abscissa.ndim != 1:
        raise EstimationError("power_fit expects two 1-d arrays of equal length")
    if abscissa.size < MIN_FIT_POINTS:
        raise EstimationError(
            f"exponent fit needs at least {MIN_FIT_POINTS} points, got {abscissa.size}"
        )
    if np.any(abscissa <= 0) or np.any(values <= 0):
        raise EstimationError("power_fit needs strictly positive data")
    lx = np.log2(abscissa)
    ly = np.log2(values)
    design = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(design, ly, rcond=None)
    residuals = ly - (slope * lx + intercept)
    ss_res = float(residuals @ residuals)
    centred = ly - ly.mean()
    ss_tot = float(centred @ centred)
    denom = max(ss_tot, FLAT_VARIANCE_FLOOR * lx.size)
    r2 = 1.0 - ss_res / denom
    return float(slope), float(intercept), float(min(max(r2, 0.0), 1.0))

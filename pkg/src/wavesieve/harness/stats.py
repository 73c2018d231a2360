"""Summary statistics used by the experiment runner."""

from __future__ import annotations

import numpy as np
from scipy.stats import chi2

from ..errors import DataError


def ks_distance(samples, df: int) -> float:
    """One-sample Kolmogorov-Smirnov distance to the chi^2(df) law.

    The reference CDF is the regularized incomplete gamma function
    (scipy's chi2.cdf); at least 20 finite samples are required.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size < 20:
        raise DataError(f"need at least 20 samples for a KS distance, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DataError("KS distance undefined: samples contain NaN or Inf")
    n = x.size
    cdf = chi2.cdf(x, df)
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def loglog_slope(pairs) -> float:
    """Least-squares slope of log(err) on log(n) for (n, err) pairs."""
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise DataError("need at least 3 (n, err) pairs for a slope")
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise DataError("slope undefined: pairs must be finite and positive")
    x = np.log(arr[:, 0])
    y = np.log(arr[:, 1])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def chi2_quantile(level: float, df: int) -> float:
    return float(chi2.ppf(level, df))


def angular_error_deg(theta_hat: np.ndarray, theta_star: np.ndarray) -> float:
    """Angle in degrees between two unit vectors."""
    c = float(np.clip(np.dot(theta_hat, theta_star), -1.0, 1.0))
    return float(np.degrees(np.arccos(c)))

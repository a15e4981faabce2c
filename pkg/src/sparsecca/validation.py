"""Input validation shared by the estimators."""

import numpy as np
from sklearn.utils import check_array, check_consistent_length


def check_views(X, Y=None):
    """Validate one or two views as finite 2-d float arrays with matching rows."""
    X = check_array(X, dtype=np.float64, ensure_min_samples=2)
    if Y is None:
        return X, None
    Y = check_array(Y, dtype=np.float64, ensure_min_samples=2)
    check_consistent_length(X, Y)
    return X, Y


def fit_centering(X, Y):
    """Centre both views and divide by ``sqrt(n)``.

    Returns ``(X_scaled, Y_scaled, x_mean, y_mean)``; on the scaled views
    ``||X u||^2`` is the 1/n sample variance of the raw projection.
    """
    n = X.shape[0]
    xm, ym = X.mean(axis=0), Y.mean(axis=0)
    return (X - xm) / np.sqrt(n), (Y - ym) / np.sqrt(n), xm, ym

import numpy as np


def project_simplex(v: np.ndarray, z: float = 1.0) -> np.ndarray:
    """
    Euclidean projection onto the simplex {y >= 0, sum(y) = z}:
        argmin_y ||y - v||^2
    """
    v_ndarray = np.asarray(v, dtype=np.float64).ravel()
    if v_ndarray.size == 0:
        msg = "Invalid size of 'v', (expected at least one entry)"
        raise ValueError(msg)
    u = np.sort(v_ndarray)[::-1]
    cssv = np.cumsum(u) - z
    ind = np.arange(1, v_ndarray.size + 1)
    cond = u - cssv / ind > 0
    rho = np.count_nonzero(cond)
    theta = cssv[rho - 1] / rho
    return np.maximum(v_ndarray - theta, 0.0)

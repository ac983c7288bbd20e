"""Independent reference computations used to check the closed forms."""
from __future__ import annotations

import math

import numpy as np


def expm_scaling_squaring(A: np.ndarray, terms: int = 30) -> np.ndarray:
    """exp(A) by scaling to ||A|| <= 1/2, a truncated Taylor series, and repeated squaring."""
    A = np.asarray(A, dtype=float)
    norm = float(np.max(np.sum(np.abs(A), axis=1)))
    s = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    B = A / 2.0**s
    term = np.eye(A.shape[0])
    acc = term.copy()
    for k in range(1, terms):
        term = term @ B / k
        acc = acc + term
    for _ in range(s):
        acc = acc @ acc
    return acc


def lambda_quadrature(theta: np.ndarray, z: float, eta: np.ndarray, nodes: int = 64) -> np.ndarray:
    """int_0^z exp(t theta) eta dt by Gauss-Legendre quadrature of the series oracle.

    The integrand is entire, so a fixed high-order rule converges to rounding
    level for the moderate |z| ||theta|| used in checks.
    """
    theta = np.asarray(theta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    x, w = np.polynomial.legendre.leggauss(nodes)
    ts = 0.5 * z * (x + 1.0)
    vals = np.array([expm_scaling_squaring(t * theta) @ eta for t in ts])
    return 0.5 * z * (w @ vals)

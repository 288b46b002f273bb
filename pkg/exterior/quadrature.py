"""Quadrature rules on the reference simplex and on the unit ball.

The simplex rule is the Grundmann-Moeller family: signed weights, exact for
polynomials of degree 2s+1. Points are returned in reduced barycentric
coordinates (lambda_1, ..., lambda_d) of the reference d-simplex, whose volume
is 1/d!, so the weights sum to 1/d!.
"""

from fractions import Fraction
from functools import lru_cache
from math import factorial, pi

import numpy as np
from scipy.special import gamma

from exterior.polynomial import multi_indices


def gm_parameter(order):
    """Smallest s with 2s+1 >= order."""
    return max(0, -(-(order - 1) // 2))


@lru_cache(maxsize=None)
def simplex_rule(dim, order):
    """Grundmann-Moeller rule on the reference simplex of dimension dim.

    Args:
      dim:    simplex dimension d >= 0
      order:  polynomial degree to integrate exactly

    Returns:
      A tuple (points, weights) with points an (N, d) array of reduced
      barycentric coordinates and weights an (N,) array summing to 1/d!.
    """
    if dim == 0:
        return np.zeros((1, 0)), np.ones(1)

    s = gm_parameter(order)
    exact = 2 * s + 1
    points_to_weights = {}
    for i in range(s + 1):
        weight = ((-1) ** i * 2.0 ** (-2 * s) * (exact + dim - 2 * i) ** exact
                  / factorial(i) / factorial(exact + dim - i))
        denominator = exact + dim - 2 * i
        for beta in multi_indices(dim + 1, s - i):
            point = tuple(Fraction(2 * b + 1, denominator) for b in beta)
            points_to_weights[point] = points_to_weights.get(point, 0.0) + weight

    keys = sorted(points_to_weights)
    points = np.array([[float(f) for f in p[1:]] for p in keys])
    weights = np.array([points_to_weights[p] for p in keys])
    return points, weights


def gauss_legendre_unit(count):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(count)
    return 0.5 * (x + 1.0), 0.5 * w


def unit_ball_volume(dim):
    return pi ** (dim / 2.0) / gamma(dim / 2.0 + 1.0)


@lru_cache(maxsize=None)
def ball_rule(dim, degree):
    """Product rule on the unit ball, exact for polynomials up to degree.

    Radial Gauss-Legendre with the r^(d-1) Jacobian folded into the weights,
    trapezoid in the azimuth and Gauss-Legendre in cos(polar angle) for d = 3.

    Returns:
      (points (N, dim), weights (N,)) with weights summing to the ball volume.
    """
    n_radial = (degree + dim) // 2 + 1
    rad, rad_w = gauss_legendre_unit(n_radial)
    rad_w = rad_w * rad ** (dim - 1)

    if dim == 1:
        pts = np.concatenate((rad, -rad))[:, None]
        wts = np.concatenate((rad_w, rad_w))
        return pts, wts

    n_azimuth = degree + 1
    theta = 2.0 * pi * np.arange(n_azimuth) / n_azimuth
    theta_w = np.full(n_azimuth, 2.0 * pi / n_azimuth)

    if dim == 2:
        R, T = np.meshgrid(rad, theta, indexing='ij')
        W = np.outer(rad_w, theta_w)
        pts = np.stack((R * np.cos(T), R * np.sin(T)), axis=-1).reshape(-1, 2)
        return pts, W.ravel()

    if dim == 3:
        n_polar = degree // 2 + 1
        u, u_w = np.polynomial.legendre.leggauss(n_polar)
        R, U, T = np.meshgrid(rad, u, theta, indexing='ij')
        W = rad_w[:, None, None] * u_w[None, :, None] * theta_w[None, None, :]
        S = np.sqrt(1.0 - U ** 2)
        pts = np.stack((R * S * np.cos(T), R * S * np.sin(T), R * U), axis=-1).reshape(-1, 3)
        return pts, W.ravel()

    raise ValueError("ball rule not available in dimension {}".format(dim))

"""Manufactured target forms for interpolation studies.

Targets are SampledForms whose coefficients and exterior derivatives are
known in closed form. Scalar building blocks carry their gradients, which is
all d needs: d(sum f_K dx_K) = sum_j sum_K (df_K/dx_j) dx_j ^ dx_K.
"""

import logging

import numpy as np

from mesh import combinations
from exterior import SampledForm, permutation_sign
from exterior import polynomial as poly
from spaces import Family, FamilySelector, GlobalFESpace

logger = logging.getLogger(__name__)

# Sides of the unit box: name -> (axis, coordinate of the side)
SIDES = {
    'left': (0, 0.0), 'right': (0, 1.0),
    'bottom': (1, 0.0), 'top': (1, 1.0),
    'front': (2, 0.0), 'back': (2, 1.0),
}


class UnknownTarget(ValueError):
    pass


class Sine(object):
    """amplitude * prod_i sin(freqs[i] x_i + phases[i])."""

    def __init__(self, freqs, phases, amplitude=1.0):
        self.freqs = np.asarray(freqs, dtype=float)
        self.phases = np.asarray(phases, dtype=float)
        self.amplitude = amplitude

    def value(self, x):
        return self.amplitude * np.prod(np.sin(x * self.freqs + self.phases), axis=1)

    def grad(self, x):
        s = np.sin(x * self.freqs + self.phases)
        c = np.cos(x * self.freqs + self.phases)
        out = np.empty_like(x, dtype=float)
        for j in range(x.shape[1]):
            rest = np.prod(np.delete(s, j, axis=1), axis=1)
            out[:, j] = self.amplitude * self.freqs[j] * c[:, j] * rest
        return out


class Polynomial(object):
    def __init__(self, p, n):
        self.p = p
        self.n = n
        self._grad = [poly.diff(p, j) for j in range(n)]

    def value(self, x):
        return poly.evaluate(self.p, x)

    def grad(self, x):
        return np.stack([poly.evaluate(g, x) for g in self._grad], axis=1)


class Product(object):
    def __init__(self, f, g):
        self.f = f
        self.g = g

    def value(self, x):
        return self.f.value(x) * self.g.value(x)

    def grad(self, x):
        return (self.f.grad(x) * self.g.value(x)[:, None]
                + self.f.value(x)[:, None] * self.g.grad(x))


def analytic_form(n, k, scalars, name='analytic'):
    """SampledForm with coefficient scalars[a] on the a-th dx_K, with exact d."""
    basis = combinations(n, k)
    if len(scalars) != len(basis):
        raise ValueError("a {}-form on R^{} needs {} coefficients, got {}".format(
            k, n, len(basis), len(scalars)))
    target = {J: b for b, J in enumerate(combinations(n, k + 1))}

    def coeffs(x):
        x = np.atleast_2d(x)
        return np.stack([s.value(x) for s in scalars], axis=1)

    def d_coeffs(x):
        x = np.atleast_2d(x)
        out = np.zeros((len(x), len(target)))
        for a, K in enumerate(basis):
            G = scalars[a].grad(x)
            for j in range(n):
                sign, J = permutation_sign((j,) + K)
                if sign:
                    out[:, target[J]] += sign * G[:, j]
        return out

    return SampledForm(n, k, coeffs, d_coeffs if k < n else None, name=name)


def trig_scalars(n, k, frequency=np.pi):
    out = []
    for a in range(len(combinations(n, k))):
        freqs = [frequency * (1.0 + 0.5 * ((a + i) % 3)) for i in range(n)]
        phases = [0.3 * (a + 1) + 0.2 * i for i in range(n)]
        out.append(Sine(freqs, phases))
    return out


def boundary_factor(n, sides='all'):
    """Polynomial vanishing to first order on the chosen sides of the unit box."""
    if sides in ('all', 'full'):
        sides = [name for name, (axis, value) in SIDES.items() if axis < n]
    p = poly.constant(n)
    for side in sides:
        if side not in SIDES:
            raise ValueError("unknown side '{}'".format(side))
        axis, value = SIDES[side]
        if axis >= n:
            raise ValueError("side '{}' does not exist in dimension {}".format(side, n))
        linear = poly.unit(n, axis) if value == 0.0 else poly.add(poly.constant(n), poly.unit(n, axis), -1.0)
        p = poly.mul(p, linear)
    return Polynomial(p, n)


def side_predicate(sides, tol=1e-12):
    """predicate(x) -> True on the chosen sides of the unit box."""
    if sides in ('all', 'full'):
        return lambda x: any(abs(c) < tol or abs(c - 1.0) < tol for c in x)
    chosen = [SIDES[s] for s in sides]
    return lambda x: any(abs(x[axis] - value) < tol for axis, value in chosen)


def trig(n, k, frequency=np.pi):
    return analytic_form(n, k, trig_scalars(n, k, frequency), name='trig')


def bc_trig(n, k, sides='all', frequency=np.pi):
    factor = boundary_factor(n, sides)
    return analytic_form(n, k, [Product(factor, s) for s in trig_scalars(n, k, frequency)], name='bc_trig')


def random_polynomial(n, degree, rng):
    return {e: rng.standard_normal() for e in poly.multi_indices_upto(n, degree)}


def polynomial(n, k, degree, seed=0):
    rng = np.random.default_rng(seed)
    scalars = [Polynomial(random_polynomial(n, degree, rng), n) for K in combinations(n, k)]
    return analytic_form(n, k, scalars, name='poly')


def zero(n, k):
    return analytic_form(n, k, [Polynomial({}, n) for K in combinations(n, k)], name='zero')


def broken_fe(coarse, r, k, seed=0):
    """Random trimmed FE form of degree r + 1 on the coarse complex, as a
    piecewise polynomial target for finer meshes."""
    space = GlobalFESpace(coarse, None, FamilySelector(Family.TRIMMED, r + 1, k, coarse.n))
    coeffs = np.random.default_rng(seed).standard_normal(space.dim)
    logger.info("broken_fe target: {} on {} coarse cells".format(space.selector, len(coarse.cells)))
    return space.piecewise(coeffs).as_sampled('broken_fe')


def manufactured_target(name, n, k, **params):
    """Named target: trig, poly, bc_trig, broken_fe or zero.

    params:
      frequency:  trig, bc_trig
      sides:      bc_trig ('all' or a list of SIDES names)
      degree:     poly
      seed:       poly, broken_fe
      coarse, r:  broken_fe (coarse complex and the degree r of the study)
    """
    if name == 'trig':
        return trig(n, k, params.get('frequency', np.pi))
    if name == 'bc_trig':
        return bc_trig(n, k, params.get('sides', 'all'), params.get('frequency', np.pi))
    if name == 'poly':
        return polynomial(n, k, params.get('degree', 1), params.get('seed', 0))
    if name == 'zero':
        return zero(n, k)
    if name == 'broken_fe':
        if 'coarse' not in params:
            raise ValueError("broken_fe needs the coarse complex")
        return broken_fe(params['coarse'], params.get('r', 1), k, params.get('seed', 0))
    raise UnknownTarget("no manufactured target named '{}'".format(name))

"""Vector proxies of forms in three dimensions and the classical element names.

    scalar (0-form)        f
    circulation (1-form)   u1 dx + u2 dy + u3 dz
    flux (2-form)          u1 dy^dz - u2 dx^dz + u3 dx^dy
    density (3-form)       f dx^dy^dz

With these identifications d is grad, curl and div.
"""

import logging

import numpy as np

from exterior import SampledForm
from spaces import Family, FamilySelector, GlobalFESpace
from biorth import build_biorthogonal
from interp import (cell_derivative_errors, cell_errors, combine_cells, scott_zhang,
                    trace_residual)

logger = logging.getLogger(__name__)

SCALAR, CIRCULATION, FLUX, DENSITY = 0, 1, 2, 3

NAMES = {
    'ned1': (Family.TRIMMED, 1),
    'ned2': (Family.FULL, 1),
    'rt': (Family.TRIMMED, 2),
    'bdm': (Family.FULL, 2),
}

# flux coefficient order over dx01, dx02, dx12 is (u3, -u2, u1)
_FLUX_SIGN = np.array([1.0, -1.0, 1.0])
_FLUX_ORDER = [2, 1, 0]


class WrongDimension(ValueError):
    pass


def vector_to_form(kind, u):
    u = np.atleast_2d(u) if kind in (CIRCULATION, FLUX) else np.asarray(u, dtype=float).reshape(-1, 1)
    if kind == FLUX:
        return u[:, _FLUX_ORDER] * _FLUX_SIGN
    return u


def form_to_vector(kind, c):
    c = np.atleast_2d(c)
    if kind == FLUX:
        return (c * _FLUX_SIGN)[:, _FLUX_ORDER]
    if kind in (SCALAR, DENSITY):
        return c[:, 0]
    return c


class ProxyField(object):
    """A scalar or vector field standing for a k-form on R^3.

    Args:
      kind:        SCALAR, CIRCULATION, FLUX or DENSITY (the form degree)
      field:       callable (N, 3) -> (N,) or (N, 3)
      derivative:  grad, curl or div of the field as a callable, if known
    """

    def __init__(self, kind, field, derivative=None, name='field'):
        if kind not in (SCALAR, CIRCULATION, FLUX, DENSITY):
            raise ValueError("unknown proxy kind {}".format(kind))
        self.kind = kind
        self.field = field
        self.derivative = derivative
        self.name = name

    def __repr__(self):
        return "ProxyField({}, kind={})".format(self.name, self.kind)

    def __call__(self, x):
        return self.field(np.atleast_2d(x))

    def d(self):
        """The proxy of d: grad, curl or div."""
        if self.kind == DENSITY:
            return None
        if self.derivative is None:
            raise ValueError("{} carries no derivative".format(self))
        return ProxyField(self.kind + 1, self.derivative, name='d' + self.name)

    def to_form(self):
        kind = self.kind
        coeffs = lambda x: vector_to_form(kind, self.field(np.atleast_2d(x)))
        d_coeffs = None
        if self.derivative is not None and kind < DENSITY:
            d_coeffs = lambda x: vector_to_form(kind + 1, self.derivative(np.atleast_2d(x)))
        return SampledForm(3, kind, coeffs, d_coeffs, name=self.name)

    @classmethod
    def from_form(cls, form, name=None):
        if form.n != 3:
            raise WrongDimension("proxies exist for forms on R^3, got R^{}".format(form.n))
        kind = form.k
        derivative = None
        if kind < DENSITY and getattr(form, 'has_d', False):
            dform = form.d()
            derivative = lambda x: form_to_vector(kind + 1, dform.values(x))
        return cls(kind, lambda x: form_to_vector(kind, form.values(x)), derivative,
                   name=name or getattr(form, 'name', 'field'))


def selector_by_name(name, r):
    if name not in NAMES:
        raise ValueError("unknown space '{}', expected one of {}".format(name, sorted(NAMES)))
    family, k = NAMES[name]
    return FamilySelector(family, r, k, 3)


def space_by_name(name, r, complex, boundary=None):
    if complex.n != 3:
        raise WrongDimension("'{}' is a space on tetrahedral meshes, got n={}".format(name, complex.n))
    return GlobalFESpace(complex, boundary, selector_by_name(name, r))


def proxy_interpolate(u, name, r, complex, boundary=None, system=None, order=None):
    """Scott-Zhang interpolation of a proxy field.

    Returns:
      (ProxyField of the interpolant, report dict with per-cell and global L^2
      errors of the field and of its derivative proxy)
    """
    if complex.n != 3:
        raise WrongDimension("proxy interpolation needs n = 3, got n={}".format(complex.n))
    selector = selector_by_name(name, r)
    if system is None:
        system = build_biorthogonal(complex, selector.family, selector.r, selector.k)
    omega = u.to_form()
    result = scott_zhang(omega, system, boundary=boundary, order=order)
    field = ProxyField.from_form(result.as_sampled(), name='{}({})'.format(name, u.name))

    order = 2 * selector.r + 4 if order is None else order
    errors = cell_errors(result, omega, order)
    report = {
        'space': name,
        'r': r,
        'dim': system.dim,
        'result': result,
        'cell_errors': errors,
        'error': combine_cells(errors),
    }
    if u.kind < DENSITY and u.derivative is not None:
        d_errors = cell_derivative_errors(result, omega, order)
        report['d_cell_errors'] = d_errors
        report['d_error'] = combine_cells(d_errors)
    if boundary:
        report['trace_residual'] = trace_residual(result, boundary)
    logger.info("{} r={}: L2 error {:.3e}".format(name, r, report['error']))
    return field, report


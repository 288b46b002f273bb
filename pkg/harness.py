#!/usr/bin/env python3

"""Convergence studies of the quasi-interpolants and the ``interp`` command.

    interp run --config study.json --out results/
    interp verify --suite biorth

A study refines a mesh, interpolates a manufactured target on every level and
fits the rate of the errors against the mesh size. Each run writes

    results.csv       level, h, error, slope (slope against the previous level)
    report.json       the full RateReport
    mesh_level<L>.json

"""

import argparse
import csv
import json
import logging
import os
import sys

import attrs
import numpy as np

from mesh import (BoundarySubcomplex, choose_anchors, load_mesh, refine_uniform, save_mesh, unit_cube,
                  unit_interval, unit_square)
from spaces import Family
from biorth import build_biorthogonal, dump_duality_csv, measure_constants
from facetdual import FacetDuals, measure_scaling
from interp import (best_approximation, broken_constant, cell_derivative_errors, cell_errors,
                    combine_cells, interpolate, stability_ratios, trace_residual)
from proxy3d import NAMES, ProxyField, proxy_interpolate, selector_by_name
from targets import SIDES, manufactured_target, side_predicate
import verify

logger = logging.getLogger(__name__)

GENERATORS = {
    'unit_interval': unit_interval,
    'unit_square': unit_square,
    'unit_cube': unit_cube,
}

INTERPOLANTS = ('clement', 'clement_bc', 'scott_zhang')
TARGETS = ('trig', 'poly', 'bc_trig', 'broken_fe', 'zero')
BC_TARGETS = ('bc_trig', 'zero')


class StudyError(RuntimeError):
    pass


def _check_boundary(instance, attribute, value):
    if value in ('none', 'full'):
        return
    if isinstance(value, (list, tuple)) and value and all(v in SIDES for v in value):
        return
    raise ValueError("boundary must be 'none', 'full' or a list of {}, got {!r}".format(sorted(SIDES), value))


def _check_p(instance, attribute, value):
    if value not in (1, 2, np.inf):
        raise ValueError("p must be 1, 2 or inf, got {}".format(value))


def _parse_p(value):
    return np.inf if value in ('inf', 'infinity') else float(value)


@attrs.frozen
class StudyConfig(object):
    """One convergence study.

    mesh is a generator name (unit_interval, unit_square, unit_cube) or the
    path of a JSON mesh; levels counts the meshes, the first being refined
    start_level times. The default start keeps the fitted levels out of the
    preasymptotic range of the trigonometric targets on the unit square. space names a classical 3D element (ned1, ned2, rt, bdm)
    and then replaces family and k.
    """
    mesh: str = 'unit_square'
    levels: int = attrs.field(default=4, validator=attrs.validators.ge(1))
    start_level: int = attrs.field(default=2, validator=attrs.validators.ge(0))
    family: str = attrs.field(default='full', converter=lambda f: Family.parse(f).value)
    r: int = attrs.field(default=1, validator=attrs.validators.ge(1))
    k: int = attrs.field(default=0, validator=attrs.validators.ge(0))
    space: str = attrs.field(default=None,
                             validator=attrs.validators.optional(attrs.validators.in_(sorted(NAMES))))
    interpolant: str = attrs.field(default='clement', validator=attrs.validators.in_(INTERPOLANTS))
    p: float = attrs.field(default=2.0, converter=_parse_p, validator=_check_p)
    boundary: object = attrs.field(default='none', validator=_check_boundary)
    target: str = attrs.field(default='trig', validator=attrs.validators.in_(TARGETS))
    target_params: dict = attrs.field(factory=dict)
    order: int = None
    seed: int = 0
    constants: bool = True
    broken_bramble_hilbert: bool = False

    def __attrs_post_init__(self):
        if self.boundary != 'none':
            if self.interpolant == 'clement':
                raise ValueError("clement ignores boundary conditions; use clement_bc or scott_zhang")
            if self.target not in BC_TARGETS:
                raise ValueError("boundary conditions on {} need a target satisfying them ({}), got '{}'"
                                 .format(self.boundary, ', '.join(BC_TARGETS), self.target))
        if self.target == 'bc_trig' and self.boundary != 'none':
            sides = self.target_params.get('sides', 'all')
            if self.boundary != 'full' and sides not in ('all', 'full') and not set(self.boundary) <= set(sides):
                raise ValueError("bc_trig vanishes on {} but the boundary subcomplex covers {}".format(
                    sides, self.boundary))
            if self.boundary == 'full' and sides not in ('all', 'full'):
                raise ValueError("bc_trig must vanish on all sides for boundary 'full'")

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {a.name for a in attrs.fields(cls)}
        if unknown:
            raise ValueError("unknown study settings: {}".format(', '.join(sorted(unknown))))
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        with open(path) as f:
            return cls.from_dict(json.load(f))

    def as_dict(self):
        out = attrs.asdict(self)
        if out['p'] == np.inf:
            out['p'] = 'inf'
        return out


@attrs.frozen
class LevelResult(object):
    level: int
    h: float
    cells: int
    dofs: int
    error: float
    cell_max: float
    stability: float
    d_error: float = None
    trace_residual: float = None
    boundary_functional: float = None
    basis_constant: float = None
    operator_constant: float = None
    xi_scaling: float = None
    dxi_scaling: float = None
    broken_constant: float = None


@attrs.frozen
class RateReport(object):
    """Per-level errors with the fitted slopes.

    slope fits log(error) against log(h) by least squares, leaving out the
    coarsest level when four or more levels are available; last_two_slope
    uses the two finest levels only.
    """
    config: dict
    levels: list
    slope: float
    last_two_slope: float
    d_slope: float = None

    @property
    def errors(self):
        return np.array([l.error for l in self.levels])

    @property
    def h(self):
        return np.array([l.h for l in self.levels])

    def level_slopes(self):
        out = [None]
        for a, b in zip(self.levels, self.levels[1:]):
            out.append(_slope([a.h, b.h], [a.error, b.error]))
        return out

    def as_dict(self):
        return _finite(attrs.asdict(self))

    def write(self, out):
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, 'results.csv'), 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(['level', 'h', 'error', 'slope'])
            for l, s in zip(self.levels, self.level_slopes()):
                writer.writerow([l.level, repr(l.h), repr(l.error), '' if s is None else repr(s)])
        with open(os.path.join(out, 'report.json'), 'w') as f:
            json.dump(self.as_dict(), f, indent=2, sort_keys=True)
        logger.info("wrote results.csv and report.json to {}".format(out))


def _finite(value):
    """JSON-safe copy: non-finite floats become None."""
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    if isinstance(value, (float, np.floating)):
        return float(value) if np.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def _slope(h, errors):
    h = np.asarray(h, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(h) < 2 or np.any(errors <= 0.0) or np.any(h <= 0.0):
        return None
    return float(np.polyfit(np.log(h), np.log(errors), 1)[0])


def fit_rates(h, errors):
    """(slope over all levels but the coarsest when 4+ are given, slope of the
    last two levels)."""
    first = 1 if len(h) >= 4 else 0
    return _slope(h[first:], errors[first:]), _slope(h[-2:], errors[-2:])


def build_meshes(config):
    """(complex, boundary subcomplex declared by the mesh file) per level."""
    if config.mesh in GENERATORS:
        complex = GENERATORS[config.mesh](0)
        declared = BoundarySubcomplex.empty(complex)
    elif os.path.exists(config.mesh):
        complex, declared = load_mesh(config.mesh)
    else:
        raise StudyError("mesh '{}' is neither a generator ({}) nor a file".format(
            config.mesh, ', '.join(sorted(GENERATORS))))

    meshes = []
    for level in range(config.start_level + config.levels):
        if level:
            complex = refine_uniform(complex)
            declared = declared.refined(complex)
        if level >= config.start_level:
            meshes.append((complex, declared))
    return meshes


def boundary_for(config, complex, declared):
    if config.boundary == 'none':
        return BoundarySubcomplex.empty(complex)
    if config.boundary == 'full':
        return BoundarySubcomplex.full_boundary(complex)
    if declared:
        return declared
    return BoundarySubcomplex.from_predicate(complex, side_predicate(config.boundary))


def study_selector(config, n):
    if config.space is not None:
        if n != 3:
            raise StudyError("space '{}' needs a 3D mesh, got n={}".format(config.space, n))
        selector = selector_by_name(config.space, config.r)
        return selector.family, selector.k
    return Family.parse(config.family), config.k


def _target(config, n, k, coarse):
    params = dict(config.target_params)
    params.setdefault('seed', config.seed)
    if config.target == 'broken_fe':
        params.setdefault('coarse', coarse)
        params.setdefault('r', config.r)
    if config.target == 'bc_trig' and config.boundary not in ('none', 'full'):
        params.setdefault('sides', list(config.boundary))
    return manufactured_target(config.target, n, k, **params)


def run_level(config, level, complex, boundary, target, family, k, out=None, dump_biorth=False):
    system = build_biorthogonal(complex, family, config.r, k)
    selector = system.selector
    order = 2 * selector.r + 6 if config.order is None else config.order
    p = config.p

    if config.space is not None and config.interpolant == 'scott_zhang':
        field, report = proxy_interpolate(ProxyField.from_form(target), config.space, config.r, complex,
                                          boundary, system, order)
        result = report['result']
    else:
        result = interpolate(config.interpolant, target, system, boundary if boundary else None, order=order)
    errors = cell_errors(result, target, order, p)

    extra = {}
    if k < complex.n and target.has_d:
        extra['d_error'] = combine_cells(cell_derivative_errors(result, target, order, p), p)
    if boundary:
        extra['trace_residual'] = trace_residual(result, boundary)
        if result.raw is not None and len(result.zeroed):
            extra['boundary_functional'] = float(np.abs(result.raw[result.zeroed]).max())
    if config.constants:
        constants = measure_constants(system, p)
        extra['basis_constant'] = constants.basis
        extra['operator_constant'] = constants.operator
        if config.interpolant == 'scott_zhang' and k < complex.n:
            scaling = measure_scaling(FacetDuals(system.space, choose_anchors(complex, boundary)))
            extra['xi_scaling'] = scaling.xi
            extra['dxi_scaling'] = scaling.dxi
    if config.broken_bramble_hilbert:
        best, dbest = best_approximation(target, complex, selector, order)
        extra['broken_constant'] = broken_constant(cell_errors(result, target, order), best, dbest, complex)

    stability = stability_ratios(result, target, order, with_d=config.interpolant != 'clement', p=p)
    if out is not None:
        save_mesh(complex, os.path.join(out, 'mesh_level{}.json'.format(level)), boundary)
        if dump_biorth:
            dump_duality_csv(system, os.path.join(out, 'biorth_level{}.csv'.format(level)))

    entry = LevelResult(level=level, h=complex.h_max(), cells=len(complex.cells), dofs=system.dim,
                        error=combine_cells(errors, p), cell_max=float(errors.max(initial=0.0)),
                        stability=float(stability.max(initial=0.0)), **extra)
    logger.info("level {}: h={:.4f} dofs={} error={:.4e}".format(level, entry.h, entry.dofs, entry.error))
    return entry


def run_study(config, out=None, dump_biorth=False):
    """Run a study level by level; writes its outputs when out is given."""
    meshes = build_meshes(config)
    n = meshes[0][0].n
    family, k = study_selector(config, n)
    if k > n:
        raise StudyError("form degree k={} exceeds the dimension {}".format(k, n))
    if out is not None:
        os.makedirs(out, exist_ok=True)

    levels = []
    for level, (complex, declared) in enumerate(meshes):
        try:
            boundary = boundary_for(config, complex, declared)
            target = _target(config, n, k, meshes[0][0])
            levels.append(run_level(config, level, complex, boundary, target, family, k, out, dump_biorth))
        except StudyError:
            raise
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
            raise StudyError("level {} ({} cells) of {} {} r={} k={}: {}".format(
                level, len(complex.cells), config.interpolant, family.value, config.r, k, e)) from e

    h = np.array([l.h for l in levels])
    slope, last_two = fit_rates(h, np.array([l.error for l in levels]))
    d_slope = None
    if all(l.d_error is not None for l in levels):
        d_slope = fit_rates(h, np.array([l.d_error for l in levels]))[0]
    report = RateReport(config=config.as_dict(), levels=levels, slope=slope, last_two_slope=last_two,
                        d_slope=d_slope)
    if out is not None:
        report.write(out)
    return report


def _configure_logging(verbose):
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')


def parse_args(argv=None):
    parser = argparse.ArgumentParser(prog='interp', description=__doc__.split('\n\n')[0])
    parser.add_argument('-v', '--verbose', action='count', default=0)
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='run a convergence study')
    run.add_argument('--config', required=True, help='study JSON file')
    run.add_argument('--out', default='.', help='output directory')
    run.add_argument('--dump-biorth', action='store_true', help='write [phi*(phi)] per level as CSV')
    run.add_argument('--seed', type=int, default=None)
    run.add_argument('--space', choices=sorted(NAMES), default=None)

    check = commands.add_parser('verify', help='run property suites')
    check.add_argument('--suite', choices=sorted(verify.SUITES) + ['all'], default='all')
    check.add_argument('--seed', type=int, default=0)
    return parser.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    _configure_logging(args.verbose)

    if args.command == 'verify':
        names = sorted(verify.SUITES) if args.suite == 'all' else [args.suite]
        failed = 0
        for name in names:
            checks = verify.run_suite(name, args.seed)
            bad = [c for c in checks if not c.passed]
            failed += len(bad)
            print("{}: {} checks, {} failed".format(name, len(checks), len(bad)))
            for c in bad:
                print("  {}".format(c))
        return 1 if failed else 0

    try:
        config = StudyConfig.from_json(args.config)
        overrides = {}
        if args.seed is not None:
            overrides['seed'] = args.seed
        if args.space is not None:
            overrides['space'] = args.space
        if overrides:
            config = attrs.evolve(config, **overrides)
        report = run_study(config, args.out, args.dump_biorth)
    except (StudyError, ValueError, OSError) as e:
        print("interp: {}".format(e), file=sys.stderr)
        return 1
    print("slope {} (last two levels {})".format(report.slope, report.last_two_slope))
    return 0


if __name__ == '__main__':
    sys.exit(main())

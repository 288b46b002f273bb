"""Property suites behind ``interp verify``.

Every suite returns a list of Check records; a suite passes when all of its
checks do. Randomized checks draw from a seeded generator so a run is
reproducible from its seed.
"""

import logging

import attrs
import numpy as np

from mesh import (BoundarySubcomplex, Simplex, SimplicialComplex, choose_anchors, combinations,
                  incidence_sign, unit_cube, unit_square)
from exterior import (PolyForm, exterior_derivative, integrate_poly, koszul, random_polyform, trace,
                      wedge)
from exterior import polynomial as poly
from spaces import (Family, FamilySelector, GlobalFESpace, inclusion_residuals,
                    koszul_space_equivalence, local_basis, space_dimension)
from dofs import dof_count
from biorth import (basis_residual, build_biorthogonal, duality_residual, locality_residual,
                    measure_constants, restrict_bc)
from facetdual import FacetDuals, ibp_check, measure_scaling, moment_residual
from interp import (best_approximation, broken_constant, cell_errors, clement, clement_bc, combine_cells,
                    scott_zhang, stability_ratios, trace_residual)
from proxy3d import NAMES, ProxyField, space_by_name
from targets import bc_trig, broken_fe, polynomial, trig

logger = logging.getLogger(__name__)


@attrs.frozen
class Check(object):
    name: str
    value: float
    tolerance: float

    @property
    def passed(self):
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)

    def __str__(self):
        return "{:<6} {:<60} {:.3e} (tol {:.1e})".format(
            'ok' if self.passed else 'FAIL', self.name, self.value, self.tolerance)


def random_cell(n, rng):
    """A random well-shaped n-simplex, oriented by the sign of its Jacobian."""
    coords = np.vstack((np.zeros((1, n)), np.identity(n))) + 0.2 * rng.standard_normal((n + 1, n))
    sign = int(np.sign(np.linalg.det((coords[1:] - coords[0]).T)))
    return Simplex(None, range(n + 1), coords, sign)


def single_cell(n):
    vertices = np.vstack((np.zeros((1, n)), np.identity(n)))
    return SimplicialComplex(vertices, [list(range(n + 1))])


def _homogeneous(n, k, degree, rng):
    return {(beta, K): rng.standard_normal()
            for beta in poly.multi_indices(n, degree) for K in combinations(n, k)}


def algebra_suite(seed=0, examples=50):
    """d d = 0, Leibniz, Stokes, trace naturality and the Koszul identities."""
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(['dd', 'leibniz', 'stokes', 'trace_naturality', 'trace_d',
                           'kappa_kappa', 'kappa_derivation', 'homotopy'], 0.0)
    for count in range(examples):
        n = 2 + count % 2
        T = random_cell(n, rng)
        k = int(rng.integers(0, n + 1))
        degree = int(rng.integers(0, 4))
        omega = random_polyform(T, k, degree, rng)

        if k + 2 <= n:
            worst['dd'] = max(worst['dd'], exterior_derivative(exterior_derivative(omega)).coefficient_norm())

        l = int(rng.integers(0, n - k + 1))
        eta = random_polyform(T, l, int(rng.integers(0, 3)), rng)
        if k + l + 1 <= n:
            lhs = exterior_derivative(wedge(omega, eta))
            rhs = wedge(exterior_derivative(omega), eta) + (-1) ** k * wedge(omega, exterior_derivative(eta))
            worst['leibniz'] = max(worst['leibniz'], (lhs - rhs).coefficient_norm())

        sigma = random_polyform(T, n - 1, degree, rng)
        total = 0.0
        for skip in range(n + 1):
            F = T.face([p for p in range(n + 1) if p != skip])
            total += incidence_sign(T, F) * integrate_poly(trace(sigma, F))
        worst['stokes'] = max(worst['stokes'], abs(total - integrate_poly(exterior_derivative(sigma))))

        F = T.face(range(n))
        G = T.face(range(n - 1))
        if k <= n - 2:
            worst['trace_naturality'] = max(worst['trace_naturality'],
                                            (trace(trace(omega, F), G) - trace(omega, G)).coefficient_norm())
        if k < n - 1:
            worst['trace_d'] = max(worst['trace_d'], (exterior_derivative(trace(omega, F))
                                                      - trace(exterior_derivative(omega), F)).coefficient_norm())

        if k >= 1:
            base = T.barycenter + 0.1 * rng.standard_normal(n)
            kw = koszul(omega, base)
            if k >= 2:
                worst['kappa_kappa'] = max(worst['kappa_kappa'], koszul(kw, base).coefficient_norm())
            if l >= 1 and k + l <= n:
                lhs = koszul(wedge(omega, eta), base)
                rhs = wedge(kw, eta) + (-1) ** k * wedge(omega, koszul(eta, base))
                worst['kappa_derivation'] = max(worst['kappa_derivation'], (lhs - rhs).coefficient_norm())

            h = PolyForm.from_cartesian(T, k, _homogeneous(n, k, degree, rng), origin=base)
            lhs = exterior_derivative(koszul(h, base))
            if k < n:
                lhs = lhs + koszul(exterior_derivative(h), base)
            worst['homotopy'] = max(worst['homotopy'], (lhs - (degree + k) * h).coefficient_norm())
    return [Check(name, value, 1e-10) for name, value in worst.items()]


def spaces_suite(seed=0, max_r=3):
    """Dimensions against the closed formulas, inclusion chains and the
    Koszul description of the trimmed spaces."""
    checks = []
    for n in (1, 2, 3):
        ref = Simplex.reference(n)
        for family in Family:
            for r in range(1, max_r + 1):
                for k in range(n + 1):
                    if family is Family.TRIMMED and k == 0:
                        continue
                    built = local_basis(ref, family, r, k).dim
                    checks.append(Check("dim {} r={} k={} n={}".format(family.value, r, k, n),
                                        float(abs(built - space_dimension(family, r, k, n))), 0.0))
        for r in range(0, max_r):
            for k in range(n + 1):
                for key, value in inclusion_residuals(n, r, k).items():
                    checks.append(Check("{} r={} k={} n={}".format(key, r, k, n), value, 1e-9))
        for r in range(1, max_r + 1):
            for k in range(1, n + 1):
                checks.append(Check("koszul trimmed r={} k={} n={}".format(r, k, n),
                                    koszul_space_equivalence(ref, r, k), 1e-9))
    return checks


def _biorth_checks(meshes, family, r, k, label):
    checks = []
    constants = []
    for level, complex in enumerate(meshes):
        system = build_biorthogonal(complex, family, r, k)
        tag = "{} {} r={} k={} level {}".format(label, system.selector, r, k, level)
        checks.append(Check("duality " + tag, duality_residual(system), 1e-9))
        checks.append(Check("locality " + tag, locality_residual(system), 1e-9))
        diag, bad = basis_residual(system)
        checks.append(Check("unit triangular " + tag, diag + bad, 1e-12))
        restriction = restrict_bc(system, BoundarySubcomplex.full_boundary(complex))
        checks.append(Check("boundary leak " + tag, restriction.leak, 1e-9))
        constants.append(measure_constants(system))
    return checks, constants


def _variation(values):
    values = np.asarray(values, dtype=float)
    if not len(values) or values.max() == 0.0:
        return 0.0
    return float(values.max() / values.min() - 1.0) if values.min() > 0.0 else np.inf


def biorth_suite(seed=0, levels=3):
    """Biorthogonality, locality and scale-free constants across refinements."""
    checks = []
    squares = [unit_square(level) for level in range(levels)]
    for family, r in ((Family.FULL, 1), (Family.TRIMMED, 1), (Family.FULL, 2)):
        for k in range(3):
            more, constants = _biorth_checks(squares, family, r, k, 'square')
            checks.extend(more)
            checks.append(Check("basis constant variation square {} r={} k={}".format(family.value, r, k),
                                _variation([c.basis for c in constants]), 0.05))
            checks.append(Check("operator constant variation square {} r={} k={}".format(
                family.value, r, k), _variation([c.operator for c in constants]), 0.05))
    cubes = [unit_cube(level) for level in range(levels)]
    for family in Family:
        for k in range(4):
            more, constants = _biorth_checks(cubes, family, 1, k, 'cube')
            checks.extend(more)
            checks.append(Check("basis constant variation cube {} r=1 k={}".format(family.value, k),
                                _variation([c.basis for c in constants]), 0.05))
            checks.append(Check("operator constant variation cube {} r=1 k={}".format(family.value, k),
                                _variation([c.operator for c in constants]), 0.05))
    return checks


def facetdual_suite(seed=0, max_r=2):
    """Moment identities, integration by parts and the scaling of Xi."""
    checks = []
    for n in (2, 3):
        for family in Family:
            for r in range(1, max_r + 1):
                for k in range(n):
                    selector = FamilySelector(family, r, k, n)
                    fam = selector.family
                    worst = 0.0
                    for m in range(k, n):
                        for pos in combinations(n, m + 1):
                            for i in range(dof_count(fam, r, k, m)):
                                worst = max(worst, moment_residual(fam, r, k, n, pos, i))
                    checks.append(Check("moments {}".format(selector), worst, 1e-9))

    rng = np.random.default_rng(seed)
    for family, k in ((Family.FULL, 0), (Family.TRIMMED, 1), (Family.FULL, 1)):
        scalings = []
        for level in range(3):
            complex = unit_square(level)
            system = build_biorthogonal(complex, family, 1, k)
            duals = FacetDuals(system.space, choose_anchors(complex))
            scalings.append(measure_scaling(duals))
            if level != 1:
                continue
            exact = 0.0
            for S, i in system.space.dofs:
                if S.dim < complex.n:
                    ext = duals.extension(S, i)
                    exact = max(exact, ibp_check(ext, random_polyform(ext.T, k, 2, rng)))
            checks.append(Check("integration by parts polynomial {}".format(system.selector), exact, 1e-9))
        checks.append(Check("xi scaling variation {} k={}".format(family.value, k),
                            _variation([s.xi for s in scalings]), 1.0))
        checks.append(Check("dxi scaling variation {} k={}".format(family.value, k),
                            _variation([s.dxi for s in scalings]), 1.0))
        checks.append(smooth_ibp_check(family, 1, k, trig(2, k)))
    return checks


def smooth_ibp_check(family, r, k, smooth, level=3):
    """Integration by parts for a smooth form at quadrature order 2r+6.

    The mesh is fine enough for that order to resolve the trigonometric
    targets; on coarser meshes the quadrature error dominates.
    """
    complex = unit_square(level)
    system = build_biorthogonal(complex, family, r, k)
    duals = FacetDuals(system.space, choose_anchors(complex))
    worst = 0.0
    for S, i in system.space.dofs:
        if S.dim < complex.n:
            worst = max(worst, ibp_check(duals.extension(S, i), smooth, 2 * r + 6))
    return Check("integration by parts smooth {} level {}".format(system.selector, level), worst, 1e-6)


def interp_suite(seed=0):
    """Reproduction of FE forms and preservation of boundary conditions."""
    rng = np.random.default_rng(seed)
    checks = []
    for n, complex in ((2, unit_square(1)), (3, unit_cube(0))):
        for family in Family:
            for k in range(n + 1):
                system = build_biorthogonal(complex, family, 1, k)
                selector = system.selector
                c = rng.standard_normal(system.dim)
                omega = system.space.piecewise(system.to_ext(c)).as_sampled()
                result = scott_zhang(omega, system)
                checks.append(Check("scott_zhang reproduces {}".format(selector),
                                    float(np.abs(result.coefficients - c).max()), 1e-8))
                result = clement(omega, system)
                checks.append(Check("clement reproduces {}".format(selector),
                                    float(np.abs(result.coefficients - c).max()), 1e-8))

                degree = selector.r if selector.family is Family.FULL else selector.r - 1
                target = polynomial(n, k, degree, seed)
                order = 2 * selector.r + 4
                err = combine_cells(cell_errors(clement(target, system), target, order))
                checks.append(Check("clement reproduces P{} on {}".format(degree, selector), err, 1e-8))

    for n, complex in ((2, unit_square(2)), (3, unit_cube(0))):
        boundary = BoundarySubcomplex.full_boundary(complex)
        for family, k in ((Family.FULL, 0), (Family.TRIMMED, 1)):
            system = build_biorthogonal(complex, family, 1, k)
            target = bc_trig(n, k)
            sz = scott_zhang(target, system, boundary=boundary, order=16 if n == 2 else None)
            for result in (clement_bc(target, system, boundary), sz):
                checks.append(Check("{} trace on U {}".format(result.name, system.selector),
                                    trace_residual(result, boundary), 1e-9))
            if n == 2:
                on_u = [j for j, (S, i) in enumerate(system.space.dofs) if S in boundary]
                checks.append(Check("K on U before zeroing {}".format(system.selector),
                                    float(np.abs(sz.raw[on_u]).max(initial=0.0)), 1e-6))
    checks.extend(constant_checks())
    return checks


def constant_checks(order=8):
    """Stability and broken Bramble-Hilbert constants over three refinements.

    Both are maxima over cells of ratios whose numerator and denominator scale
    alike, so they should stay within a factor of two from level to level.
    """
    checks = []
    coarse = unit_square(0)
    stability = []
    broken = []
    for level in (1, 2, 3):
        complex = unit_square(level)
        system = build_biorthogonal(complex, Family.FULL, 1, 1)
        smooth = trig(2, 1)
        stability.append(stability_ratios(scott_zhang(smooth, system), smooth, order, with_d=True).max())
        target = broken_fe(coarse, 1, 1)
        errors = cell_errors(scott_zhang(target, system), target, order)
        best, dbest = best_approximation(target, complex, system.selector, order)
        broken.append(broken_constant(errors, best, dbest, complex))
    checks.append(Check("stability constant variation square full r=1 k=1", _variation(stability), 1.0))
    checks.append(Check("broken_fe constant variation square full r=1 k=1", _variation(broken), 1.0))

    cube = []
    for level in (0, 1, 2):
        system = build_biorthogonal(unit_cube(level), Family.TRIMMED, 1, 1)
        smooth = trig(3, 1)
        cube.append(stability_ratios(scott_zhang(smooth, system), smooth, order, with_d=True).max())
    checks.append(Check("stability constant variation cube trimmed r=1 k=1", _variation(cube), 1.0))
    return checks


def proxy_suite(seed=0):
    """Classical element dimensions and the grad, curl, div correspondences."""
    checks = []
    tet = single_cell(3)
    for name, expected in (('ned1', 6), ('rt', 4), ('bdm', 12)):
        checks.append(Check("{} r=1 on one tetrahedron".format(name),
                            float(abs(space_by_name(name, 1, tet).dim - expected)), 0.0))
    for name, (family, k) in NAMES.items():
        for r in (1, 2):
            dim = GlobalFESpace(tet, None, FamilySelector(family, r, k, 3)).dim
            checks.append(Check("{} r={} against the closed formula".format(name, r),
                                float(abs(dim - space_dimension(family, r, k, 3))), 0.0))
    points = np.random.default_rng(seed).random((20, 3))
    for k in (0, 1, 2):
        field = ProxyField.from_form(trig(3, k))
        checks.append(Check("derivative correspondence k={}".format(k),
                            field.to_form().check_derivative(points), 1e-4))
    for r in (1, 2):
        checks.append(Check("ned1 r={} inside ned2".format(r),
                            inclusion_residuals(3, r - 1, 1)['trimmed_in_full'], 1e-9))
    return checks


def expected_rate(family, r, k):
    """L2 rate m of a smooth target: r + 1 for the full family, r for the trimmed one."""
    return r + 1 if Family.parse(family) is Family.FULL or k == 0 else r


def _rate_cases():
    cases = []
    for r in (1, 2):
        for interpolant in ('clement', 'scott_zhang'):
            for family, k in (('full', 0), ('full', 1), ('trimmed', 1), ('trimmed', 2)):
                cases.append({'interpolant': interpolant, 'family': family, 'r': r, 'k': k})
        for interpolant, family, k in (('clement_bc', 'full', 0), ('scott_zhang', 'full', 0),
                                       ('scott_zhang', 'trimmed', 1)):
            cases.append({'interpolant': interpolant, 'family': family, 'r': r, 'k': k,
                          'boundary': 'full', 'target': 'bc_trig'})
    for interpolant, family, k in (('clement', 'full', 0), ('scott_zhang', 'full', 0),
                                   ('scott_zhang', 'trimmed', 1), ('scott_zhang', 'trimmed', 2)):
        cases.append({'mesh': 'unit_cube', 'start_level': 0, 'interpolant': interpolant, 'family': family,
                      'r': 1, 'k': k, 'target_params': {'frequency': 0.5}})
    return cases


RATE_CASES = _rate_cases()
RATE_WINDOW = 0.15


def rate_check(settings, seed=0):
    """|fitted slope - m| for one four-level study."""
    from harness import StudyConfig, run_study

    config = StudyConfig.from_dict(dict(settings, levels=4, constants=False, seed=seed))
    report = run_study(config)
    m = expected_rate(config.family, config.r, config.k)
    deviation = np.inf if report.slope is None else abs(report.slope - m)
    name = "rate {} {} {} r={} k={} boundary={} (m={}, slope {})".format(
        config.mesh, config.interpolant, config.family, config.r, config.k, config.boundary, m,
        'none' if report.slope is None else '{:.3f}'.format(report.slope))
    return Check(name, deviation, RATE_WINDOW)


def rates_suite(seed=0):
    """Fitted L2 convergence rates of the interpolants against their expected orders."""
    return [rate_check(settings, seed) for settings in RATE_CASES]


SUITES = {
    'algebra': algebra_suite,
    'spaces': spaces_suite,
    'biorth': biorth_suite,
    'facetdual': facetdual_suite,
    'interp': interp_suite,
    'proxy': proxy_suite,
    'rates': rates_suite,
}


def run_suite(name, seed=0):
    if name not in SUITES:
        raise ValueError("unknown suite '{}', expected one of {}".format(name, sorted(SUITES)))
    checks = SUITES[name](seed)
    failed = [c for c in checks if not c.passed]
    logger.info("suite {}: {} checks, {} failed".format(name, len(checks), len(failed)))
    for c in failed:
        logger.warning(str(c))
    return checks

import unittest

from .context import *


def swirl(x):
    return np.stack([np.sin(x[:, 1]) * x[:, 2], x[:, 0] ** 2, x[:, 0] * x[:, 1] * x[:, 2]], axis=1)


def swirl_curl(x):
    return np.stack([x[:, 0] * x[:, 2],
                     np.sin(x[:, 1]) - x[:, 1] * x[:, 2],
                     2.0 * x[:, 0] - x[:, 2] * np.cos(x[:, 1])], axis=1)


def linear(x):
    return np.stack([1.0 + x[:, 1], 2.0 * x[:, 0] - x[:, 2], x[:, 0] + x[:, 1] + x[:, 2]], axis=1)


def linear_curl(x):
    return np.tile([2.0, -1.0, 1.0], (len(x), 1))


class Test_Proxies(unittest.TestCase):

    def setUp(self):
        self.points = np.random.default_rng(12).random((10, 3))

    def test_curl_is_d(self):
        """The exterior derivative of a circulation form is the flux form of the curl"""
        form = ProxyField(CIRCULATION, swirl, swirl_curl).to_form()
        self.assertLess(form.check_derivative(self.points), 1e-6)

    def test_div_is_d(self):
        field = lambda x: np.stack([x[:, 0] * x[:, 1], x[:, 1] * x[:, 2], x[:, 2] * x[:, 0]], axis=1)
        div = lambda x: x[:, 0] + x[:, 1] + x[:, 2]
        form = ProxyField(FLUX, field, div).to_form()
        self.assertLess(form.check_derivative(self.points), 1e-6)

    def test_grad_is_d(self):
        field = lambda x: x[:, 0] * x[:, 1] ** 2
        grad = lambda x: np.stack([x[:, 1] ** 2, 2.0 * x[:, 0] * x[:, 1], np.zeros(len(x))], axis=1)
        form = ProxyField(SCALAR, field, grad).to_form()
        self.assertLess(form.check_derivative(self.points), 1e-6)

    def test_flux_convention(self):
        """u1 dy^dz - u2 dx^dz + u3 dx^dy"""
        c = vector_to_form(FLUX, np.array([[1.0, 2.0, 3.0]]))
        np.testing.assert_array_equal(c, [[3.0, -2.0, 1.0]])
        np.testing.assert_array_equal(form_to_vector(FLUX, c), [[1.0, 2.0, 3.0]])

    def test_from_form(self):
        """A proxy of a form should give back the same field and derivative"""
        field = ProxyField.from_form(ProxyField(CIRCULATION, swirl, swirl_curl).to_form())
        np.testing.assert_allclose(field(self.points), swirl(self.points))
        np.testing.assert_allclose(field.d()(self.points), swirl_curl(self.points))

    def test_wrong_dimension(self):
        with self.assertRaises(WrongDimension):
            ProxyField.from_form(trig(2, 1))
        with self.assertRaises(WrongDimension):
            proxy_interpolate(ProxyField(CIRCULATION, linear), 'ned1', 1, unit_square(0))

    def test_unknown_kind_and_name(self):
        with self.assertRaises(ValueError):
            ProxyField(4, linear)
        with self.assertRaises(ValueError):
            selector_by_name('nedelec', 1)


class Test_NamedSpaces(unittest.TestCase):

    def test_dimensions(self):
        """Lowest-order edge and face spaces have one dof per edge and per face"""
        c = unit_cube(0)
        self.assertEqual(space_by_name('ned1', 1, c).dim, len(c.simplices[1]))
        self.assertEqual(space_by_name('rt', 1, c).dim, len(c.simplices[2]))
        self.assertEqual(space_by_name('ned2', 1, c).dim, 2 * len(c.simplices[1]))
        self.assertEqual(space_by_name('bdm', 1, c).dim, 3 * len(c.simplices[2]))

    def test_interpolation_reproduces_linear_fields(self):
        """Second-kind Nedelec interpolation should reproduce a linear field and its curl"""
        field, report = proxy_interpolate(ProxyField(CIRCULATION, linear, linear_curl), 'ned2', 1, unit_cube(0))
        self.assertLess(report['error'], 1e-8)
        self.assertLess(report['d_error'], 1e-8)
        np.testing.assert_allclose(field(self.points()), linear(self.points()), atol=1e-8)
        self.assertEqual(report['dim'], 2 * 19)

    def test_raviart_thomas_constants(self):
        constant = lambda x: np.tile([1.0, 2.0, 3.0], (len(x), 1))
        div = lambda x: np.zeros(len(x))
        field, report = proxy_interpolate(ProxyField(FLUX, constant, div), 'rt', 1, unit_cube(0))
        self.assertLess(report['error'], 1e-8)
        self.assertLess(report['d_error'], 1e-8)

    def test_boundary_report(self):
        c = unit_cube(0)
        U = BoundarySubcomplex.full_boundary(c)
        zero = lambda x: np.zeros((len(x), 3))
        field, report = proxy_interpolate(ProxyField(CIRCULATION, zero, zero), 'ned1', 1, c, U)
        self.assertLess(report['trace_residual'], 1e-12)
        self.assertEqual(report['error'], 0.0)

    def points(self):
        return np.array([[0.2, 0.3, 0.4], [0.7, 0.1, 0.5], [0.5, 0.5, 0.9]])

    def test_wrong_curl_rejected(self):
        """A curl that does not belong to the field should be refused before interpolating"""
        wrong = lambda x: np.tile([2.0, 0.0, 1.0], (len(x), 1))
        with self.assertRaises(InconsistentDerivative):
            proxy_interpolate(ProxyField(CIRCULATION, linear, wrong), 'ned2', 1, unit_cube(0))

import csv
import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stdout

from .context import *

from harness import RateReport, StudyConfig, StudyError, fit_rates, main, run_study


class Test_StudyConfig(unittest.TestCase):

    def test_defaults(self):
        config = StudyConfig()
        self.assertEqual((config.mesh, config.family, config.interpolant, config.p), ('unit_square', 'full', 'clement', 2.0))

    def test_parsing(self):
        config = StudyConfig.from_dict({'family': 'TRIMMED', 'k': 1, 'p': 'inf', 'interpolant': 'scott_zhang'})
        self.assertEqual(config.family, 'trimmed')
        self.assertEqual(config.p, np.inf)
        self.assertEqual(config.as_dict()['p'], 'inf')

    def test_rejects_bad_settings(self):
        for data in ({'levels': 0}, {'r': 0}, {'p': 3}, {'interpolant': 'nodal'}, {'target': 'gaussian'},
                     {'boundary': 'some'}, {'boundary': ['left', 'north']}, {'space': 'nedelec'},
                     {'colour': 'red'}):
            with self.assertRaises(ValueError, msg=str(data)):
                StudyConfig.from_dict(data)

    def test_boundary_compatibility(self):
        """Boundary conditions need an interpolant and a target that respect them"""
        with self.assertRaises(ValueError):
            StudyConfig(interpolant='clement', boundary='full', target='zero')
        with self.assertRaises(ValueError):
            StudyConfig(interpolant='scott_zhang', boundary='full', target='trig')
        with self.assertRaises(ValueError):
            StudyConfig(interpolant='scott_zhang', boundary=['left', 'top'], target='bc_trig',
                        target_params={'sides': ['left']})
        StudyConfig(interpolant='clement_bc', boundary=['left'], target='bc_trig', target_params={'sides': ['left']})

    def test_from_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'study.json')
            with open(path, 'w') as f:
                json.dump({'mesh': 'unit_cube', 'levels': 2, 'space': 'rt', 'interpolant': 'scott_zhang'}, f)
            config = StudyConfig.from_json(path)
        self.assertEqual((config.mesh, config.levels, config.space), ('unit_cube', 2, 'rt'))


class Test_Rates(unittest.TestCase):

    def test_fit_rates(self):
        """A clean power law should give its exponent"""
        h = np.array([1.0, 0.5, 0.25, 0.125])
        slope, last_two = fit_rates(h, 3.0 * h ** 2)
        self.assertAlmostEqual(slope, 2.0, places=10)
        self.assertAlmostEqual(last_two, 2.0, places=10)

    def test_fit_skips_coarsest(self):
        h = np.array([1.0, 0.5, 0.25, 0.125])
        errors = h ** 2
        errors[0] = 100.0
        self.assertAlmostEqual(fit_rates(h, errors)[0], 2.0, places=10)

    def test_zero_errors(self):
        self.assertEqual(fit_rates(np.array([1.0, 0.5]), np.zeros(2)), (None, None))


class Test_RunStudy(unittest.TestCase):

    def test_zero_target(self):
        """The zero target should be reproduced exactly on every level"""
        config = StudyConfig(levels=2, family='trimmed', k=1, interpolant='scott_zhang', target='zero',
                             boundary='full', constants=False)
        report = run_study(config)
        self.assertEqual(len(report.levels), 2)
        for level in report.levels:
            self.assertEqual(level.error, 0.0)
            self.assertLess(level.trace_residual, 1e-12)
        self.assertIsNone(report.slope)

    def test_clement_rate(self):
        """Clement onto continuous P1 should converge at second order in L2"""
        config = StudyConfig(levels=3, start_level=1, r=1, k=0, interpolant='clement', target='trig',
                             constants=False)
        report = run_study(config)
        np.testing.assert_allclose(report.h[1:] / report.h[:-1], 0.5)
        self.assertGreater(report.last_two_slope, 1.5)
        self.assertGreater(report.d_slope, 0.7)

    def test_rate_windows(self):
        """Fitted slopes from the default start level should fall within 0.15 of the expected order"""
        for settings in ({'interpolant': 'clement', 'family': 'full', 'r': 1, 'k': 0},
                         {'interpolant': 'scott_zhang', 'family': 'trimmed', 'r': 1, 'k': 1}):
            check = verify.rate_check(settings)
            self.assertTrue(check.passed, str(check))
        self.assertEqual(verify.expected_rate('full', 2, 1), 3)
        self.assertEqual(verify.expected_rate('trimmed', 2, 1), 2)
        self.assertEqual(verify.expected_rate('trimmed', 2, 0), 3)

    def test_outputs(self):
        """A study should write its rate table, report and meshes"""
        config = StudyConfig(levels=2, family='trimmed', k=1, interpolant='scott_zhang')
        with tempfile.TemporaryDirectory() as tmp:
            report = run_study(config, tmp, dump_biorth=True)
            with open(os.path.join(tmp, 'results.csv')) as f:
                rows = list(csv.reader(f))
            with open(os.path.join(tmp, 'report.json')) as f:
                saved = json.load(f)
            self.assertTrue(os.path.exists(os.path.join(tmp, 'mesh_level1.json')))
            self.assertTrue(os.path.exists(os.path.join(tmp, 'biorth_level0.csv')))
        self.assertEqual(rows[0], ['level', 'h', 'error', 'slope'])
        self.assertEqual(len(rows), 3)
        self.assertEqual(rows[1][3], '')
        self.assertEqual(saved['config']['family'], 'trimmed')
        self.assertEqual(len(saved['levels']), 2)
        self.assertIsNotNone(report.levels[0].basis_constant)
        self.assertIsNotNone(report.levels[0].xi_scaling)

    def test_deterministic_outputs(self):
        """The same configuration should write byte-identical tables"""
        config = StudyConfig(levels=2, family='trimmed', k=1, interpolant='scott_zhang', constants=False)
        written = []
        for attempt in range(2):
            with tempfile.TemporaryDirectory() as tmp:
                run_study(config, tmp)
                with open(os.path.join(tmp, 'results.csv'), 'rb') as f:
                    table = f.read()
                with open(os.path.join(tmp, 'report.json'), 'rb') as f:
                    written.append((table, f.read()))
        self.assertEqual(written[0][0], written[1][0])
        self.assertEqual(written[0][1], written[1][1])

    def test_space_needs_3d(self):
        with self.assertRaises(StudyError):
            run_study(StudyConfig(levels=1, space='ned1', interpolant='scott_zhang'))

    def test_unknown_mesh(self):
        with self.assertRaises(StudyError):
            run_study(StudyConfig(mesh='no_such_mesh.json', levels=1))


class Test_Main(unittest.TestCase):

    def test_verify(self):
        out = io.StringIO()
        with redirect_stdout(out):
            status = main(['verify', '--suite', 'spaces'])
        self.assertEqual(status, 0)
        self.assertIn('spaces:', out.getvalue())

    def test_missing_config(self):
        with redirect_stdout(io.StringIO()):
            self.assertEqual(main(['run', '--config', 'no_such_study.json']), 1)

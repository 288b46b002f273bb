import unittest
from test import (test_biorth, test_dofs, test_exterior, test_facetdual, test_harness, test_interp,
                  test_mesh, test_proxy3d, test_spaces, test_targets)

def feec_test_suite():
    loader = unittest.TestLoader()
    suite = unittest.TestSuite()

    suite.addTests(loader.loadTestsFromModule(test_mesh))
    suite.addTests(loader.loadTestsFromModule(test_exterior))
    suite.addTests(loader.loadTestsFromModule(test_spaces))
    suite.addTests(loader.loadTestsFromModule(test_dofs))
    suite.addTests(loader.loadTestsFromModule(test_biorth))
    suite.addTests(loader.loadTestsFromModule(test_facetdual))
    suite.addTests(loader.loadTestsFromModule(test_interp))
    suite.addTests(loader.loadTestsFromModule(test_targets))
    suite.addTests(loader.loadTestsFromModule(test_proxy3d))
    suite.addTests(loader.loadTestsFromModule(test_harness))

    return suite


if __name__ == '__main__':
    unittest.main()

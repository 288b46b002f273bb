#!/usr/bin/env python3

from setuptools import setup

MAJOR = 0
MINOR = 1
TINY  = 0
version='%d.%d.%d' % (MAJOR, MINOR, TINY)


setup(name='feec-interp',
      version=version,
      description='Biorthogonal bases and quasi-interpolants for finite element differential forms',
      include_package_data=True,
      py_modules=['mesh', 'spaces', 'dofs', 'biorth', 'facetdual', 'proxy3d', 'targets', 'verify',
                  'harness'],
      packages=['exterior', 'interp', 'test'],
      python_requires='>=3.8',
      install_requires=['numpy', 'scipy', 'attrs>=22.2', 'hypothesis'],
      entry_points={'console_scripts': ['interp=harness:main']},
      test_suite='test.feec_test_suite'
      )

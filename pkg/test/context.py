import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import numpy as np
from scipy.linalg import norm

from hypothesis import given, settings, strategies as st

from mesh import *
from exterior import *
from exterior import polynomial as poly
from exterior.quadrature import ball_rule, simplex_rule, unit_ball_volume
from spaces import *
from dofs import *
from biorth import *
from facetdual import *
from interp import *
from targets import *
from proxy3d import *
import harness
import verify

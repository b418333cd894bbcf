"""The 3x2 rank-1 instance with a barrier between the start and the solution.

Observed::

    [ ?  2 ]
    [ 2  ? ]
    [ 2  1 ]

Every ``u`` with ``u_2 = -u_3`` has first-column misfit 8, which blocks plain
descent started from ``U0``.
"""

import numpy as np

from .core import ObservedMatrix

U_TRUE = np.array([2.0, 1.0, 1.0]) / np.sqrt(6.0)
U0 = np.array([-10.0, 1.0, 1.0]) / np.sqrt(102.0)
F_U0 = 144.0 / 101.0
CONTOUR_VALUE = 8.0


def example_matrix():
    return ObservedMatrix(3, 2, rows=[1, 2, 0, 2], cols=[0, 0, 1, 1],
                          values=[2.0, 2.0, 2.0, 1.0])

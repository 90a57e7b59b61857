"""Shared builders for the test suite."""

import numpy as np

from corruptlab.kernels import Dist, Kernel, Space


def binary_noise(sigma):
    """Symmetric binary label noise as an explicit kernel."""
    space = Space(["-1", "+1"])
    return Kernel(space, space, [[1 - sigma, sigma], [sigma, 1 - sigma]])


def asym_noise(s_neg, s_pos):
    space = Space(["-1", "+1"])
    return Kernel(space, space, [[1 - s_neg, s_pos], [s_neg, 1 - s_pos]])


def constant_kernel(domain, column):
    to = Space([f"y{i}" for i in range(len(column))])
    matrix = np.tile(np.asarray(column, dtype=float)[:, None], (1, len(domain)))
    return Kernel(domain, to, matrix)


def random_kernel(rng, m, k):
    """Columns drawn from a flat Dirichlet, full support, seeded."""
    return Kernel(
        Space([f"x{i}" for i in range(m)]),
        Space([f"y{i}" for i in range(k)]),
        rng.dirichlet(np.ones(k), size=m).T,
    )


def random_dist(rng, space):
    return Dist(space, rng.dirichlet(np.ones(len(space))))

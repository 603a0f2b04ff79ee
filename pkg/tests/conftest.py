"""Shared fixtures.

The kernel warmup runs once per session so numba compilation (or cache
loading) never counts against timing-sensitive tests.
"""

import numpy as np
import pytest

from multibeam_noma import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    gains = np.array([1.0 + 0.5j, 0.2 - 0.1j])
    aods = np.array([1.0, 2.0])
    aoas = np.array([0.9, 2.1])
    row = _kernels.vhh_row(gains, aods, aoas, 2, 4)
    _kernels.segment_gains(row, np.array([0.3, -0.2]), np.array([0, 2], dtype=np.int64),
                           np.array([2, 2], dtype=np.int64), 4)
    _kernels.two_segment_sweep(row, 0.3, -0.2, np.array([1, 2], dtype=np.int64), 4)
    _kernels.pattern_mags(np.ones(4, dtype=np.complex128) / 2.0, np.array([0.1, 0.5]))
    yield

"""helpers shared by the test modules"""

import functools
import shutil
import tempfile
from os.path import join

import numpy as np

from qhmr.channels import from_kraus
from qhmr.generators import PAULI, random_hermitian, random_kraus
from qhmr.linalg import random_density

X, Y, Z, I2 = PAULI["x"], PAULI["y"], PAULI["z"], PAULI["0"]


def rng(seed=0):
    return np.random.default_rng(seed)


def random_channel(n, n_kraus=2, seed=0, n_out=None):
    return from_kraus(random_kraus(n, n if n_out is None else n_out, n_kraus, rng(seed)))


def random_states(n, count, seed=0):
    gen = rng(seed)
    return [random_density(n, gen) for _ in range(count)]


def random_ops(n, count, seed=0):
    gen = rng(seed)
    return [random_hermitian(n, gen) for _ in range(count)]


class WorkDir(object):
    """Temporary directory for files written by a test"""

    def __init__(self):
        self._path = tempfile.mkdtemp()

    @property
    def path(self):
        return self._path

    def join(self, name):
        return join(self._path, name)

    def destroy(self):
        shutil.rmtree(self._path)


def work_dir_test(func):
    """decorator for a test that needs a WorkDir, passed as last argument"""
    @functools.wraps(func)
    def wrapper(*func_args, **func_kwargs):
        work_dir = WorkDir()
        func_args += (work_dir,)
        try:
            func(*func_args, **func_kwargs)
        finally:
            work_dir.destroy()
    return wrapper

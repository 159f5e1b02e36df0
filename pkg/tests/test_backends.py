"""Compiled kernel vs pure-Python fallback: identical results, same API."""

import subprocess
import sys

import pytest

from conftest import rand_instance
from ujssp import _backend, _kernels_py, instances

try:
    from ujssp import _kernels
    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False


def _arrays(inst):
    pos = inst.canonical_positions()
    ids = sorted(pos, key=pos.get)
    pi = [inst.job(j).pi for j in ids]
    r = [float(inst.job(j).reward) for j in ids]
    c = [float(inst.job(j).cost) for j in ids]
    return pi, r, c


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled extension not built")
class TestKernelParity:
    def test_stepwise_bit_identical(self):
        for k in range(100):
            inst = rand_instance(seed=4000 + k, n=3 + k % 13,
                                 scheme=list(instances.Scheme)[k % 4])
            pi, r, c = _arrays(inst)
            for backward in (False, True):
                for speedups in (False, True):
                    a = _kernels.stepwise_f64(pi, r, c, backward, speedups, None)
                    b = _kernels_py.stepwise_f64(pi, r, c, backward, speedups, None)
                    assert list(a[0]) == list(b[0])
                    assert a[1] == b[1]
                    assert a[2] == b[2]

    def test_dp_bit_identical(self):
        for k in range(60):
            inst = rand_instance(seed=4200 + k, n=3 + k % 13)
            pi, r, c = _arrays(inst)
            ci = [int(x) for x in c]
            a = _kernels.dp_f64(pi, r, ci, None)
            b = _kernels_py.dp_f64(pi, r, ci, None)
            assert a[0] == b[0]
            assert list(a[1]) == list(b[1])
            assert a[2] == b[2]


class TestSelection:
    def test_env_var_forces_python_backend(self):
        out = subprocess.run(
            [sys.executable, "-c", "import ujssp; print(ujssp.BACKEND)"],
            env={"PATH": "/usr/bin:/bin", "UJSSP_BACKEND": "python"},
            capture_output=True, text=True)
        assert out.stdout.strip() == "python"

    def test_active_backend_reported(self):
        assert _backend.BACKEND in ("compiled", "python")
        assert hasattr(_backend.impl(), "stepwise_f64")
        assert hasattr(_backend.impl(), "dp_f64")

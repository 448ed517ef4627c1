import os
import subprocess
import sys

import numpy as np
import pytest

from degen_control import kernels


def _duhamel_ref(lam, f, h):
    t = np.arange(f.size) * h
    tau = t[-1]
    w = np.full(f.size, h)
    w[0] = w[-1] = 0.5 * h
    return np.array([np.sum(w * f * np.exp(-l * (tau - t))) for l in lam])


def test_available_contains_python():
    assert "python" in kernels.available()
    assert kernels.BACKEND in kernels.available()
    with pytest.raises(ValueError):
        kernels.get("fortran")


@pytest.mark.parametrize("name", kernels.available())
def test_duhamel_final_matches_direct_sum(name):
    impl = kernels.get(name)
    rng = np.random.default_rng(1)
    f = rng.standard_normal(513)
    lam = np.array([0.0, 1.0, 5.78, 30.5, 200.0])
    np.testing.assert_allclose(impl.duhamel_final(lam, f, 1.0 / 512), _duhamel_ref(lam, f, 1.0 / 512),
                               rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("name", kernels.available())
def test_duhamel_path_last_column(name):
    impl = kernels.get(name)
    f = np.sin(np.linspace(0.0, 3.0, 257))
    lam = np.array([0.3, 14.7, 49.2])
    path = impl.duhamel_path(lam, f, 1.0 / 256)
    assert path.shape == (3, 257)
    assert np.all(path[:, 0] == 0.0)
    np.testing.assert_allclose(path[:, -1], impl.duhamel_final(lam, f, 1.0 / 256), rtol=1e-12, atol=1e-15)


def test_backends_duhamel_agree():
    if len(kernels.available()) < 2:
        pytest.skip("compiled extension not built")
    c, p = kernels.get("cython"), kernels.get("python")
    rng = np.random.default_rng(2)
    f = rng.standard_normal(1025)
    lam = np.linspace(0.1, 400.0, 9)
    np.testing.assert_allclose(c.duhamel_path(lam, f, 1e-3), p.duhamel_path(lam, f, 1e-3), rtol=1e-13, atol=1e-16)


def test_env_var_forces_fallback():
    env = dict(os.environ, DEGEN_CONTROL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from degen_control import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"

import numpy as np
import pytest

from mtpgd import kernels

pytestmark = pytest.mark.skipif(kernels.numba is None, reason="numba not installed")

LAME = (121153.84615384616, 80769.23076923077, 2000.0, 205.0)


@pytest.fixture
def history(rng):
    eps = np.cumsum(rng.normal(0, 5e-4, (64, 4, 80)), axis=2)
    eps[:, :, 0] = 0.0
    return eps


def test_sweep_backends_agree(history):
    a = kernels.sweep_numpy(history, *LAME)
    b = kernels.sweep_numba(history, *LAME)
    for x, y in zip(a, b):
        assert np.allclose(x, y, rtol=1e-14, atol=1e-16)


def test_return_map_backends_agree(rng):
    eps = rng.normal(0, 3e-3, (500, 4))
    ep = rng.normal(0, 1e-3, (500, 4))
    eb = rng.uniform(0, 0.01, 500)
    a = kernels.return_map_numpy(eps, ep, eb, *LAME)
    b = kernels.return_map_numba(eps, ep, eb, *LAME)
    for x, y in zip(a, b):
        assert np.allclose(x, y, rtol=1e-14, atol=1e-16)


def test_sweep_without_stress(history):
    _, _, sig = kernels.sweep_numba(history, *LAME, store_stress=False)
    assert sig is None
    assert kernels.sweep_numpy(history, *LAME, store_stress=False)[2] is None


def test_backend_flag():
    assert kernels.BACKEND in ("numba", "numpy")
    assert (kernels.sweep is kernels.sweep_numba) == kernels.USE_NUMBA


def test_env_flag_selects_numpy():
    import os
    import subprocess
    import sys
    env = dict(os.environ, MTPGD_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from mtpgd import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"

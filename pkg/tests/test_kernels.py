import numpy as np
import pytest

from dtqw_lab import kernels

from conftest import random_amplitudes

compiled = kernels.compiled_backend()
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")


@needs_compiled
@pytest.mark.parametrize("ct", [False, True])
@pytest.mark.parametrize("with_phase", [False, True])
def test_walk_backends_agree(ct, with_phase):
    rng = np.random.default_rng(3)
    amps = random_amplitudes(rng, 64)
    coin = np.array([0.3 + 0.1j, 0.5j, -0.2, 0.7 - 0.4j])
    phase = np.exp(1j * rng.uniform(-3, 3, 64)) if with_phase else None
    a = compiled.walk_steps(amps[:, 0].copy(), amps[:, 1].copy(), coin, phase, 17, ct)
    b = kernels.python_backend.walk_steps(amps[:, 0].copy(), amps[:, 1].copy(), coin, phase, 17, ct)
    assert np.max(np.abs(a[0] - b[0])) < 1e-13
    assert np.max(np.abs(a[1] - b[1])) < 1e-13


@needs_compiled
def test_dirac_backends_agree():
    rng = np.random.default_rng(4)
    amps = random_amplitudes(rng, 40)
    a = compiled.dirac_steps(amps[:, 0].copy(), amps[:, 1].copy(), 0.9, 0.43, 25)
    b = kernels.python_backend.dirac_steps(amps[:, 0].copy(), amps[:, 1].copy(), 0.9, 0.43, 25)
    assert np.max(np.abs(np.asarray(a) - np.asarray(b))) < 1e-13


def test_inputs_not_modified():
    up = np.array([1, 0, 0, 0], dtype=complex)
    down = np.zeros(4, dtype=complex)
    kernels.walk_steps(up, down, np.array([0, 1, 1, 0], dtype=complex), None, 3, False)
    assert up[0] == 1 and not down.any()


def test_pure_backend_forced_by_environment():
    import os
    import subprocess
    import sys

    env = dict(os.environ, DTQW_LAB_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", "import dtqw_lab; print(dtqw_lab.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"

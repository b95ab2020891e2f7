import logging

import numpy as np
import pytest

from tensorpca import config
from tensorpca.model import generate
from tensorpca.tensor_core import Tensor3


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Fresh settings per test; logs go to the test's tmp dir."""
    monkeypatch.setenv("TPCA_LOG_DIR", str(tmp_path / "logs"))
    for name in ("TPCA_MAX_N", "TPCA_MEMORY_BUDGET", "TPCA_PLUGINS_DIR"):
        monkeypatch.delenv(name, raising=False)
    config.reset()
    root = logging.getLogger()
    level = root.level
    yield
    # drop the handlers configure_logging installed; pytest manages its own
    for h in [h for h in root.handlers if type(h) in (logging.StreamHandler, logging.FileHandler)]:
        root.removeHandler(h)
        h.close()
    root.setLevel(level)
    config.reset()


@pytest.fixture
def random_tensor():
    def make(n: int, seed: int = 0) -> Tensor3:
        return Tensor3(np.random.default_rng(seed).standard_normal((n, n, n)))
    return make


@pytest.fixture
def strong_instance():
    """n=16 with tau = 8 n^(3/4): every reasonable method recovers v."""
    return generate(16, 8 * 16 ** 0.75, 1.0, seed=7)

import numpy as np
import pytest


@pytest.fixture(autouse=True)
def _isolated_table_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("SEEDLESS_DI_CACHE", str(tmp_path / "table-cache"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240812)

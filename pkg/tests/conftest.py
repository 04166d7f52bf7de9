import os

import pytest


@pytest.fixture(autouse=True, scope="session")
def _stage_cache(tmp_path_factory):
    # keep stage-set cache files out of the home directory during tests
    old = os.environ.get("MLFIR_CACHE_DIR")
    os.environ["MLFIR_CACHE_DIR"] = str(tmp_path_factory.mktemp("stage-cache"))
    yield
    if old is None:
        os.environ.pop("MLFIR_CACHE_DIR", None)
    else:
        os.environ["MLFIR_CACHE_DIR"] = old

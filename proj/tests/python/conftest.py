import os
import shutil

import pytest


@pytest.fixture(scope="session")
def ris_bin():
    path = os.environ.get("RIS_BIN") or shutil.which("ris")
    if not path:
        pytest.skip("ris executable not available (set RIS_BIN)")
    return path

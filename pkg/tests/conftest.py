import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fixture_repo import build_fixture


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory) -> Path:
    return build_fixture(tmp_path_factory.mktemp("miniproj"))

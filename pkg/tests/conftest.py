import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cpch2.cli import build_family  # noqa: E402
from cpch2.hypersurfaces import measure  # noqa: E402


@pytest.fixture(scope="session")
def measured():
    """Memoized (patch, principal data) per family name and radius."""
    cache = {}

    def get(name, radius=None):
        key = (name, radius)
        if key not in cache:
            patch, _, _ = build_family(name, radius)
            data, mats = measure(patch)
            cache[key] = (patch, data, mats)
        return cache[key]

    return get

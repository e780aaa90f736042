import pytest

from sideband import presets


@pytest.fixture
def mz_phase_text():
    return presets.load("mz_phase")


@pytest.fixture
def preset_path(tmp_path):
    """Write a bundled preset to disk and return its path."""
    def _write(name: str):
        path = tmp_path / f"{name}.net"
        path.write_text(presets.load(name))
        return str(path)
    return _write

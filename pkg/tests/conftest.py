import numpy as np
import pytest

from risnoma.channel import ChannelSet
from risnoma.config import NetworkConfig


@pytest.fixture
def cfg():
    return NetworkConfig()


def make_channels(f, g=None, h=None):
    """ChannelSet from direct gains and optional RIS links (B=1, N=1 by default)."""
    f = np.asarray(f, dtype=complex)
    U = len(f)
    g = np.zeros((1, 1), complex) if g is None else np.asarray(g, dtype=complex)
    h = np.zeros((U,) + g.shape, complex) if h is None else np.asarray(h, dtype=complex)
    return ChannelSet(h=h, g=g, f=f)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")

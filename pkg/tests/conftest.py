import numpy as np
import pytest

from qrecog.hilbert import dumps_state, embed
from qrecog.image_space import RawImage, random_unit_vector, write_pgm


@pytest.fixture
def random_pgms(tmp_path):
    """Factory writing ``count`` random 8x8 PGM files; returns their paths."""

    def make(count=8, size=8, seed=0, binary=False):
        rng = np.random.default_rng(seed)
        paths = []
        for i in range(count):
            px = rng.integers(0, 256, size * size)
            p = tmp_path / f"img{i}.pgm"
            p.write_bytes(write_pgm(RawImage(size, size, 255, px), binary=binary))
            paths.append(str(p))
        return paths

    return make


@pytest.fixture
def random_state_file(tmp_path):
    def make(dim, seed, name="probe.json"):
        p = tmp_path / name
        p.write_text(dumps_state(embed(random_unit_vector(dim, seed))))
        return str(p)

    return make


# -- acceptance reporting ----------------------------------------------------

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's outcome for the terminal summary.

    Usage: ``criterion("C1 max projection", ok, detail)``; ``ok`` must also be
    asserted by the test itself.
    """

    def record(name: str, ok: bool, detail: str = ""):
        _ACCEPTANCE.append((name, bool(ok), detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")

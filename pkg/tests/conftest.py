import functools
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from detgeom.channels import Alphabet, AwgnChannel, DiscreteChannel, LaplaceChannel, example_discrete_channel  # noqa: E402

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


class PlaneMonitor:
    """Largest |coordinate sum| over every embedding built while the tests run."""

    producers = [
        ("detgeom.geometry", "embed_log_posterior"),
        ("detgeom.geometry", "embed_symbol"),
        ("detgeom.geometry", "symbol_matrix"),
        ("detgeom.sequence", "embed_codeword"),
        ("detgeom.sequence", "embed_sequence"),
        ("detgeom.sequence", "aggregate_repetition"),
    ]

    def __init__(self):
        self.worst = 0.0
        self.count = 0
        self.calls = {name: 0 for _, name in self.producers}

    def observe(self, name, out):
        arr = np.asarray(out, dtype=float)
        if arr.size:
            self.worst = max(self.worst, float(np.max(np.abs(arr.sum(axis=-1)))))
            self.count += arr.size // arr.shape[-1]
        self.calls[name] += 1

    def install(self):
        """Wrap each producer everywhere it has been imported by name."""
        import detgeom.cli  # noqa: F401  make sure every module is loaded

        for module_name, name in self.producers:
            original = getattr(sys.modules[module_name], name)

            def wrapper(*args, _original=original, _name=name, **kwargs):
                out = _original(*args, **kwargs)
                self.observe(_name, out)
                return out

            functools.update_wrapper(wrapper, original)
            for mod_name, mod in list(sys.modules.items()):
                if mod_name.startswith("detgeom") and getattr(mod, name, None) is original:
                    setattr(mod, name, wrapper)


PLANE_MONITOR = PlaneMonitor()
PLANE_MONITOR.install()


def pytest_collection_modifyitems(items):
    # the acceptance run reads the plane monitor, so it goes after everything else
    items.sort(key=lambda item: item.fspath.basename == "test_acceptance.py")


@pytest.fixture
def acceptance():
    """Record the outcome of an acceptance criterion for the summary."""

    def record(number, title, ok):
        _ACCEPTANCE[number] = (title, "PASS" if ok else "FAIL")
        assert ok, f"acceptance criterion {number} failed: {title}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] criterion {number:2d}: {title}")


@pytest.fixture
def table_channel():
    return example_discrete_channel()


@pytest.fixture
def awgn():
    return AwgnChannel([0, 1, -1], 1.0)


@pytest.fixture
def laplace():
    return LaplaceChannel([0, 1, -1], 1.0)


def random_discrete(rng, n=3, k=5):
    t = rng.dirichlet(np.ones(k), size=n)
    return DiscreteChannel(Alphabet(tuple(f"x{i + 1}" for i in range(n))), tuple(f"o{j}" for j in range(k)), t)


def channel_families():
    """One representative of each channel family, with ready-made observation samplers."""
    return {
        "discrete": (example_discrete_channel(), lambda rng, size: list(rng.choice(list("abcdef"), size=size))),
        "awgn": (AwgnChannel([0, 1, -1], 1.0), lambda rng, size: list(rng.uniform(-3, 3, size))),
        "laplace": (LaplaceChannel([0, 1, -1], 1.0), lambda rng, size: list(rng.uniform(-3, 3, size))),
    }

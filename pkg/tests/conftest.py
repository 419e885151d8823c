import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from osrbac.audit import DecisionLog
from osrbac.engine import AdfEngine
from osrbac.sim import Simulator, bootstrap_default_state

GOLDEN_DIR = Path(__file__).parent / "golden"
TRACE_DIR = Path(__file__).parent.parent / "traces"


@pytest.fixture
def boot_store():
    return bootstrap_default_state()


@pytest.fixture
def boot_engine(boot_store):
    return AdfEngine(boot_store, log=DecisionLog())


@pytest.fixture
def boot_sim(boot_store, boot_engine):
    return Simulator(boot_store, boot_engine)


def golden(name: str) -> str:
    return (GOLDEN_DIR / name).read_text("utf-8")


def boot_trace_text() -> str:
    return (TRACE_DIR / "boot.trace").read_text("utf-8")

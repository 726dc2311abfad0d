import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from psplit.solver import SolverOptions  # noqa: E402


@pytest.fixture
def tight():
    """Options for value comparisons well inside 1e-6."""
    return SolverOptions(gap_tol=1e-9, oa_tol=1e-9, int_tol=1e-9)

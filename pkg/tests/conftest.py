import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rtsfilter.refmodel import ReferenceModel  # noqa: E402
from rtsfilter.synth import generate_synthetic  # noqa: E402


@pytest.fixture
def model_ab():
    """counts {a:2, b:1}: p(a)=2/3, p(b)=1/3, unseen 1/6."""
    return ReferenceModel.from_counts({"a": 2, "b": 1})


@pytest.fixture(scope="session")
def planted():
    return generate_synthetic(5, 4, 3, 200, seed=42)

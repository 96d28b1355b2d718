import sys
from pathlib import Path
sys.path.append(str(Path(__file__).parent.parent))

import numpy as np
import pytest

from utils.beamsplitter import BSAngle


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def balanced():
    return BSAngle.from_transmittance(0.5)

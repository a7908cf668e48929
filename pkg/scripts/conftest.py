import os
import sys
from pathlib import Path

script_path = Path(__file__).resolve()
project_root = script_path.parent.parent

if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import hypothesis
import numpy as np
import pytest

from backend.services.config_manager import ConfigManager
from physics_models.units import PhysicalSetup

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=25, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=300, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))

CONFIG_PATH = project_root / "config" / "config.yaml"


@pytest.fixture
def config(tmp_path) -> ConfigManager:
    """Default configuration writing into a per-test directory"""
    return ConfigManager(CONFIG_PATH).with_overrides({"output.directory": str(tmp_path / "results")})


@pytest.fixture
def setup(config) -> PhysicalSetup:
    return PhysicalSetup.from_config(config)

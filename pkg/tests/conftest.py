from typing import Dict

import pytest

from app.commands.compute import presentation_for
from app.config import Config
from app.instances import InstanceFile, bundled_corpus
from app.module_model import Presentation


@pytest.fixture
def cfg() -> Config:
    return Config()


@pytest.fixture(scope="session")
def corpus() -> Dict[str, InstanceFile]:
    return {inst.label: inst for inst in bundled_corpus()}


@pytest.fixture(scope="session")
def presentations(corpus) -> Dict[str, Presentation]:
    # кольцо разбирается один раз на всю сессию: build_module кэширует по (pres, cap)
    default = Config()
    return {label: presentation_for(inst, default) for label, inst in corpus.items()}


import pytest

from causalsafety import models
from causalsafety.analysis import load_analysis_config
from causalsafety.metrics import TargetEvent


@pytest.fixture(scope="session")
def confounding():
    return models.load_cbn("confounding.cbn.json")


@pytest.fixture(scope="session")
def measure_corr():
    return models.load_cbn("confounding_measure_corr.cbn.json")


@pytest.fixture(scope="session")
def measure_causal():
    return models.load_cbn("confounding_measure_causal.cbn.json")


@pytest.fixture(scope="session")
def perception():
    return models.load_cbn("perception.cbn.json")


@pytest.fixture(scope="session")
def all_bundled(confounding, measure_corr, measure_causal, perception):
    return {
        "confounding.cbn.json": confounding,
        "confounding_measure_corr.cbn.json": measure_corr,
        "confounding_measure_causal.cbn.json": measure_causal,
        "perception.cbn.json": perception,
    }


@pytest.fixture(scope="session")
def perception_tree():
    return models.load_ft()


@pytest.fixture(scope="session")
def analysis_config():
    return load_analysis_config(models.bundled_path("perception-analysis.json"))


@pytest.fixture(scope="session")
def fusion_fn():
    return TargetEvent("Fusion", "FN")

import numpy as np
import pytest

from comixify.features import FeatureMatrix


def make_features(rows) -> FeatureMatrix:
    data = np.asarray(rows, dtype=np.float64)
    return FeatureMatrix(data=data, frame_index_map=list(range(data.shape[0])),
                         extractor_id="test")


@pytest.fixture(scope="session")
def sample_video(tmp_path_factory):
    """A short synthetic clip shared across tests."""
    from comixify.samples import ensure_sample

    return ensure_sample("tiny", tmp_path_factory.mktemp("videos"))


@pytest.fixture(scope="session")
def demo_video(tmp_path_factory):
    from comixify.samples import ensure_sample

    return ensure_sample("demo", tmp_path_factory.mktemp("videos"))

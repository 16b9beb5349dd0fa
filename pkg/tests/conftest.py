import numpy as np
import pytest

from actsum.io import load_dataset
from actsum.synthetic import SyntheticSpec, gen_synthetic

TINY_SPEC = SyntheticSpec(n_videos=8, frames_range=(40, 70), dim=10, n_key_segments=2)


@pytest.fixture(scope="session")
def tiny_corpus_dir(tmp_path_factory):
    """Small deterministic corpus shared by io/training/cli tests."""
    out = tmp_path_factory.mktemp("tiny_corpus")
    gen_synthetic(TINY_SPEC, seed=11, out_dir=out)
    return out


@pytest.fixture(scope="session")
def tiny_dataset(tiny_corpus_dir):
    return load_dataset(tiny_corpus_dir)


def random_psd(rng, n, jitter=1e-6):
    a = rng.normal(size=(n, n))
    return a @ a.T + jitter * np.eye(n)

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from actsum.estimator import ActionnessSummarizer

FAST = dict(max_epochs=2, patience=5, hidden_units=6, phi_dim=6, head_hidden=6)


class TestEstimatorApi:
    def test_get_set_params_roundtrip(self):
        est = ActionnessSummarizer(lam=0.01, seed=3)
        params = est.get_params()
        assert params["lam"] == 0.01
        assert params["seed"] == 3
        est.set_params(budget=0.2)
        assert est.get_params()["budget"] == 0.2

    def test_clone_preserves_params(self):
        est = ActionnessSummarizer(lam=0.05, patience=2, hidden_units=12)
        cloned = clone(est)
        assert cloned.get_params() == est.get_params()
        assert cloned is not est

    def test_predict_before_fit_raises(self):
        est = ActionnessSummarizer()
        with pytest.raises(NotFittedError):
            est.predict(np.zeros((10, 4)))

    def test_fit_requires_data(self):
        with pytest.raises(ValueError):
            ActionnessSummarizer(**FAST).fit([])


class TestEstimatorBehavior:
    def test_fit_predict_score(self, tiny_dataset):
        est = ActionnessSummarizer(seed=1, **FAST).fit(tiny_dataset)
        assert hasattr(est, "model_") and hasattr(est, "history_")
        video = tiny_dataset[0]
        mask = est.predict(video.features, video.segments)
        n = video.features.shape[0]
        assert mask.selected.sum() <= int(0.15 * n)
        score = est.score(tiny_dataset[:3])
        assert 0.0 <= score <= 1.0

    def test_predict_without_segments_uses_kts(self, tiny_dataset):
        est = ActionnessSummarizer(seed=1, **FAST).fit(tiny_dataset)
        video = tiny_dataset[1]
        mask = est.predict(video.features)
        assert mask.shots.n_frames == video.features.shape[0]
        # selection stays a union of whole derived shots
        for s, e in mask.shots:
            block = mask.selected[s:e]
            assert block.all() or not block.any()

    def test_same_seed_same_model(self, tiny_dataset):
        a = ActionnessSummarizer(seed=4, **FAST).fit(tiny_dataset)
        b = ActionnessSummarizer(seed=4, **FAST).fit(tiny_dataset)
        assert np.array_equal(a.model_.flatten(), b.model_.flatten())

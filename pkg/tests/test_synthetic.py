import numpy as np
import pytest

from actsum.errors import InvalidSpec
from actsum.io import load_dataset
from actsum.segmentation import kts_segment
from actsum.synthetic import SCALE_SHARES, SyntheticSpec, gen_synthetic


def corpus_bytes(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


class TestSpecValidation:
    def test_defaults_are_valid(self):
        SyntheticSpec().validate()

    def test_rejects_bad_parameters(self):
        with pytest.raises(InvalidSpec):
            SyntheticSpec(dim=1).validate()
        with pytest.raises(InvalidSpec):
            SyntheticSpec(frames_range=(30, 100)).validate()
        with pytest.raises(InvalidSpec):
            SyntheticSpec(frames_range=(100, 3000)).validate()
        with pytest.raises(InvalidSpec):
            SyntheticSpec(n_videos=0).validate()
        with pytest.raises(InvalidSpec):
            SyntheticSpec(noise_level=-0.1).validate()


class TestGeneratedCorpus:
    def test_same_seed_byte_identical(self, tmp_path):
        spec = SyntheticSpec(n_videos=4, frames_range=(40, 60), dim=8)
        gen_synthetic(spec, 5, tmp_path / "a")
        gen_synthetic(spec, 5, tmp_path / "b")
        assert corpus_bytes(tmp_path / "a") == corpus_bytes(tmp_path / "b")

    def test_different_seed_differs(self, tmp_path):
        spec = SyntheticSpec(n_videos=2, frames_range=(40, 60), dim=8)
        gen_synthetic(spec, 1, tmp_path / "a")
        gen_synthetic(spec, 2, tmp_path / "b")
        assert corpus_bytes(tmp_path / "a") != corpus_bytes(tmp_path / "b")

    def test_zero_noise_video_recovers_planted_boundaries(self, tmp_path):
        spec = SyntheticSpec(n_videos=3, frames_range=(50, 80), dim=12, noise_level=0.0)
        gen_synthetic(spec, 9, tmp_path / "c")
        # small positive penalty: cost roundoff (~1e-15) must not pay for
        # extra segments, while true merges cost far more than the penalty
        for video in load_dataset(tmp_path / "c"):
            segs = kts_segment(
                video.features,
                max_segments=len(video.segments) + 3,
                penalty=0.1,
            )
            assert segs.pairs() == video.segments.pairs()

    def test_rank_distribution_near_targets(self, tmp_path):
        import json

        spec = SyntheticSpec(n_videos=20)
        gen_synthetic(spec, 3, tmp_path / "d")
        manifest = json.loads((tmp_path / "d" / "manifest.json").read_text())
        dataset = load_dataset(tmp_path / "d")
        counts = np.zeros(4)
        for video in dataset:
            planted = np.asarray(manifest["planted_ranks"][video.video_id])
            lengths = video.segments.lengths
            for scale in range(4):
                counts[scale] += lengths[planted == scale].sum()
        dist = counts / counts.sum()
        assert np.all(np.abs(dist - np.asarray(SCALE_SHARES)) <= 0.05)

    def test_summaries_are_mostly_scale_three(self, tmp_path):
        import json

        spec = SyntheticSpec(n_videos=20)
        gen_synthetic(spec, 4, tmp_path / "e")
        manifest = json.loads((tmp_path / "e" / "manifest.json").read_text())
        high = total = 0
        for video in load_dataset(tmp_path / "e"):
            planted = np.asarray(manifest["planted_ranks"][video.video_id])
            frame_ranks = video.segments.expand(planted)
            for user in video.users:
                picked = frame_ranks[user.summary]
                high += int((picked == 3).sum())
                total += picked.size
        assert high / total >= 0.6

    def test_every_user_summary_nonempty(self, tiny_dataset):
        for video in tiny_dataset:
            for user in video.users:
                assert user.summary.any()

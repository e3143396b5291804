import json
import warnings

import numpy as np
import pytest

from copulasim import harness
from copulasim.copula import csim_score
from copulasim.distort import add_gaussian_noise, gaussian_blur
from copulasim.errors import (
    DimensionMismatch,
    EmptyRecords,
    EmptySequence,
    InsufficientData,
    LayoutNotRecognized,
)
from copulasim.harness import (
    MetricRecord,
    MetricSuite,
    aggregate_by_distortion,
    correlation_matrix,
    dataset_eval,
    find_csiq_pairs,
    make_mini_csiq,
    normalize_metrics,
    read_records_csv,
    sweep_eval,
    textured_image,
    video_eval,
    write_records_csv,
    write_records_json,
)
from copulasim.image import save_image


def test_normalize_metrics():
    assert normalize_metrics("ssim,csim") == ("CSIM", "SSIM")
    assert normalize_metrics(["all"]) == harness.METRICS
    with pytest.raises(ValueError):
        normalize_metrics("psnr")
    with pytest.raises(ValueError):
        normalize_metrics("")


def test_suite_evaluate_order(texture):
    res = MetricSuite(("ISSM", "CSIM")).evaluate(texture, texture)
    assert list(res) == ["CSIM", "ISSM"]
    assert res["CSIM"][0] == 1.0


def test_sweep_cardinality_and_labels(texture):
    recs = sweep_eval(texture, [0, 1, 2], [0, 5], metrics=("CSIM", "SSIM"), seed=1)
    # (3 blur + 2 noise + 3*2 grid) jobs x 2 metrics
    assert len(recs) == 22
    dists = {r.distortion for r in recs}
    assert dists == {"blur", "noise", "noise+blur@0", "noise+blur@1", "noise+blur@2"}
    assert recs == sorted(recs, key=MetricRecord.sort_key)


def test_sweep_values_match_direct_calls(texture):
    recs = sweep_eval(texture, [1.5], [10], noise_mean=5, metrics=("CSIM",), seed=7)
    by = {(r.distortion, r.level): r.score for r in recs}
    noisy = add_gaussian_noise(texture, 5, 10, 7)
    assert by[("noise", 10)] == csim_score(texture, noisy)
    assert by[("blur", 1.5)] == csim_score(texture, gaussian_blur(texture, 1.5))
    assert by[("noise+blur@1.5", 10)] == csim_score(texture, gaussian_blur(noisy, 1.5))


def test_sweep_workers_and_seed_determinism(texture):
    a = sweep_eval(texture, [0, 2], [0, 10], metrics=("CSIM", "SSIM"), seed=3)
    b = sweep_eval(texture, [0, 2], [0, 10], metrics=("CSIM", "SSIM"), seed=3, workers=4)
    assert [(r.sort_key(), r.score) for r in a] == [(r.sort_key(), r.score) for r in b]


def test_sweep_partial_cover_warns():
    img = textured_image(20, 20, 3, seed=0)
    with pytest.warns(UserWarning):
        sweep_eval(img, [0], [0], metrics=("CSIM",))


def test_sweep_empty_levels(texture):
    with pytest.raises(ValueError):
        sweep_eval(texture, [], [0])


# --- video ---

def _frames(n=4):
    base = textured_image(32, 48, 3, seed=9).pixels
    return [np.roll(base, k, axis=1) for k in range(n)]


def test_video_first_frame_is_reference():
    series = video_eval(_frames(), metrics=("CSIM", "SSIM"))
    assert series.frame_index == [0, 1, 2, 3]
    assert series.scores["CSIM"][0] == 1.0
    assert series.scores["SSIM"][0] == pytest.approx(1.0)
    assert np.all(series.scores["CSIM"][1:] < 1.0)
    assert len(series.to_records("clip")) == 8


def test_video_from_directory(tmp_path):
    frames = _frames(3)
    for i, f in enumerate(frames):
        save_image(f, tmp_path / f"frame_{i * 5}.png")
    series = video_eval(tmp_path, metrics=("CSIM",))
    direct = video_eval([frames[0], frames[1], frames[2]], metrics=("CSIM",))
    np.testing.assert_array_equal(series.scores["CSIM"], direct.scores["CSIM"])


def test_video_resize():
    series = video_eval(_frames(2), metrics=("CSIM",), resize_to=(24, 16))
    assert series.resize == (24, 16)
    assert harness.resize_bilinear(_frames(1)[0], (24, 16)).shape == (16, 24, 3)


def test_video_errors():
    with pytest.raises(EmptySequence):
        video_eval(_frames(1))
    with pytest.raises(DimensionMismatch):
        video_eval([np.zeros((16, 16, 3), np.uint8), np.zeros((16, 8, 3), np.uint8)])


# --- dataset ---

@pytest.fixture
def mini(tmp_path):
    return make_mini_csiq(tmp_path / "csiq", n_originals=3, seed=2)


def test_find_pairs(mini):
    with pytest.warns(UserWarning, match="not found"):
        pairs = find_csiq_pairs(mini)
    assert len(pairs) == 12
    assert pairs[0][:3] == ("img00", "awgn", 1.0)


def test_dataset_eval_mini(mini):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        recs = dataset_eval(mini, metrics="all")
    assert len(recs) == 48
    assert {r.metric for r in recs} == set(harness.METRICS)
    agg = aggregate_by_distortion(recs)
    assert agg[("CSIM", "awgn")].count == 6
    for m in ("CSIM", "SSIM"):
        for d in ("awgn", "blur"):
            lv1 = np.mean([r.score for r in recs if (r.metric, r.distortion, r.level) == (m, d, 1)])
            lv2 = np.mean([r.score for r in recs if (r.metric, r.distortion, r.level) == (m, d, 2)])
            assert lv2 < lv1


def test_dataset_under_dst_imgs_and_case(tmp_path):
    root = tmp_path / "d"
    make_mini_csiq(root, n_originals=1, distortions=("blur",), levels=(1,))
    (root / "dst_imgs").mkdir()
    (root / "blur").rename(root / "dst_imgs" / "BLUR")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pairs = find_csiq_pairs(root)
    assert [(p[0], p[1], p[2]) for p in pairs] == [("img00", "blur", 1.0)]


def test_dataset_prefix_stems(tmp_path):
    root = tmp_path / "d"
    (root / "src_imgs").mkdir(parents=True)
    (root / "awgn").mkdir()
    img = textured_image(16, 16, 1, seed=0)
    for stem in ("a", "a_b"):
        save_image(img, root / "src_imgs" / f"{stem}.png")
    save_image(img, root / "awgn" / "a_b.AWGN.2.png")
    save_image(img, root / "awgn" / "a.awgn.1.png")
    save_image(img, root / "awgn" / "notes.png")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        pairs = find_csiq_pairs(root)
    assert [(p[0], p[2]) for p in pairs] == [("a", 1.0), ("a_b", 2.0)]
    assert any("notes.png" in str(w.message) for w in caught)


def test_dataset_bad_layout(tmp_path):
    with pytest.raises(LayoutNotRecognized):
        find_csiq_pairs(tmp_path)
    (tmp_path / "src_imgs").mkdir()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(LayoutNotRecognized):
            find_csiq_pairs(tmp_path)


# --- aggregation and correlation ---

def _rec(i, metric, score, dist="awgn", level=1.0):
    return MetricRecord(f"img{i}", dist, level, metric, score)


def test_aggregate():
    recs = [_rec(0, "CSIM", 0.5), _rec(1, "CSIM", 0.7), _rec(0, "CSIM", 0.9, "blur")]
    agg = aggregate_by_distortion(recs)
    assert agg[("CSIM", "awgn")].mean == pytest.approx(0.6)
    assert agg[("CSIM", "blur")].count == 1
    with pytest.raises(EmptyRecords):
        aggregate_by_distortion([])


def test_correlation_matrix():
    xs = [0.1, 0.4, 0.2, 0.9]
    recs = [_rec(i, "CSIM", x) for i, x in enumerate(xs)]
    recs += [_rec(i, "SSIM", 2 * x + 1) for i, x in enumerate(xs)]
    recs += [_rec(i, "FSIM", -x) for i, x in enumerate(xs)]
    corr = correlation_matrix(recs)
    assert corr.metrics == ("CSIM", "SSIM", "FSIM")
    assert corr["CSIM", "SSIM"] == pytest.approx(1.0)
    assert corr["CSIM", "FSIM"] == pytest.approx(-1.0)
    np.testing.assert_allclose(corr.coefficients, corr.coefficients.T)


def test_correlation_constant_column():
    recs = [_rec(i, "CSIM", x) for i, x in enumerate([0.1, 0.5, 0.3])]
    recs += [_rec(i, "SSIM", 1.0) for i in range(3)]
    with pytest.warns(UserWarning, match="constant"):
        corr = correlation_matrix(recs)
    assert corr["CSIM", "SSIM"] == 0.0


def test_correlation_insufficient():
    with pytest.raises(InsufficientData):
        correlation_matrix([_rec(0, "CSIM", 0.1), _rec(0, "SSIM", 0.2)])


# --- output ---

def test_csv_round_trip_and_metadata(tmp_path):
    recs = [_rec(1, "SSIM", 0.25, level=2.5), _rec(0, "CSIM", 1 / 3)]
    meta = harness.metadata_header(seed=4, patch_size=8, config={"x": 1})
    path = tmp_path / "r.csv"
    write_records_csv(path, recs, meta)
    lines = path.read_text().splitlines()
    assert lines[0] == "# tool: copulasim"
    assert "# seed: 4" in lines and "# patch_size: 8" in lines
    assert lines[5] == ",".join(harness.CSV_COLUMNS)
    assert lines[6].startswith("img0,awgn,1,CSIM,0.333333,")
    back = read_records_csv(path)
    assert [(r.image_id, r.level) for r in back] == [("img0", 1.0), ("img1", 2.5)]


def test_config_hash_stable():
    a = harness.config_hash({"b": 1, "a": [1, 2]})
    assert a == harness.config_hash({"a": [1, 2], "b": 1})
    assert a != harness.config_hash({"a": [1, 2], "b": 2})


def test_json_output(tmp_path):
    path = tmp_path / "r.json"
    write_records_json(path, [_rec(0, "CSIM", 0.5)], {"seed": 1})
    doc = json.loads(path.read_text())
    assert doc["metadata"] == {"seed": 1}
    assert doc["records"][0]["score"] == 0.5


def test_sweep_zero_levels_self_similarity():
    img = textured_image(64, 64, 3, seed=4)
    recs = sweep_eval(img, [0], [0], noise_mean=0, metrics=("CSIM", "SSIM", "FSIM"))
    assert len(recs) == 9
    assert all(r.score == pytest.approx(1.0, abs=1e-12) for r in recs)


def test_sweep_three_by_three_grid():
    img = textured_image(128, 128, 3, seed=6)
    recs = sweep_eval(img, [0, 1, 2], [0, 10, 20], metrics=("CSIM",), seed=2)
    grid = [r for r in recs if r.distortion.startswith("noise+blur")]
    assert len(grid) == 9 and len(recs) == 15
    for b in (0, 1, 2):
        col = sorted((r.level, r.score) for r in grid if r.distortion == f"noise+blur@{b}")
        assert all(y[1] <= x[1] for x, y in zip(col, col[1:]))


def test_video_identical_frames():
    f = textured_image(32, 32, 3, seed=1)
    series = video_eval([f] * 4, metrics=("CSIM", "SSIM"))
    assert np.all(series.scores["CSIM"] == 1.0)
    np.testing.assert_allclose(series.scores["SSIM"], 1.0)


def test_aggregate_examples():
    assert aggregate_by_distortion([_rec(0, "CSIM", 0.7)])[("CSIM", "awgn")].mean == 0.7
    cell = aggregate_by_distortion([_rec(0, "CSIM", 0.2), _rec(1, "CSIM", 0.4)])[("CSIM", "awgn")]
    assert cell.mean == pytest.approx(0.3) and cell.count == 2


def test_correlation_diagonal():
    recs = [_rec(i, m, s) for i, (a, b) in enumerate([(0.1, 0.3), (0.5, 0.2), (0.9, 0.8)])
            for m, s in (("CSIM", a), ("SSIM", b))]
    corr = correlation_matrix(recs)
    assert corr["CSIM", "CSIM"] == 1.0 and corr["SSIM", "SSIM"] == 1.0

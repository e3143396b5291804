import math

import numpy as np
import pytest

from copulasim.distort import (
    DistortionSpec,
    add_gaussian_noise,
    adjust_contrast,
    gaussian_blur,
    gaussian_kernel,
    motion_blur,
    regional_distort,
    shutter_blur,
)
from copulasim.errors import InvalidKernel, RectOutOfBounds
from copulasim.image import Image

from conftest import random_image


def test_noise_moments():
    img = np.full((256, 256, 1), 128, np.uint8)
    out = add_gaussian_noise(img, mean=5, sigma=10, seed=3).pixels.astype(float) - 128
    assert out.mean() == pytest.approx(5, abs=0.15)
    # rounding adds 1/12 variance
    assert out.std() == pytest.approx(math.sqrt(100 + 1 / 12), abs=0.15)


def test_noise_deterministic_and_seeded(texture):
    a = add_gaussian_noise(texture, 0, 8, seed=11)
    assert a == add_gaussian_noise(texture, 0, 8, seed=11)
    assert a != add_gaussian_noise(texture, 0, 8, seed=12)


def test_noise_zero_sigma_is_shift(texture):
    out = add_gaussian_noise(texture, mean=3, sigma=0)
    np.testing.assert_array_equal(out.pixels, np.clip(texture.pixels.astype(int) + 3, 0, 255))
    assert add_gaussian_noise(texture) == texture


def test_noise_clips():
    out = add_gaussian_noise(np.full((32, 32, 1), 250, np.uint8), 0, 40, seed=0)
    assert out.pixels.max() == 255


def test_noise_rejects_negative_sigma(texture):
    with pytest.raises(ValueError):
        add_gaussian_noise(texture, 0, -1)


def test_kernel():
    k = gaussian_kernel(1.0)
    assert k.size == 7
    assert k.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(k, k[::-1])
    assert gaussian_kernel(2.5).size == 17
    with pytest.raises(InvalidKernel):
        gaussian_kernel(1.0, 4)


def test_blur_impulse_response():
    img = np.zeros((41, 41, 1), np.uint8)
    img[20, 20] = 255
    k = gaussian_kernel(2.0)
    out = gaussian_blur(img, 2.0).pixels[:, :, 0]
    assert out[20, 20] == round(255 * k[k.size // 2] ** 2)
    assert out[20, 20 + 3] == round(255 * k[k.size // 2] * k[k.size // 2 + 3])
    np.testing.assert_array_equal(out, out.T)


def test_blur_constant_is_fixed_point():
    img = np.full((20, 30, 3), 91, np.uint8)
    assert gaussian_blur(img, 3.0) == Image(img)


def test_blur_zero_sigma_is_identity(texture):
    assert gaussian_blur(texture, 0) == texture


@pytest.mark.parametrize("kernel", [4, 0, -3, 2.5])
def test_blur_bad_kernel(texture, kernel):
    with pytest.raises(InvalidKernel):
        gaussian_blur(texture, 1.0, kernel=kernel)


def test_blur_explicit_kernel_size(texture):
    assert gaussian_blur(texture, 1.0, kernel=7) == gaussian_blur(texture, 1.0)
    assert gaussian_blur(texture, 1.0, kernel=3) != gaussian_blur(texture, 1.0)


def test_motion_blur_is_horizontal():
    img = np.zeros((5, 31, 1), np.uint8)
    img[:, 15] = 150
    out = motion_blur(img).pixels[:, :, 0]
    np.testing.assert_array_equal(out[:, 8:23], 10)
    assert out[:, :8].max() == 0 and out[:, 23:].max() == 0


def test_contrast():
    img = np.array([[[228], [28], [128]]], np.uint8)
    out = adjust_contrast(img, 0.5).pixels.reshape(-1).tolist()
    assert out == [178, 78, 128]
    assert adjust_contrast(img, 4).pixels.reshape(-1).tolist() == [255, 0, 128]
    with pytest.raises(ValueError):
        adjust_contrast(img, 0)


def test_regional_touches_only_rect(texture):
    rect = (10, 20, 16, 8)
    out = regional_distort(texture, rect).pixels
    mask = np.zeros(out.shape[:2], bool)
    mask[20:28, 10:26] = True
    np.testing.assert_array_equal(out[~mask], texture.pixels[~mask])
    assert (out[mask] != texture.pixels[mask]).any()
    full = motion_blur(texture).pixels
    np.testing.assert_array_equal(out[mask], full[mask])


def test_regional_with_inner_spec(texture):
    spec = DistortionSpec("gaussian_noise", {"sigma": 20}, seed=4)
    out = regional_distort(texture, (0, 0, 8, 8), spec).pixels
    np.testing.assert_array_equal(out[:8, :8], spec.apply(texture).pixels[:8, :8])
    np.testing.assert_array_equal(out[8:], texture.pixels[8:])


@pytest.mark.parametrize("rect", [(0, 0, 0, 5), (0, 0, 5, -1), (-1, 0, 4, 4),
                                  (60, 0, 5, 4), (0, 61, 4, 4)])
def test_regional_bad_rect(texture, rect):
    with pytest.raises(RectOutOfBounds):
        regional_distort(texture, rect)


def test_spec_dispatch(texture):
    assert DistortionSpec("gaussian_blur", {"sigma": 1.5}).apply(texture) == \
        gaussian_blur(texture, 1.5)
    assert DistortionSpec("contrast", {"factor": 0.7}).apply(texture) == \
        adjust_contrast(texture, 0.7)
    assert shutter_blur().apply(texture) == motion_blur(texture, 15)
    reg = DistortionSpec("regional", {"rect": (4, 4, 8, 8)})
    assert reg.apply(texture) == regional_distort(texture, (4, 4, 8, 8))


def test_spec_validation():
    with pytest.raises(ValueError):
        DistortionSpec("swirl")
    with pytest.raises(ValueError):
        DistortionSpec("gaussian_noise", {"sigma": -2})
    with pytest.raises(ValueError):
        DistortionSpec("contrast", {"factor": -1})


def test_inputs_not_modified(rng):
    arr = random_image(rng, 16, 16)
    before = arr.copy()
    add_gaussian_noise(arr, 0, 5)
    gaussian_blur(arr, 2)
    regional_distort(arr, (0, 0, 4, 4))
    np.testing.assert_array_equal(arr, before)


def test_impulse_sigma_one_mass():
    img = np.zeros((21, 21, 1), np.uint8)
    img[10, 10] = 255
    out = gaussian_blur(img, 1.0).pixels.astype(int)
    k = gaussian_kernel(1.0)
    assert out[10, 10, 0] == round(255 * k[3] ** 2)
    # each of the 7x7 support pixels rounds independently
    assert abs(out.sum() - 255) <= 0.5 * 49


def test_contrast_identity_and_limit(texture):
    assert adjust_contrast(texture, 1.0) == texture
    assert np.all(adjust_contrast(texture, 1e-9).pixels == 128)


def test_regional_full_rect_equals_global_noise(texture):
    spec = DistortionSpec("gaussian_noise", {"mean": 2, "sigma": 9}, seed=5)
    full = regional_distort(texture, (0, 0, texture.width, texture.height), spec)
    assert full == spec.apply(texture)

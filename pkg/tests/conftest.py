import numpy as np
import pytest
from scipy import ndimage

from arbshape.imgio import BinaryImage, generate_synthetic_dataset


def random_blob(rng, size=120, sigma=None, margin=3):
    """Largest component of thresholded smoothed noise, kept off the border."""
    sigma = sigma if sigma is not None else rng.uniform(2.0, 6.0)
    while True:
        noise = ndimage.gaussian_filter(rng.standard_normal((size, size)), sigma)
        mask = noise > rng.uniform(0.0, 0.5) * noise.std()
        mask[:margin] = mask[-margin:] = False
        mask[:, :margin] = mask[:, -margin:] = False
        labels, n = ndimage.label(mask, structure=np.ones((3, 3)))
        if n == 0:
            continue
        sizes = np.bincount(labels.ravel())
        sizes[0] = 0
        comp = labels == np.argmax(sizes)
        if comp.sum() >= 20:
            return BinaryImage(comp)


def block(x0, y0, w, h, size=12):
    a = np.zeros((size, size), dtype=bool)
    a[y0:y0 + h, x0:x0 + w] = True
    return BinaryImage(a)


@pytest.fixture(scope="session")
def small_dataset():
    return generate_synthetic_dataset(12, 120, 120, seed=3)


@pytest.fixture(scope="session")
def blobs():
    rng = np.random.default_rng(2024)
    return [random_blob(rng) for _ in range(20)]


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if acceptance_log.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.lines():
            terminalreporter.write_line(line)

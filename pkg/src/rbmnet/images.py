"""Image ingestion: IDX files, stochastic binarization, PGM export."""

import gzip
import struct

import numpy as np

from . import _rng
from .dataset import SpinDataset
from .errors import ValidationError

IDX_IMAGES = 0x00000803
IDX_LABELS = 0x00000801


def _open(path, mode):
    if str(path).endswith(".gz"):
        return gzip.open(path, mode)
    return open(path, mode)


def read_idx(path):
    """Read an IDX file (big-endian); images -> (m, rows, cols), labels -> (m,)."""
    with _open(path, "rb") as fh:
        magic = struct.unpack(">I", fh.read(4))[0]
        if magic == IDX_IMAGES:
            m, rows, cols = struct.unpack(">III", fh.read(12))
            buf = fh.read(m * rows * cols)
            return np.frombuffer(buf, dtype=np.uint8).reshape(m, rows, cols)
        if magic == IDX_LABELS:
            m = struct.unpack(">I", fh.read(4))[0]
            return np.frombuffer(fh.read(m), dtype=np.uint8)
    raise ValidationError(f"{path}: unrecognized IDX magic 0x{magic:08x}")


def write_idx(path, arr):
    """Write uint8 images (m, rows, cols) or labels (m,) in IDX layout."""
    arr = np.asarray(arr, dtype=np.uint8)
    with _open(path, "wb") as fh:
        if arr.ndim == 3:
            fh.write(struct.pack(">IIII", IDX_IMAGES, *arr.shape))
        elif arr.ndim == 1:
            fh.write(struct.pack(">II", IDX_LABELS, arr.shape[0]))
        else:
            raise ValidationError("expect (m, rows, cols) images or (m,) labels")
        fh.write(arr.tobytes())


def binarize_images(raw, seed, labels=None):
    """Stochastic binarization: pixel +1 with probability equal to intensity.

    ``raw`` holds intensities in [0, 1], shape (m, ...); trailing axes are
    flattened.  Gray pixels become a random mix of black and white, so
    repeated calls with different seeds give fresh samples of the same
    underlying images.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.min() < 0 or raw.max() > 1:
        raise ValidationError("intensities must lie in [0, 1]")
    flat = raw.reshape(raw.shape[0], -1)
    rng = _rng.substream(seed, _rng.BINARIZE)
    spins = np.where(rng.random(flat.shape) < flat, 1, -1).astype(np.int8)
    if labels is not None:
        labels = np.asarray(labels)
    return SpinDataset(spins, labels)


def downsample_nearest(images, out_shape):
    """Nearest-neighbor decimation of (m, rows, cols) images."""
    images = np.asarray(images)
    m, rows, cols = images.shape
    r_idx = (np.arange(out_shape[0]) * rows) // out_shape[0]
    c_idx = (np.arange(out_shape[1]) * cols) // out_shape[1]
    return images[:, r_idx[:, None], c_idx[None, :]]


def write_pgm(path, img):
    """Binary P5 PGM of a uint8 image."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValidationError("PGM export expects a 2-d image")
    img = np.clip(np.round(img), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        fh.write(img.tobytes())


def read_pgm(path):
    with open(path, "rb") as fh:
        if fh.readline().strip() != b"P5":
            raise ValidationError(f"{path}: not a binary PGM")
        dims = fh.readline().split()
        w, h = int(dims[0]), int(dims[1])
        fh.readline()
        return np.frombuffer(fh.read(w * h), dtype=np.uint8).reshape(h, w)


def sample_grid(probs, image_shape, cols=5, pad=1):
    """Arrange per-sample pixel probabilities into one grayscale grid image."""
    probs = np.asarray(probs, dtype=np.float64)
    m = probs.shape[0]
    rows = (m + cols - 1) // cols
    h, w = image_shape
    grid = np.zeros((rows * (h + pad) - pad, cols * (w + pad) - pad))
    for k in range(m):
        r, c = divmod(k, cols)
        grid[r * (h + pad):r * (h + pad) + h,
             c * (w + pad):c * (w + pad) + w] = probs[k].reshape(h, w)
    return np.round(255.0 * grid)

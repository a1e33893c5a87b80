#!/usr/bin/env python3
"""Writes the freely licensed local test photos as 8-bit binary PGMs.

Sources (via scikit-image's bundled data): `camera` (CC0) and `astronaut`
(NASA, public domain; converted to grayscale with the ITU-R 601 luma).
These back the qualitative end-to-end tests; the benchmark datasets are a
separate download (see fetch_test_images.py).
"""

import pathlib
import sys

import numpy as np


def save_pgm(img: np.ndarray, path: pathlib.Path) -> None:
    assert img.dtype == np.uint8 and img.ndim == 2
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (img.shape[1], img.shape[0]))
        fh.write(img.tobytes())


def main() -> int:
    try:
        import skimage.data
    except ImportError:
        print("scikit-image is required", file=sys.stderr)
        return 1

    out_dir = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "local"
    out_dir.mkdir(parents=True, exist_ok=True)

    camera = skimage.data.camera()
    save_pgm(camera.astype(np.uint8), out_dir / "camera.pgm")

    astronaut = skimage.data.astronaut().astype(np.float64)
    luma = 0.299 * astronaut[..., 0] + 0.587 * astronaut[..., 1] + 0.114 * astronaut[..., 2]
    save_pgm(np.clip(np.round(luma), 0, 255).astype(np.uint8), out_dir / "astronaut_gray.pgm")

    print(f"wrote fixtures to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

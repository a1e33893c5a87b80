#!/usr/bin/env python3
"""Downloads the standard grayscale benchmark sets and converts them to PGM.

Populates, relative to the repository root:

    tests/data/set12/01.pgm .. 12.pgm   (canonical Set12, 256x256 / 512x512)
    tests/data/barbara.pgm              (copy of the Set12 Barbara image)
    tests/data/bsd68/*.pgm              (optional, --with-bsd68)

Needs network access and Pillow + numpy. The acceptance suite and the bench
subcommand read these paths; without them the dataset-bound acceptance
criteria report FAIL with a pointer to this script.
"""

import argparse
import io
import pathlib
import sys
import urllib.request

SET12_BASE = "https://raw.githubusercontent.com/cszn/DnCNN/master/testsets/Set12"
SET12_NAMES = {
    "01": "cameraman", "02": "house", "03": "peppers", "04": "starfish",
    "05": "monarch", "06": "airplane", "07": "parrot", "08": "lena",
    "09": "barbara", "10": "boat", "11": "man", "12": "couple",
}
BSD68_BASE = "https://raw.githubusercontent.com/cszn/DnCNN/master/testsets/BSD68"


def fetch(url: str) -> bytes:
    with urllib.request.urlopen(url, timeout=60) as resp:
        return resp.read()


def to_pgm(png_bytes: bytes, path: pathlib.Path) -> None:
    import numpy as np
    from PIL import Image

    img = Image.open(io.BytesIO(png_bytes))
    if img.mode != "L":
        img = img.convert("L")
    arr = np.asarray(img, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (arr.shape[1], arr.shape[0]))
        fh.write(arr.tobytes())


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--with-bsd68", action="store_true", help="also fetch BSD68")
    args = parser.parse_args()

    data_dir = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"
    set12_dir = data_dir / "set12"
    set12_dir.mkdir(parents=True, exist_ok=True)

    for index in sorted(SET12_NAMES):
        out = set12_dir / f"{index}.pgm"
        if out.exists():
            print(f"have {out}")
            continue
        url = f"{SET12_BASE}/{index}.png"
        print(f"fetching {url} ({SET12_NAMES[index]})")
        to_pgm(fetch(url), out)

    barbara = data_dir / "barbara.pgm"
    if not barbara.exists():
        barbara.write_bytes((set12_dir / "09.pgm").read_bytes())
        print(f"wrote {barbara}")

    if args.with_bsd68:
        bsd_dir = data_dir / "bsd68"
        bsd_dir.mkdir(parents=True, exist_ok=True)
        for i in range(1, 69):
            out = bsd_dir / f"test{i:03d}.pgm"
            if out.exists():
                continue
            url = f"{BSD68_BASE}/test{i:03d}.png"
            print(f"fetching {url}")
            to_pgm(fetch(url), out)

    print("done")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Convert the digit JSON files shipped in the npm `mnist` package into IDX files.

Usage: npm pack mnist && tar xzf mnist-*.tgz
       python3 scripts/mnist_npm_to_idx.py package/src/digits data/mnist

The package stores 10000 MNIST digits grouped by class with pixels as b/255
rounded to three decimals, so round(v * 255) recovers the original bytes.
The records are interleaved with a fixed permutation so that any prefix is
roughly class balanced.
"""

import gzip
import json
import struct
import sys
from pathlib import Path

import numpy as np


def main(src: Path, dst: Path) -> None:
    images, labels = [], []
    for digit in range(10):
        data = json.loads((src / f"{digit}.json").read_text())["data"]
        arr = np.asarray(data, dtype=np.float64).reshape(-1, 784)
        images.append(np.rint(arr * 255.0).clip(0, 255).astype(np.uint8))
        labels.append(np.full(arr.shape[0], digit, dtype=np.uint8))
    images = np.concatenate(images)
    labels = np.concatenate(labels)
    order = np.random.default_rng(20171012).permutation(len(labels))
    images, labels = images[order], labels[order]

    dst.mkdir(parents=True, exist_ok=True)
    n = len(labels)
    with gzip.GzipFile(dst / "mnist10k-images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 2051, n, 28, 28))
        f.write(images.tobytes())
    with gzip.GzipFile(dst / "mnist10k-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 2049, n))
        f.write(labels.tobytes())
    print(f"wrote {n} digits to {dst}")


if __name__ == "__main__":
    main(Path(sys.argv[1]), Path(sys.argv[2]))

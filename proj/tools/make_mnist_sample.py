#!/usr/bin/env python3
"""Convert the digit bundle of the `mnist` npm package into gzipped IDX files.

The package ships 10000 MNIST digits as JSON arrays of 784 intensities in
[0, 1] per class. Each class is split about 90/10 into train and test (the last
tenth, rounded up, goes to test), the splits are shuffled with a fixed seed and written
as train-/t10k- IDX files with pixels round(v * 255).

    npm pack mnist@1.1.0 && tar xzf mnist-1.1.0.tgz
    tools/make_mnist_sample.py package/src/digits data/mnist-sample
"""

import argparse
import gzip
import json
import math
import pathlib
import random
import struct

SIDE = 28
PIXELS = SIDE * SIDE


def load_class(path):
    raw = json.loads(path.read_text())["data"]
    if len(raw) % PIXELS:
        raise SystemExit(f"{path}: {len(raw)} values is not a multiple of {PIXELS}")
    return [raw[i:i + PIXELS] for i in range(0, len(raw), PIXELS)]


def to_bytes(image):
    return bytes(min(255, max(0, round(v * 255))) for v in image)


def write_gz(path, payload):
    # mtime=0 keeps the archives byte-reproducible.
    with open(path, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as gz:
        gz.write(payload)


def write_split(out_dir, prefix, samples):
    images = struct.pack(">IIII", 0x803, len(samples), SIDE, SIDE)
    images += b"".join(to_bytes(img) for img, _ in samples)
    labels = struct.pack(">II", 0x801, len(samples)) + bytes(label for _, label in samples)
    write_gz(out_dir / f"{prefix}-images-idx3-ubyte.gz", images)
    write_gz(out_dir / f"{prefix}-labels-idx1-ubyte.gz", labels)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("digits", type=pathlib.Path, help="directory with 0.json .. 9.json")
    parser.add_argument("out", type=pathlib.Path, help="output directory")
    parser.add_argument("--test-fraction", type=float, default=0.1)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    train, test = [], []
    for label in range(10):
        images = load_class(args.digits / f"{label}.json")
        cut = len(images) - math.ceil(len(images) * args.test_fraction)
        train += [(img, label) for img in images[:cut]]
        test += [(img, label) for img in images[cut:]]

    rng = random.Random(args.seed)
    rng.shuffle(train)
    rng.shuffle(test)
    args.out.mkdir(parents=True, exist_ok=True)
    write_split(args.out, "train", train)
    write_split(args.out, "t10k", test)
    print(f"train {len(train)}, test {len(test)} -> {args.out}")


if __name__ == "__main__":
    main()

"""Smoke test for the datainit Python extension.

Build first with `cargo build --release -p datainit-py` (or `maturin develop`
inside crates/python). If `datainit` is not importable, the freshly built
library in target/release is loaded instead.
"""

import importlib.util
import math
import random
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    try:
        import datainit

        return datainit
    except ImportError:
        pass
    for name in ("libdatainit.so", "libdatainit.dylib", "datainit.dll"):
        built = ROOT / "target" / "release" / name
        if built.exists():
            tmp = Path(tempfile.mkdtemp())
            target = tmp / ("datainit.pyd" if name.endswith(".dll") else "datainit.so")
            shutil.copy(built, target)
            spec = importlib.util.spec_from_file_location("datainit", target)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit("datainit extension not found; run `cargo build --release -p datainit-py`")


di = load_module()


def close(a, b, tol):
    return abs(a - b) <= tol


def check_numerics():
    values, vectors = di.sym_eigh([[2.0, 1.0], [1.0, 2.0]])
    assert close(values[0], 3.0, 1e-12) and close(values[1], 1.0, 1e-12)
    assert all(close(abs(x), math.sqrt(0.5), 1e-12) for x in vectors[0])

    rng = random.Random(0)
    samples = [[rng.gauss(0, 1) * 3 + rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1) * 0.1] for _ in range(200)]
    white = di.zca_whiten(samples, 0.0)
    n = len(white)
    for j in range(3):
        for k in range(3):
            c = sum(r[j] * r[k] for r in white) / n
            assert close(c, 1.0 if j == k else 0.0, 1e-8), (j, k, c)

    draws = di.sample_gaussian([5.0, 5.0], [[2.0, 0.0], [0.0, 0.5]], 4000, seed=1)
    mean0 = sum(d[0] for d in draws) / len(draws)
    assert close(mean0, 5.0, 0.1)


def check_initializers():
    rng = random.Random(1)
    images = [[rng.random() for _ in range(36)] for _ in range(10)]
    bank = di.pca_init(images, (1, 6, 6), 4, 3)
    for a in range(4):
        for b in range(4):
            dot = sum(x * y for x, y in zip(bank[a], bank[b]))
            assert close(dot, 1.0 if a == b else 0.0, 1e-8)

    crops = [[rng.random() for _ in range(9)] for _ in range(100)]
    filters = di.data_stats_init_layer(crops, 8, 9, seed=2)
    flat = [v for row in filters for v in row]
    mean = sum(flat) / len(flat)
    var = sum((v - mean) ** 2 for v in flat) / len(flat)
    assert close(var, 2.0 / 9.0, 1e-10)

    try:
        di.data_stats_init_layer([[0.5] * 4] * 10, 4, 4, seed=0)
    except di.DataError:
        pass
    else:
        raise AssertionError("constant crops should be rejected")


def check_network(tmp):
    net = di.Network("flatten dense(2)", (1, 2, 2), 2)
    net.set_weights(1, [0.1, -0.4, 0.2, 0.0, 1.0, 2.0, -3.0, 0.5], [0.0, 0.0])
    image = [1.0, 1.0, 0.0, 1.0]
    assert net.predict(image) == 1
    heat = net.saliency(image)
    assert len(heat) == 2 and max(max(r) for r in heat) == 1.0

    path = tmp / "net.dsin"
    net.save(str(path))
    back = di.Network.load(str(path))
    assert back.weights(1) == net.weights(1)
    assert back.forward(image) == net.forward(image)

    path.write_bytes(b"XXXX" + path.read_bytes()[4:])
    try:
        di.Network.load(str(path))
    except di.DataError:
        pass
    else:
        raise AssertionError("bad magic should be rejected")


def check_runs(tmp):
    text = "\n".join(
        [
            "layers = conv(4,5) relu maxpool flatten dense(2)",
            "dataset = synthetic",
            "synthetic_side = 12",
            "synthetic_per_class = 60",
            "subsample_size = 32",
            "epochs = 2",
            "lr = 0.05",
            "batch_size = 10",
            "seed = 4",
            "out_dir = run",
        ]
    )
    cfg = di.RunConfig.parse(text, str(tmp))
    rows, net = di.run_experiment(cfg.with_init("datastats"))
    assert [r[0] for r in rows] == [1, 2]
    assert (tmp / "run" / "metrics.csv").exists()
    assert net.affine_count == 2

    init = di.initial_network(cfg.with_init("he"))
    shape, weights, bias = init.weights(1)
    assert shape == [4, 1, 5, 5] and all(b == 0.0 for b in bias)

    cfg.out_dir = str(tmp / "cmp")
    results = di.compare_initializers(cfg, ["he", "datastats"])
    assert [r[0] for r in results] == ["he", "datastats"]
    assert all(r[1] is not None and r[2] is None for r in results)
    assert (tmp / "cmp" / "overlay.svg").exists()

    try:
        di.compare_initializers(cfg, ["he"])
    except ValueError:
        pass
    else:
        raise AssertionError("a single scheme should be rejected")


def main():
    tmp = Path(tempfile.mkdtemp())
    check_numerics()
    check_initializers()
    check_network(tmp)
    check_runs(tmp)
    print("python smoke test passed:", ", ".join(di.SCHEMES))


if __name__ == "__main__":
    main()

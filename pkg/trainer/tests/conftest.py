import shutil

import pytest

from sppkit.cli import main as sppkit_main


def build_split_dataset(root, count, seed, duration, splits):
    """Generate one pair-file dataset through the runtime's CLI (so all
    files share the dataset-global normalization stats) and split it into
    named subdirectories."""
    pool = root / "pool"
    assert sppkit_main(["make-dataset", "--count", str(count), "--seed", str(seed),
                        "--duration", str(duration), "--out", str(pool)]) == 0
    files = sorted(pool.glob("*.sppd"))
    assert len(files) == count == sum(n for _, n in splits)
    out_dirs = []
    index = 0
    for name, size in splits:
        split_dir = root / name
        split_dir.mkdir()
        for path in files[index:index + size]:
            shutil.move(str(path), split_dir / path.name)
        index += size
        out_dirs.append(split_dir)
    return out_dirs


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("pairs")
    train_dir, val_dir = build_split_dataset(root, 32, seed=100, duration=1.0,
                                             splits=[("train", 24), ("val", 8)])
    return train_dir, val_dir

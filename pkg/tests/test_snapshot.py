import numpy as np
import pytest

from tfch.sim.snapshot import SnapshotError, SnapshotMeta, read_snapshot, write_snapshot
from tfch.spectral_field import Field, Grid


@pytest.fixture
def snap(tmp_path, rng):
    f = Field(Grid(8, 4, 2.0, 1.0), rng.standard_normal((8, 4)))
    path = write_snapshot(f, SnapshotMeta(0.1 + 0.2, 0.35, 2 ** 63 + 1), tmp_path / "a.tfch")
    return f, path


def test_round_trip_is_bitwise(snap):
    f, path = snap
    g, meta = read_snapshot(path)
    assert g.grid == f.grid
    assert g.values.tobytes() == f.values.tobytes()
    assert meta == SnapshotMeta(0.1 + 0.2, 0.35, 2 ** 63 + 1)
    assert path.read_bytes().startswith(b"TFCH1 8 4 2.0 1.0 0.30000000000000004 0.35 ")
    assert not list(path.parent.glob("*.part"))


def test_layout_is_row_major(snap):
    f, path = snap
    data = path.read_bytes()
    payload = data[data.index(b"\n") + 1:]
    assert np.frombuffer(payload, "<f8")[1] == f.values[0, 1]


@pytest.mark.parametrize("mutate,match", [
    (lambda d: d[:-8], "payload length"),
    (lambda d: d + b"\0", "payload length"),
    (lambda d: d.replace(b"TFCH1", b"TFCH2", 1), "unsupported snapshot version"),
    (lambda d: b"NOPE" + d, "not a TFCH snapshot"),
    (lambda d: d.replace(b"\n", b" 9\n", 1), "malformed header"),
    (lambda d: d.replace(b"TFCH1 8", b"TFCH1 x", 1), "malformed header values"),
    (lambda d: b"TFCH1", "no header"),
])
def test_corrupt_files(snap, mutate, match):
    _, path = snap
    path.write_bytes(mutate(path.read_bytes()))
    with pytest.raises(SnapshotError, match=match):
        read_snapshot(path)


def test_oversized_dimensions(tmp_path):
    p = tmp_path / "big.tfch"
    p.write_bytes(b"TFCH1 100000 100000 1.0 1.0 0.0 0.5 0\n")
    with pytest.raises(SnapshotError, match="out of range"):
        read_snapshot(p)

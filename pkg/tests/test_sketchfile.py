import numpy as np
import pytest

from freqdir.baselines import HashingSketch
from freqdir.fd import FrequentDirections
from freqdir.sketchfile import SketchFile


@pytest.mark.parametrize("variant", ["simple", "fast", "bounded"])
def test_roundtrip_and_resume(tmp_path, rng, variant):
    a = rng.standard_normal((60, 9))
    s = FrequentDirections(4, 9, variant)
    s.extend(a[:40])
    rec = SketchFile.from_sketch(s)
    p = tmp_path / "s.fdsk"
    rec.write(str(p))
    raw = p.read_bytes()
    back = SketchFile.read(str(p))
    assert back.to_bytes() == raw
    assert back.matrix.tobytes() == rec.matrix.tobytes()
    assert (back.kind, back.delta, back.rows_seen) == (rec.kind, s.delta, 40)
    restored = back.to_sketch()
    restored.extend(a[40:])
    b = restored.finalize()
    ev = np.linalg.eigvalsh(a.T @ a - b.T @ b)
    assert ev[0] >= -1e-8 * np.sum(a * a)
    assert ev[-1] <= np.sum(a * a) / 4 + 1e-8


def test_baseline_kind(rng):
    s = HashingSketch(3, 4, seed=1)
    s.extend(rng.standard_normal((10, 4)))
    rec = SketchFile.from_sketch(s)
    assert rec.kind == "hash" and rec.delta == 0 and not rec.is_fd
    with pytest.raises(ValueError):
        rec.to_sketch()


def test_corrupt():
    rec = SketchFile("fd", 2, 3, 0.0, 0, 0.0, np.zeros((2, 3)))
    raw = rec.to_bytes()
    with pytest.raises(ValueError, match="magic"):
        SketchFile.from_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ValueError):
        SketchFile.from_bytes(raw[:-1])
    with pytest.raises(ValueError):
        SketchFile("fd", 2, 3, 0.0, 0, 0.0, np.zeros((3, 3)))

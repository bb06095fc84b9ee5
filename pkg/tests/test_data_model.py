
import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaitpipe.data_model import (
    ManifestEntry,
    SessionManifest,
    load_session,
    mph_to_mps,
    parse_imu_csv,
    parse_manifest,
    write_imu_csv,
    write_manifest,
)
from gaitpipe.errors import (
    BadManifest,
    EmptyFile,
    GaitPipeError,
    MalformedRow,
    NegativeSpeed,
    NonMonotoneTimestamp,
)

HEADER = "t_ns,ax,ay,az,gx,gy,gz"


def write_csv(path, rows):
    with open(path, "w") as fh:
        fh.write(HEADER + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


def test_parse_well_formed(tmp_path):
    p = tmp_path / "a.csv"
    write_csv(p, [
        [0, 0.1, 0.2, 9.8, 0.01, 0.02, 0.03],
        [10_000_000, 0.2, 0.3, 9.7, 0.0, 0.0, 0.0],
        [20_000_000, 0.3, 0.4, 9.9, -0.1, 0.1, 0.2],
    ])
    rec = parse_imu_csv(str(p))
    assert len(rec) == 3
    assert rec.t_ns.tolist() == [0, 10_000_000, 20_000_000]
    assert rec.accel[0].tolist() == [0.1, 0.2, 9.8]
    assert rec.gyro[2].tolist() == [-0.1, 0.1, 0.2]
    assert rec.true_speed is None


def test_parse_non_monotone(tmp_path):
    p = tmp_path / "a.csv"
    write_csv(p, [
        [0, 0, 0, 9.8, 0, 0, 0],
        [10_000_000, 0, 0, 9.8, 0, 0, 0],
        [5_000_000, 0, 0, 9.8, 0, 0, 0],
    ])
    with pytest.raises(NonMonotoneTimestamp) as exc:
        parse_imu_csv(str(p))
    # the offending sample is the 3rd data row: file line 4 (1-based, with header)
    assert exc.value.line_number == 4


def test_parse_nan_rejected(tmp_path):
    p = tmp_path / "a.csv"
    write_csv(p, [
        [0, 0, 0, 9.8, 0, 0, 0],
        [10_000_000, 0, 0, "NaN", 0, 0, 0],
    ])
    with pytest.raises(MalformedRow) as exc:
        parse_imu_csv(str(p))
    assert exc.value.line_number == 3


def test_parse_empty(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("")
    with pytest.raises(EmptyFile):
        parse_imu_csv(str(p))
    p.write_text(HEADER + "\n")
    with pytest.raises(EmptyFile):
        parse_imu_csv(str(p))


def test_parse_bad_header(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("time,ax,ay,az,gx,gy,gz\n0,0,0,9.8,0,0,0\n")
    with pytest.raises(MalformedRow):
        parse_imu_csv(str(p))


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    n = 50
    from conftest import make_recording
    rec = make_recording(rng.normal(0, 3, (n, 3)), rng.normal(0, 1, (n, 3)))
    p = tmp_path / "rt.csv"
    write_imu_csv(rec, str(p))
    back = parse_imu_csv(str(p))
    assert np.array_equal(rec.t_ns, back.t_ns)
    assert np.array_equal(rec.accel, back.accel)
    assert np.array_equal(rec.gyro, back.gyro)


def test_mph_to_mps_values():
    assert mph_to_mps(0.0) == 0.0
    assert mph_to_mps(1.0) == 0.44704
    assert mph_to_mps(3.0) == pytest.approx(1.34112, abs=0)
    with pytest.raises(NegativeSpeed):
        mph_to_mps(-1.0)


@given(st.floats(0, 50), st.floats(0, 50))
def test_mph_to_mps_linear(a, b):
    lhs = mph_to_mps(a + b)
    rhs = mph_to_mps(a) + mph_to_mps(b)
    assert lhs == pytest.approx(rhs, rel=1e-15, abs=5e-16)


def _write_session(tmp_path, names=("r1.csv", "r2.csv")):
    for name in names:
        write_csv(tmp_path / name, [
            [i * 10_000_000, 0.1, 0.2, 9.8, 0, 0, 0] for i in range(10)
        ])
    entries = tuple(
        ManifestEntry(name, f"S{i}", 1.0 + i * 0.5, "mph")
        for i, name in enumerate(names)
    )
    return SessionManifest(entries, str(tmp_path))


def test_load_session_converts_units(tmp_path):
    manifest = _write_session(tmp_path)
    recs = load_session(manifest)
    assert len(recs) == 2
    assert recs[0].true_speed == pytest.approx(0.44704)
    assert recs[1].true_speed == pytest.approx(1.5 * 0.44704)
    assert recs[0].subject_id == "S0"


def test_load_session_missing_file(tmp_path):
    manifest = SessionManifest((ManifestEntry("nope.csv", "S0", 1.0, "mph"),), str(tmp_path))
    with pytest.raises(BadManifest, match="nope.csv"):
        load_session(manifest)


def test_load_session_empty():
    assert load_session(SessionManifest((), ".")) == []


def test_manifest_round_trip(tmp_path):
    manifest = _write_session(tmp_path)
    mpath = tmp_path / "manifest.csv"
    write_manifest(manifest, str(mpath))
    back = parse_manifest(str(mpath))
    assert back.entries == manifest.entries


def test_manifest_bad_unit(tmp_path):
    (tmp_path / "m.csv").write_text("a.csv,S0,1.0,furlongs\n")
    with pytest.raises(BadManifest):
        parse_manifest(str(tmp_path / "m.csv"))


def test_parse_fuzz_mutations(tmp_path):
    """Random byte mutations either parse to a valid Recording or raise a
    typed gaitpipe error."""
    base = HEADER + "\n" + "\n".join(
        f"{i * 10_000_000},0.1,0.2,9.8,0.01,0.02,0.03" for i in range(20)
    ) + "\n"
    rng = np.random.default_rng(0)
    raw = bytearray(base.encode())
    p = tmp_path / "fuzz.csv"
    for trial in range(200):
        mutated = bytearray(raw)
        for _ in range(rng.integers(1, 4)):
            mutated[rng.integers(0, len(mutated))] = rng.integers(32, 127)
        p.write_bytes(bytes(mutated))
        try:
            rec = parse_imu_csv(str(p))
        except GaitPipeError:
            continue
        except UnicodeDecodeError:
            continue
        assert np.all(np.diff(rec.t_ns) > 0)
        assert np.isfinite(rec.accel).all() and np.isfinite(rec.gyro).all()

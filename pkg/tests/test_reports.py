"""Delimited tables: canonical headers, hashing, and round trips."""

import hashlib
import json
import math

import numpy as np
import pytest

from emcel.reports import (
    FORMAT_TAG,
    canonical_config,
    config_hash,
    read_table,
    validate_table,
    write_table,
)


CONFIG = {"model": "brownian", "h": 0.015625, "seed": 11, "paths": 3}


def test_canonical_config_sorts_keys_and_strips_spaces():
    text = canonical_config({"b": [1, 2], "a": 1})
    assert text == '{"a":1,"b":[1,2]}'


def test_config_hash_is_order_invariant_and_verifiable():
    h1 = config_hash({"a": 1, "b": 2})
    h2 = config_hash({"b": 2, "a": 1})
    assert h1 == h2
    # independent recomputation
    direct = hashlib.sha256(canonical_config({"a": 1, "b": 2}).encode("utf-8")).hexdigest()
    assert h1 == direct
    assert config_hash({"a": 1, "b": 3}) != h1


def test_config_hash_handles_non_finite_numbers():
    h = config_hash({"window": [0.5, math.inf]})
    assert isinstance(h, str) and len(h) == 64


def test_write_read_round_trip(tmp_path):
    path = tmp_path / "table.csv"
    cols = {
        "t": np.array([0.0, 0.5, 1.0]),
        "state": np.array([0.0, -0.125, 0.25]),
        "k": np.array([0, 1, 2]),
    }
    write_table(path, "paths", cols, CONFIG)
    meta, back = read_table(path)
    assert meta["experiment"] == "paths"
    assert meta["config"] == CONFIG
    assert meta["seed"] == "11"
    for name in cols:
        assert np.array_equal(back[name], np.asarray(cols[name], dtype=float))


def test_floats_survive_the_round_trip_exactly(tmp_path):
    path = tmp_path / "floats.csv"
    values = np.array([math.pi, 1e-17, -0.0, 2.0**-52, 1.0 / 3.0])
    write_table(path, "paths", {"x": values}, {"seed": 0})
    _, back = read_table(path)
    assert np.array_equal(back["x"], values)


def test_strict_mode_writes_byte_identical_files(tmp_path):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    cols = {"h": [0.1, 0.05], "err": [0.3, 0.21]}
    write_table(p1, "rate", cols, CONFIG, strict=True)
    write_table(p2, "rate", cols, CONFIG, strict=True)
    assert p1.read_bytes() == p2.read_bytes()
    assert b"created" not in p1.read_bytes()


def test_default_mode_stamps_a_creation_time(tmp_path):
    path = tmp_path / "stamped.csv"
    write_table(path, "rate", {"h": [0.1]}, CONFIG)
    meta, _ = read_table(path)
    assert "created" in meta


def test_extra_meta_lines_round_trip(tmp_path):
    path = tmp_path / "extra.csv"
    write_table(
        path,
        "rate",
        {"h": [0.1, 0.05]},
        CONFIG,
        extra_meta={"slope-cdf": -0.62, "note": "fitted on 2 points"},
    )
    meta, _ = read_table(path)
    assert meta["slope-cdf"] == "-0.62"
    assert meta["note"] == "fitted on 2 points"


def test_tampered_config_is_detected(tmp_path):
    path = tmp_path / "tamper.csv"
    write_table(path, "paths", {"x": [1.0]}, CONFIG, strict=True)
    text = path.read_text()
    assert '"seed":11' in text
    path.write_text(text.replace('"seed":11', '"seed":12'))
    with pytest.raises(ValueError, match="hash mismatch"):
        read_table(path)


def test_wrong_format_tag_is_rejected(tmp_path):
    path = tmp_path / "alien.csv"
    path.write_text("x,y\n1,2\n")
    with pytest.raises(ValueError, match=FORMAT_TAG):
        read_table(path)


def test_ragged_rows_are_rejected_with_line_numbers(tmp_path):
    path = tmp_path / "ragged.csv"
    write_table(path, "paths", {"x": [1.0, 2.0], "y": [3.0, 4.0]}, CONFIG, strict=True)
    with open(path, "a") as fh:
        fh.write("5.0\n")
    with pytest.raises(ValueError, match="expected 2 fields"):
        read_table(path)


def test_validate_table_returns_metadata(tmp_path):
    path = tmp_path / "ok.csv"
    write_table(path, "cdf", {"z": [0.0], "f": [0.5]}, CONFIG, strict=True)
    meta = validate_table(path)
    assert meta["experiment"] == "cdf"
    assert meta["config-hash"].startswith("sha256:")


def test_write_table_validation(tmp_path):
    path = tmp_path / "bad.csv"
    with pytest.raises(ValueError):
        write_table(path, "paths", {}, CONFIG)
    with pytest.raises(ValueError, match="length"):
        write_table(path, "paths", {"a": [1.0, 2.0], "b": [1.0]}, CONFIG)
    with pytest.raises(ValueError):
        write_table(path, "paths", {"a": [[1.0, 2.0], [3.0, 4.0]]}, CONFIG)


def test_integers_and_booleans_are_written_plainly(tmp_path):
    path = tmp_path / "ints.csv"
    write_table(path, "paths", {"k": [0, 1, 2], "flag": [True, False, True]}, CONFIG, strict=True)
    body = path.read_text().splitlines()[-3:]
    assert body == ["0,1", "1,0", "2,1"]

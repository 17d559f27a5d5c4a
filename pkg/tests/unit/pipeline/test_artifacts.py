"""
Unit tests for output writing.
"""

import json

import pandas as pd

from copsens.pipeline.artifacts import atomic_write_text, sha256_file, versions, write_csv, write_json


def test_atomic_write_creates_parents_and_leaves_no_temp_files(tmp_path):
    path = atomic_write_text(tmp_path / "a" / "b" / "out.txt", "hello")

    assert path.read_text(encoding="utf-8") == "hello"
    assert [p.name for p in path.parent.iterdir()] == ["out.txt"]


def test_atomic_write_replaces(tmp_path):
    atomic_write_text(tmp_path / "out.txt", "first")
    atomic_write_text(tmp_path / "out.txt", "second")
    assert (tmp_path / "out.txt").read_text(encoding="utf-8") == "second"


def test_write_csv_uses_unix_newlines(tmp_path):
    path = write_csv(pd.DataFrame({"s": [1.0, 2.0], "kind": ["a", "b"]}), tmp_path / "x.csv")
    assert path.read_bytes() == b"s,kind\n1.0,a\n2.0,b\n"


def test_write_json_sorts_keys(tmp_path):
    path = write_json({"b": 1, "a": {"d": 2, "c": 3}}, tmp_path / "m.json")
    text = path.read_text(encoding="utf-8")

    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": {"c": 3, "d": 2}, "b": 1}


def test_sha256_file(tmp_path):
    path = tmp_path / "abc.txt"
    path.write_bytes(b"abc")
    assert sha256_file(path) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


def test_versions():
    assert set(versions()) == {"copsens", "python", "numpy", "pandas", "scipy", "pydantic"}

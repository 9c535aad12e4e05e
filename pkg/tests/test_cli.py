import json

import numpy as np
import pytest

from graphpot import generate
from graphpot.cli import main, parse_space_file, serialize_space
from graphpot.errors import SchemaError


def test_space_file_round_trip(tmp_path):
    src = generate("grid2d(4)")
    path = tmp_path / "space.json"
    serialize_space(src, path)
    back = parse_space_file(path)
    assert back.ids == src.ids
    assert (back.W != src.W).nnz == 0
    assert np.array_equal(back.absorbing, src.absorbing)
    assert back.base_point == src.base_point


def test_schema_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "vertices": ["a", "b", "c"],
        "edges": [{"from": "a", "to": "b", "weight": -1.0}],
        "absorbing": ["c"], "base_point": "a",
    }))
    with pytest.raises(SchemaError, match="a.*b|b.*a"):
        parse_space_file(bad)

    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"vertices": ["a"], "edges": []}))
    with pytest.raises(SchemaError):
        parse_space_file(missing)

    broken = tmp_path / "broken.json"
    broken.write_text('{"vertices": [\n  "a",\n  }')
    with pytest.raises(SchemaError, match="line"):
        parse_space_file(broken)


def test_dirichlet_csv_values(tmp_path):
    rc = main(["dirichlet", "--space", "path(5)", "--g", "0:0,4:1",
               "--out", str(tmp_path)])
    assert rc == 0
    rows = (tmp_path / "dirichlet.csv").read_text().strip().splitlines()
    assert rows[0] == "vertex_id,value"
    vals = {r.split(",")[0]: float(r.split(",")[1]) for r in rows[1:]}
    assert vals["1"] == pytest.approx(0.25, abs=1e-12)
    assert vals["2"] == pytest.approx(0.5, abs=1e-12)
    assert vals["3"] == pytest.approx(0.75, abs=1e-12)


def test_outputs_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        rc = main(["mc", "--space", "path(5)", "--x", "2",
                   "--samples", "5000", "--seed", "11", "--out", str(out)])
        assert rc == 0
    assert (a / "mc.csv").read_bytes() == (b / "mc.csv").read_bytes()
    # summaries echo the command line (including --out), so compare the rest
    strip = lambda p: [l for l in p.read_text().splitlines()
                       if not l.startswith("command ")]
    assert strip(a / "mc_summary.txt") == strip(b / "mc_summary.txt")


def test_verify_quick_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["verify", "--quick", "--out", str(out)]) == 0
    ra = (a / "verify_report.txt").read_bytes()
    assert ra == (b / "verify_report.txt").read_bytes()
    assert b"FAIL" not in ra


def test_gen_round_trip_via_files(tmp_path):
    assert main(["gen", "--space", "binary_tree(3)", "--out", str(tmp_path)]) == 0
    space = parse_space_file(tmp_path / "space.json")
    ref = generate("binary_tree(3)")
    assert space.n == ref.n and (space.W != ref.W).nnz == 0


def test_capacity_command(tmp_path):
    rc = main(["capacity", "--space", "path(5)", "--set", "2",
               "--out", str(tmp_path)])
    assert rc == 0
    line = (tmp_path / "capacity.csv").read_text().strip().splitlines()[1]
    # Cap({2}) = 1 / G(2, 2) = 1/2 on the five-vertex path
    assert float(line.split(",")[1]) == pytest.approx(0.5, abs=1e-12)


def test_unknown_command_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_domain_error_exit_1(tmp_path, capsys):
    # boundary data names a vertex that does not exist
    rc = main(["dirichlet", "--space", "path(5)", "--g", "zz:1",
               "--out", str(tmp_path)])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_summary_has_no_timestamps(tmp_path):
    import re

    main(["green", "--space", "path(5)", "--x", "2", "--y", "2",
          "--out", str(tmp_path)])
    text = (tmp_path / "green_summary.txt").read_text()
    assert not re.search(r"\d{4}-\d{2}-\d{2}", text)
    assert not re.search(r"\d{2}:\d{2}:\d{2}", text)

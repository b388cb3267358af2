from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from momentlab.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, build_parser, main, make_spec
from momentlab.config import KINDS, ExperimentSpec, load_spec, parse_spec
from momentlab.errors import ConfigError

keys = st.from_regex(r"[a-z][a-z0-9-]{0,10}", fullmatch=True).filter(lambda k: k not in ("kind", "output", "format"))
values = st.from_regex(r"[A-Za-z0-9.^,@_-]{1,12}", fullmatch=True)


@given(st.sampled_from(KINDS), st.dictionaries(keys, values, max_size=6),
       st.one_of(st.none(), st.from_regex(r"[a-z]{1,8}\.csv", fullmatch=True)), st.sampled_from(["csv", "json"]))
def test_spec_roundtrip(kind, params, output, fmt):
    spec = ExperimentSpec(kind, params, output, fmt)
    back = parse_spec(spec.serialize())
    assert back == spec
    assert back.content_hash() == spec.content_hash()


def test_hash_is_git_blob_sha1():
    spec = ExperimentSpec("tube-volume", {"d": "3"})
    text = spec.serialize()
    assert text == "kind = tube-volume\nformat = csv\nd = 3\n"
    git = subprocess.run(["git", "hash-object", "--stdin"], input=text.encode(), capture_output=True)
    if git.returncode == 0:
        assert spec.content_hash() == git.stdout.decode().strip()


def test_hash_ignores_param_order():
    a = ExperimentSpec("bernstein", {"s": "1", "p": "2"})
    b = ExperimentSpec("bernstein", {"p": "2", "s": "1"})
    assert a.content_hash() == b.content_hash()


def test_parse_errors():
    with pytest.raises(ConfigError):
        parse_spec("d = 3\n")
    with pytest.raises(ConfigError):
        parse_spec("kind = tangency\nd = 3\nd = 4\n")
    with pytest.raises(ConfigError):
        parse_spec("kind = tangency\njunk\n")
    with pytest.raises(ConfigError):
        load_spec("/nonexistent/spec.txt")


def test_comments_and_blank_lines():
    spec = parse_spec("# header\n\nkind = bernstein  # trailing\ns = 2\np = 4\n")
    assert spec.kind == "bernstein" and spec.params == {"s": "2", "p": "4"}


def test_validate_reports_missing_keys():
    with pytest.raises(ConfigError, match="xlast"):
        ExperimentSpec("tangency", {"d": "3", "r": "1"}).validate()
    with pytest.raises(ConfigError):
        ExperimentSpec("nope").validate()
    with pytest.raises(ConfigError):
        ExperimentSpec("tube-volume", {"d": "3"}, format="xml").validate()


def test_typed_access():
    spec = ExperimentSpec("x", {"n": "1e3", "delta": "2^-4", "ladder": "2^-2..2^-4", "bad": "1.5"})
    assert spec.integer("n") == 1000
    assert spec.number("delta") == 0.0625
    assert spec.numbers("ladder") == [0.25, 0.125, 0.0625]
    assert spec.integer("missing", 7) == 7
    with pytest.raises(ConfigError):
        spec.integer("bad")
    with pytest.raises(ConfigError):
        spec.text("missing")


def test_precedence_file_env_flags(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("kind = bernstein\ns = 1\np = 2\nseed = 1\ntrials = 5\n")
    env = {"MOMENTLAB_SEED": "2", "MOMENTLAB_TRIALS": "6", "OTHER": "x"}
    args = build_parser().parse_args(["bernstein", "--spec", str(path), "--seed", "3"])
    spec = load_spec(path).with_env(env)
    assert spec.params["seed"] == "2" and spec.params["trials"] == "6"
    flagged = make_spec(args, env)
    assert flagged.seed == 3 and flagged.params["trials"] == "6"


def test_env_variable_applies_through_cli(tmp_path, monkeypatch, capsys):
    out = tmp_path / "r.json"
    monkeypatch.setenv("MOMENTLAB_TRIALS", "3")
    code = main(["bernstein", "--s", "1", "--p", "2", "--rs", "8,16", "--format", "json", "--out", str(out)])
    assert code == EXIT_OK
    data = json.loads(out.read_text())
    assert data["kind"] == "bernstein"


def test_tangency_example(capsys):
    """Hand oracle: for x = (1/4, -1/16, 1/64) and t = -1/4 the point
    x + 2 gamma(t) equals gamma(t) and the two tangents are parallel."""
    code = main(["tangency", "--d", "3", "--xlast", "0.015625", "--r", "2", "--format", "json"])
    data = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    x = np.array(data["info"]["center"])
    t = data["info"]["t"]
    assert np.allclose(x, [0.25, -0.0625, 0.015625], atol=1e-12) and t == pytest.approx(-0.25)
    g = lambda v: np.array([v, v * v, v**3])
    dg = lambda v: np.array([1.0, 2 * v, 3 * v * v])
    assert np.allclose(x + 2 * g(t), g(t), atol=1e-12)
    assert np.allclose(np.cross(2 * dg(t), dg(t)), 0, atol=1e-12)


def test_translate_is_never_tangent(capsys):
    assert main(["tangency", "--d", "3", "--xlast", "0.015625", "--r", "1"]) == EXIT_USAGE


def test_intersect_planar_roots(capsys):
    """H(0,1) and H((0,0.4),2) in the plane: t^2 = 2(t/2)^2 + 0.4 gives t = +-sqrt(0.8)."""
    code = main(["intersect", "--d", "2", "--c1", "0,0@1", "--c2", "0,0.4@2", "--format", "json"])
    data = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert np.allclose(sorted(data["info"]["planar_roots"]), [-np.sqrt(0.8), np.sqrt(0.8)], atol=1e-12)
    assert len(data["info"]["intersections"]) == 2


def test_exit_codes(tmp_path, capsys):
    assert main(["run", "--spec", str(tmp_path / "missing.txt")]) == EXIT_USAGE
    with pytest.raises(SystemExit) as err:
        main(["no-such-command"])
    assert err.value.code == EXIT_USAGE
    assert main(["tangency", "--d", "3", "--r", "1"]) == EXIT_USAGE
    assert main(["tube-volume", "--d", "3", "--deltas", "0.5,0.4,0.3,0.2"]) == EXIT_USAGE
    assert main(["symbol-check", "--d", "3", "--b", "10", "--ks", "4", "--samples", "20"]) == EXIT_FAIL
    bad_out = tmp_path / "nodir" / "x.csv"
    assert main(["bernstein", "--s", "1", "--p", "2", "--rs", "8", "--param", "trials=2",
                 "--out", str(bad_out)]) == EXIT_FAIL


def test_spec_kind_must_match_subcommand(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("kind = bernstein\ns = 1\np = 2\n")
    assert main(["tangency", "--spec", str(path)]) == EXIT_USAGE


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "momentlab", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "tube-volume" in res.stdout

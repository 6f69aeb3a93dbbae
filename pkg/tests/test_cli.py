import json
import os

import pytest

from kurinum import cli


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_config_precedence(monkeypatch):
    args = cli.parser().parse_args(["scan", "43.a1"])
    cfg = cli.resolve(args, env={})
    assert cfg["bound"] == (200, "default") and cfg["workers"] == (1, "default")
    cfg = cli.resolve(args, env={"KURINUM_BOUND": "300", "KURINUM_WORKERS": "2"})
    assert cfg["bound"] == (300, "env:KURINUM_BOUND") and cfg["workers"][0] == 2
    args = cli.parser().parse_args(["scan", "43.a1", "--bound", "120"])
    cfg = cli.resolve(args, env={"KURINUM_BOUND": "300"})
    assert cfg["bound"] == (120, "flag")
    args = cli.parser().parse_args(["scan", "43.a1", "--full"])
    assert cli.resolve(args, env={})["bound"][0] == 10000


def test_config_validation():
    for bad in (["--bound", "1"], ["--strata", "a,b"], ["--workers", "0"], ["--only", "7*x"]):
        args = cli.parser().parse_args(["scan", "43.a1"] + bad)
        with pytest.raises(SystemExit):
            cli.resolve(args, env={})


def test_build_cache_is_deterministic(tmp_path, capsys):
    cache = str(tmp_path / "c")
    code, out, _ = run(["build", "11.a1", "--cache", cache], capsys)
    first = json.loads(out)
    assert code == 0 and first["build"]["cache"] == "written"
    assert first["build"]["base_space"]["dimension"] == 2
    path = first["build"]["cache_path"]
    blob = open(path, "rb").read()
    code, out, _ = run(["build", "11.a1", "--cache", cache], capsys)
    assert json.loads(out)["build"]["cache"] == "hit"
    assert open(path, "rb").read() == blob
    assert first["config"]["cache"]["source"] == "flag"


def test_corrupt_cache_is_a_hard_error(tmp_path, capsys):
    cache = str(tmp_path / "c")
    run(["build", "11.a1", "--cache", cache], capsys)
    (path,) = [os.path.join(cache, f) for f in os.listdir(cache)]
    text = open(path).read()
    i = text.index('"class_values":["') + len('"class_values":["')
    open(path, "w").write(text[:i] + "9" + text[i:])
    code, _, err = run(["build", "11.a1", "--cache", cache], capsys)
    assert code == 1 and "cache" in err and "checksum" in err


def test_malformed_descriptor(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"label": "x",\n  "level": }')
    with pytest.raises(SystemExit) as exc:
        cli.main(["build", str(p), "--no-cache"])
    assert "line 2 column" in str(exc.value)


def test_scan_and_structure_round_trip(tmp_path, capsys):
    out = str(tmp_path / "s.jsonl")
    code, text, err = run(["scan", "389.a1", "--p", "3", "--no-cache", "--bound", "120",
                           "--out", out, "--report"], capsys)
    assert code == 0
    lines = text.strip().splitlines()
    inline = json.loads(lines[0])["report"]
    code, text2, _ = run(["structure", out], capsys)
    again = json.loads(text2.splitlines()[0])["report"]
    assert again == inline
    assert inline["structure"] == "(Q_3/Z_3)^2"
    first = json.loads(open(out).readline())
    assert first["config"]["bound"] == {"value": 120, "source": "flag"}


def test_scan_worker_counts_agree(tmp_path, capsys):
    outs = []
    for w in ("1", "3"):
        out = str(tmp_path / ("w%s.jsonl" % w))
        run(["scan", "43.a1", "--no-cache", "--bound", "300", "--workers", w, "--out", out,
             "--include-predicted-zero"], capsys)
        outs.append([l for l in open(out) if '"n"' in l])
    assert outs[0] == outs[1] and len(outs[0]) > 10


def test_predicted_zero_records(tmp_path, capsys):
    out = str(tmp_path / "z.jsonl")
    run(["scan", "43.a1", "--no-cache", "--bound", "150", "--out", out,
         "--include-predicted-zero", "--strata", "2"], capsys)
    recs = [json.loads(l) for l in open(out) if '"n"' in l]
    assert recs and all(r["predicted_zero"] and r["val"] == {"ge": r["In_exp"]} for r in recs)


def test_verify_suite(capsys):
    code, out, _ = run(["verify"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[-1] == "verify: PASS"
    assert sum("PASS" in l for l in lines) >= 25 and not any("FAIL" in l for l in lines)

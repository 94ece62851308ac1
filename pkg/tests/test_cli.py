import json
import os

import pytest

from artlab.cli import dispatch, emit_report, cache_roundtrip
from artlab.galmod import almost_rational_set, cyclotomic_module
from artlab.lemma2 import failure_scan
from artlab.modcurve import level_invariants


def run(capsys, *argv):
    code = dispatch(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestGoldenJson:
    def test_mu_11(self, capsys):
        code, out, _ = run(capsys, "mu", "11", "--json")
        assert code == 0
        assert out == ('{"name":"mu_11","points":11,"ar_points":[[0]],'
                       '"expected":null,"verdict":"not-checked","ms":0}\n')

    def test_lemma2_scan(self, capsys):
        code, out, _ = run(capsys, "lemma2", "scan", "--e", "1", "--max", "100", "--json")
        assert code == 0
        assert out == '{"e":1,"max":100,"failures":[1,2,3,6]}\n'

    def test_level_37_three_div_n(self, capsys):
        code, out, _ = run(capsys, "level", "37", "--json")
        assert code == 0
        assert '"three_div_n":true' in out
        obj = json.loads(out)
        assert list(obj) == ["N", "n", "genus", "hyperelliptic",
                             "plus_genus_zero", "N_mod_9", "three_div_n"]

    def test_art_report_field_order(self, capsys):
        _, out, _ = run(capsys, "theorem3", "23", "--json")
        obj = json.loads(out)
        assert list(obj) == ["name", "points", "ar_points", "expected", "verdict", "ms"]
        assert obj["verdict"] == "pass" and obj["ms"] == 0

    def test_survey_one_line_per_level(self, capsys):
        code, out, _ = run(capsys, "survey", "--from", "23", "--to", "60", "--json")
        assert code == 0
        lines = out.strip().split("\n")
        assert [json.loads(l)["N"] for l in lines] == [23, 29, 31, 37, 41, 43, 47, 53, 59]
        assert all(json.loads(l)["verdict"] == "pass" for l in lines)

    def test_empty_survey_emits_nothing(self, capsys):
        code, out, _ = run(capsys, "survey", "--from", "23", "--to", "22", "--json")
        assert code == 0 and out == ""


class TestExitCodes:
    def test_invalid_level(self, capsys):
        code, out, err = run(capsys, "level", "24")
        assert code == 2 and "not prime" in err and out == ""

    def test_invalid_mu(self, capsys):
        code, _, err = run(capsys, "mu", "0")
        assert code == 2 and "must be >= 1" in err

    def test_resource_cap_exit(self, capsys):
        code, _, err = run(capsys, "mu", "5000", "--max-points", "100")
        assert code == 3 and "exceeds" in err

    def test_closure_cap_exit(self, capsys):
        code, _, err = run(capsys, "mu", "997", "--max-closure", "10")
        assert code == 3

    def test_unknown_subcommand_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            dispatch(["frobnicate"])
        assert exc.value.code == 2

    def test_unknown_flag_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            dispatch(["mu", "11", "--nope"])
        assert exc.value.code == 2

    def test_theorem3_pass_is_zero(self, capsys):
        code, _, _ = run(capsys, "theorem3", "73", "--json")
        assert code == 0

    def test_theorem3_below_23_is_invalid(self, capsys):
        code, _, err = run(capsys, "theorem3", "19")
        assert code == 2 and "prime N >= 23" in err

    def test_bad_thread_count(self, capsys):
        code, _, err = run(capsys, "mu", "11", "--threads", "0")
        assert code == 2 and "--threads" in err


class TestAnalyze:
    def test_module_file_nested_rows(self, tmp_path, capsys):
        desc = {"name": "fused_example", "factors": [4, 2],
                "galois": [[[1, 0], [1, 1]]]}
        path = tmp_path / "module.json"
        path.write_text(json.dumps(desc))
        code, out, _ = run(capsys, "analyze", str(path), "--json")
        assert code == 0
        obj = json.loads(out)
        assert obj["name"] == "fused_example" and obj["points"] == 8

    def test_module_file_flat_matrices(self, tmp_path, capsys):
        desc = {"name": "flat", "factors": [5], "galois": [[2]]}
        path = tmp_path / "m.json"
        path.write_text(json.dumps(desc))
        code, out, _ = run(capsys, "analyze", str(path), "--json")
        assert code == 0
        assert json.loads(out)["ar_points"] == [[0]]

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "analyze", "/nonexistent/m.json")
        assert code == 2 and "cannot read" in err

    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, _, err = run(capsys, "analyze", str(path))
        assert code == 2 and "not valid JSON" in err

    def test_invalid_matrix_rejected(self, tmp_path, capsys):
        desc = {"name": "bad", "factors": [2, 4], "galois": [[[1, 0], [1, 1]]]}
        path = tmp_path / "bad_matrix.json"
        path.write_text(json.dumps(desc))
        code, _, err = run(capsys, "analyze", str(path))
        assert code == 2 and "(2,1)" in err


class TestHumanOutput:
    def test_mu_12_block(self, capsys):
        code, out, _ = run(capsys, "mu", "12")
        assert code == 0
        assert out == ("name    : mu_12\n"
                       "points  : 12\n"
                       "a.r.    : 6 point(s)\n"
                       "          (0) (2) (4) (6) (8) (10)\n"
                       "verdict : not-checked\n"
                       "ms      : 0\n")

    def test_survey_table_has_header(self, capsys):
        _, out, _ = run(capsys, "survey", "--from", "23", "--to", "31")
        lines = out.splitlines()
        assert lines[0].split() == ["N", "n", "genus", "hyper", "plus0", "N%9", "3|n", "verdict"]
        assert len(lines) == 4

    def test_pair_line(self, capsys):
        _, out, _ = run(capsys, "lemma2", "pair", "--m", "6", "--e", "1")
        assert out == "m=6 e=1: no pair\n"


class TestEmitReportDirect:
    def test_rejects_unknown_type(self):
        with pytest.raises(TypeError):
            emit_report(object(), True)

    def test_lemma2_json_shape(self):
        rep = failure_scan(2, 17)
        assert emit_report(rep, True) == \
            '{"e":2,"max":17,"failures":[1,2,3,4,5,6,7,8,10,12,14,15]}\n'

    def test_level_human_block(self):
        text = emit_report(level_invariants(23), False)
        assert "N               : 23" in text and "hyperelliptic   : true" in text

    def test_art_report_human_includes_expected(self):
        rep = almost_rational_set(cyclotomic_module(3), expected=[(0,), (1,), (2,)])
        text = emit_report(rep, False)
        assert "verdict : pass" in text and "expected: 3 point(s)" in text


class TestCache:
    def test_roundtrip_identical_bytes(self, tmp_path, capsys):
        cache = str(tmp_path / "cache")
        code1, out1, _ = run(capsys, "survey", "--from", "23", "--to", "60",
                             "--json", "--cache-dir", cache)
        files = os.listdir(cache)
        assert len(files) == 1
        code2, out2, _ = run(capsys, "survey", "--from", "23", "--to", "60",
                             "--json", "--cache-dir", cache)
        assert (code1, out1) == (code2, out2)

    def test_corrupted_entry_recomputed_with_warning(self, tmp_path, capsys):
        cache = str(tmp_path / "cache")
        _, out1, _ = run(capsys, "mu", "11", "--json", "--cache-dir", cache)
        entry = os.path.join(cache, os.listdir(cache)[0])
        with open(entry, "w") as fh:
            fh.write("{broken")
        code, out2, err = run(capsys, "mu", "11", "--json", "--cache-dir", cache)
        assert code == 0 and out2 == out1
        assert "corrupted" in err

    def test_unwritable_directory_degrades(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code, out, err = run(capsys, "mu", "11", "--json",
                             "--cache-dir", str(blocker / "sub"))
        assert code == 0 and out.startswith('{"name":"mu_11"')
        assert "uncached" in err

    def test_env_var_cache_dir(self, tmp_path, capsys, monkeypatch):
        cache = str(tmp_path / "envcache")
        monkeypatch.setenv("ARTLAB_CACHE_DIR", cache)
        run(capsys, "level", "37", "--json")
        assert len(os.listdir(cache)) == 1

    def test_version_partition(self, tmp_path):
        calls = []

        def compute():
            calls.append(1)
            return "out\n", 0

        cache = str(tmp_path)
        key_v1 = {"version": "1", "params": {"x": 1}}
        key_v2 = {"version": "2", "params": {"x": 1}}
        assert cache_roundtrip(cache, key_v1, compute) == ("out\n", 0)
        assert cache_roundtrip(cache, key_v1, compute) == ("out\n", 0)
        assert cache_roundtrip(cache, key_v2, compute) == ("out\n", 0)
        assert len(calls) == 2  # second v1 call was served from cache

    def test_exit_code_preserved_on_hit(self, tmp_path):
        cache = str(tmp_path)
        key = {"version": "1", "params": {"fail": True}}
        assert cache_roundtrip(cache, key, lambda: ("bad\n", 1)) == ("bad\n", 1)
        assert cache_roundtrip(cache, key, lambda: ("unused\n", 0)) == ("bad\n", 1)

    def test_analyze_cache_keys_on_file_content(self, tmp_path, capsys):
        cache = str(tmp_path / "cache")
        path = tmp_path / "m.json"
        path.write_text('{"name": "a", "factors": [5], "galois": [[2]]}')
        _, out1, _ = run(capsys, "analyze", str(path), "--json", "--cache-dir", cache)
        # same path, different module: must not serve the stale entry
        path.write_text('{"name": "b", "factors": [7], "galois": []}')
        _, out2, _ = run(capsys, "analyze", str(path), "--json", "--cache-dir", cache)
        assert '"name":"a"' in out1 and '"name":"b"' in out2
        assert '"points":7' in out2


class TestDeterminism:
    COMMANDS = [
        ["mu", "11", "--json"],
        ["mu", "12"],
        ["lemma2", "scan", "--e", "2", "--max", "40", "--json"],
        ["lemma2", "pair", "--m", "16", "--e", "2", "--json"],
        ["lemma2", "count", "--e", "3", "--p", "7", "--json"],
        ["lemma2", "witness", "--p", "5", "--n", "2", "--e", "1", "--json"],
        ["level", "37", "--json"],
        ["theorem3", "73", "--json"],
        ["homothety", "--m", "16", "--e", "2", "--dim", "1", "--json"],
        ["survey", "--from", "23", "--to", "60", "--json"],
        ["survey", "--from", "23", "--to", "60"],
    ]

    @pytest.mark.parametrize("argv", COMMANDS, ids=[" ".join(c) for c in COMMANDS])
    def test_run_twice_and_across_thread_counts(self, capsys, argv):
        first = run(capsys, *argv)
        second = run(capsys, *argv)
        threaded = run(capsys, *argv, "--threads", "8")
        assert first == second == threaded

import json
import subprocess
import sys

import numpy as np
import pytest

from alignkit import expand, log_soft_alignment, mas, read_matrix, write_matrix


def run_cli(*argv, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "alignkit", "--quiet", *argv],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


def stdout_json(proc):
    # The stdout contract: exactly one JSON object, nothing else.
    lines = [ln for ln in proc.stdout.splitlines() if ln]
    assert len(lines) == 1, proc.stdout
    return json.loads(lines[0])


def stderr_json(proc):
    return json.loads(proc.stderr.splitlines()[-1])


@pytest.fixture
def fixture_pair(tmp_path):
    rng = np.random.default_rng(0)
    src = rng.standard_normal((3, 8))
    trg = expand(src, [2, 1, 3])
    write_matrix(tmp_path / "src.npy", src, "f64")
    write_matrix(tmp_path / "trg.npy", trg, "f64")
    return tmp_path


class TestAlign:
    def test_recovers_fixture_durations(self, fixture_pair):
        out = fixture_pair / "dur.npy"
        proc = run_cli(
            "align",
            "--src", str(fixture_pair / "src.npy"),
            "--trg", str(fixture_pair / "trg.npy"),
            "--out", str(out),
        )
        assert proc.returncode == 0
        report = stdout_json(proc)
        assert report["durations"] == [2, 1, 3]
        assert report["t_src"] == 3 and report["t_trg"] == 6
        assert report["forward_sum_per_frame"] == pytest.approx(
            report["forward_sum"] / 6
        )
        loaded = read_matrix(out)
        assert loaded.dtype == "i64"
        np.testing.assert_array_equal(loaded.data, [2, 1, 3])

    def test_heatmap_written(self, fixture_pair):
        heatmap = fixture_pair / "a.pgm"
        proc = run_cli(
            "align",
            "--src", str(fixture_pair / "src.npy"),
            "--trg", str(fixture_pair / "trg.npy"),
            "--out", str(fixture_pair / "dur.npy"),
            "--heatmap", str(heatmap),
        )
        assert proc.returncode == 0
        assert heatmap.read_bytes().startswith(b"P5\n6 3\n255\n")

    def test_shorter_target_exits_3(self, fixture_pair, tmp_path):
        write_matrix(tmp_path / "short.npy", np.zeros((2, 8)), "f64")
        proc = run_cli(
            "align",
            "--src", str(fixture_pair / "src.npy"),
            "--trg", str(tmp_path / "short.npy"),
            "--out", str(tmp_path / "d.npy"),
        )
        assert proc.returncode == 3
        assert stderr_json(proc)["error"]["code"] == "no_feasible_path"
        assert proc.stdout == ""

    def test_dim_mismatch_exits_4(self, fixture_pair, tmp_path):
        write_matrix(tmp_path / "wide.npy", np.zeros((25, 9)), "f64")
        proc = run_cli(
            "align",
            "--src", str(fixture_pair / "src.npy"),
            "--trg", str(tmp_path / "wide.npy"),
            "--out", str(tmp_path / "d.npy"),
        )
        assert proc.returncode == 4
        assert stderr_json(proc)["error"]["code"] == "dim_mismatch"

    def test_missing_file_exits_2(self, tmp_path):
        proc = run_cli(
            "align",
            "--src", str(tmp_path / "missing.npy"),
            "--trg", str(tmp_path / "missing.npy"),
            "--out", str(tmp_path / "d.npy"),
        )
        assert proc.returncode == 2
        assert stderr_json(proc)["error"]["code"] == "io_error"

    def test_reduce_flag_stacks_source(self, tmp_path):
        rng = np.random.default_rng(8)
        narrow = rng.standard_normal((6, 4))
        from alignkit import ReductionConfig, reduce_stack

        stacked = reduce_stack(narrow, ReductionConfig(k=2))
        trg = expand(stacked, [2, 3, 2])
        write_matrix(tmp_path / "narrow.npy", narrow, "f64")
        write_matrix(tmp_path / "trg.npy", trg, "f64")
        proc = run_cli(
            "align",
            "--src", str(tmp_path / "narrow.npy"),
            "--trg", str(tmp_path / "trg.npy"),
            "--out", str(tmp_path / "d.npy"),
            "--reduce", "2",
        )
        assert proc.returncode == 0
        assert stdout_json(proc)["durations"] == [2, 3, 2]


class TestLoss:
    def test_values_and_gradients(self, tmp_path):
        rng = np.random.default_rng(1)
        la = log_soft_alignment(rng.uniform(0, 3, (3, 5)))
        path, _ = mas(la)
        write_matrix(tmp_path / "lp.npy", la.data, "f64")
        write_matrix(tmp_path / "path.npy", path.indices, "i64")
        proc = run_cli(
            "loss",
            "--log-probs", str(tmp_path / "lp.npy"),
            "--path", str(tmp_path / "path.npy"),
            "--out-forward-grad", str(tmp_path / "fg.npy"),
            "--out-kl-grad", str(tmp_path / "kg.npy"),
        )
        assert proc.returncode == 0
        report = stdout_json(proc)
        from alignkit import forward_sum, kl_hard_soft

        assert report["forward_sum"] == pytest.approx(forward_sum(la).value)
        assert report["kl_loss"] == pytest.approx(kl_hard_soft(la, path).value)
        fg = read_matrix(tmp_path / "fg.npy").data
        np.testing.assert_allclose(fg.sum(axis=0), -1.0, atol=1e-9)
        kg = read_matrix(tmp_path / "kg.npy").data
        assert kg.sum() == pytest.approx(-1.0, abs=1e-12)


class TestMetrics:
    def _write_pair_files(self, tmp_path):
        rng = np.random.default_rng(5)
        write_matrix(tmp_path / "mcc_a.npy", rng.standard_normal((20, 13)), "f64")
        f0 = rng.uniform(80, 300, 20)
        f0[::5] = 0.0
        write_matrix(tmp_path / "f0_a.npy", f0, "f64")
        write_matrix(tmp_path / "pd.npy", np.full(20, 2.0), "f64")

    def test_self_pair_is_perfect(self, tmp_path):
        self._write_pair_files(tmp_path)
        manifest = tmp_path / "m.jsonl"
        manifest.write_text(
            json.dumps(
                {
                    "mcc_x": "mcc_a.npy",
                    "mcc_y": "mcc_a.npy",
                    "f0_x": "f0_a.npy",
                    "f0_y": "f0_a.npy",
                    "pred_dur": "pd.npy",
                }
            )
            + "\n"
        )
        proc = run_cli("metrics", "--manifest", str(manifest))
        assert proc.returncode == 0
        report = stdout_json(proc)
        assert report["version"] == 1
        (result,) = report["results"]
        assert result["mcd_db"] == 0.0
        assert result["f0corr"] == 1.0
        assert result["ddur_s"] == 0.0
        assert result["dvar"] == 0.0
        assert report["aggregate"]["dvar"] == 0.0
        assert report["errors"] == []

    def test_partial_failure_keeps_batch_alive(self, tmp_path):
        self._write_pair_files(tmp_path)
        manifest = tmp_path / "m.jsonl"
        manifest.write_text(
            json.dumps({"mcc_x": "mcc_a.npy", "mcc_y": "mcc_a.npy"}) + "\n"
            + json.dumps({"mcc_x": "mcc_a.npy", "mcc_y": "missing.npy"}) + "\n"
        )
        proc = run_cli("metrics", "--manifest", str(manifest))
        assert proc.returncode == 0
        report = stdout_json(proc)
        assert len(report["results"]) == 1
        assert report["results"][0]["index"] == 0
        assert len(report["errors"]) == 1
        assert report["errors"][0]["index"] == 1
        assert report["errors"][0]["code"] == "io_error"

    def test_all_pairs_failing_is_nonzero(self, tmp_path):
        manifest = tmp_path / "m.jsonl"
        manifest.write_text(json.dumps({"mcc_x": "a.npy", "mcc_y": "b.npy"}) + "\n")
        proc = run_cli("metrics", "--manifest", str(manifest))
        assert proc.returncode == 1

    def test_frame_shift_flag(self, tmp_path):
        rng = np.random.default_rng(6)
        write_matrix(tmp_path / "x.npy", np.cumsum(rng.uniform(1, 2, (150, 3)), 0), "f64")
        write_matrix(tmp_path / "y.npy", np.cumsum(rng.uniform(1, 2, (100, 3)), 0), "f64")
        manifest = tmp_path / "m.jsonl"
        manifest.write_text(json.dumps({"mcc_x": "x.npy", "mcc_y": "y.npy"}) + "\n")
        proc = run_cli("metrics", "--manifest", str(manifest), "--frame-shift", "0.016")
        report = stdout_json(proc)
        assert report["results"][0]["ddur_s"] == pytest.approx(0.8, abs=1e-12)


class TestSelftest:
    def test_byte_identical_across_runs(self):
        args = ("--seed", "7", "selftest", "--trials", "25")
        first = subprocess.run(
            [sys.executable, "-m", "alignkit", "--quiet", *args],
            capture_output=True,
        )
        second = subprocess.run(
            [sys.executable, "-m", "alignkit", "--quiet", *args],
            capture_output=True,
        )
        assert first.returncode == 0
        assert first.stdout == second.stdout
        report = json.loads(first.stdout)
        assert report["passed"] is True
        assert report["recovery"]["rate"] >= 0.99

    def test_different_seeds_differ(self):
        outs = []
        for seed in ("3", "4"):
            proc = run_cli("--seed", seed, "selftest", "--trials", "10")
            assert proc.returncode == 0
            outs.append(proc.stdout)
        assert outs[0] != outs[1]


class TestConfigFile:
    def test_config_file_controls_pipeline(self, fixture_pair, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"use_prior": False, "omega": 2.5}))
        proc = run_cli(
            "--config", str(cfg),
            "align",
            "--src", str(fixture_pair / "src.npy"),
            "--trg", str(fixture_pair / "trg.npy"),
            "--out", str(tmp_path / "d.npy"),
        )
        assert proc.returncode == 0
        assert stdout_json(proc)["prior_applied"] is False

    def test_flag_overrides_config_file(self, fixture_pair, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"omega": 2.5}))
        proc = run_cli(
            "--config", str(cfg),
            "prior",
            "--t-src", "2",
            "--t-trg", "2",
            "--omega", "1.0",
            "--out", str(tmp_path / "p.npy"),
        )
        assert proc.returncode == 0
        assert stdout_json(proc)["omega"] == 1.0
        np.testing.assert_allclose(
            read_matrix(tmp_path / "p.npy").data,
            [[2 / 3, 1 / 3], [1 / 3, 2 / 3]],
            atol=1e-12,
        )

    def test_unknown_config_key_rejected(self, fixture_pair, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"omga": 1.0}))
        proc = run_cli(
            "--config", str(cfg),
            "align",
            "--src", str(fixture_pair / "src.npy"),
            "--trg", str(fixture_pair / "trg.npy"),
            "--out", str(tmp_path / "d.npy"),
        )
        assert proc.returncode == 1
        assert stderr_json(proc)["error"]["code"] == "invalid_parameter"


class TestVersion:
    def test_version_is_json(self):
        proc = run_cli("version")
        assert proc.returncode == 0
        report = stdout_json(proc)
        assert report["name"] == "alignkit"

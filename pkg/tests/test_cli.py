import json
import os
from pathlib import Path

import pytest

from valleyfinder.cli import PipelineConfig, main
from valleyfinder.serde import dump_json, load_json
from valleyfinder.types import FitConfig

AOL_SPEC = {
    "components": [
        {"mu": 6.7, "sigma": 2.9, "lambda": 0.70, "label": None},
        {"mu": 16.8, "sigma": 2.2, "lambda": 0.30, "label": None},
    ],
    "n_users": 80,
    "events_per_user": 40,
    "start_s": 1_400_000_000,
    "seed": 424242,
}


def run(*argv) -> int:
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory) -> Path:
    """One simulate+deltas+fit run shared by the read-only CLI tests."""
    root = tmp_path_factory.mktemp("pipeline")
    spec_path = root / "synth.json"
    dump_json(spec_path, AOL_SPEC)
    assert run("simulate", "--spec", spec_path, "--out", root / "events.csv") == 0
    assert run("deltas", "--input", root / "events.csv", "--out", root / "work") == 0
    assert (
        run(
            "fit",
            "--input",
            root / "work" / "samples.jsonl",
            "--k",
            2,
            "--seed",
            7,
            "--restarts",
            2,
            "--out",
            root / "work",
        )
        == 0
    )
    return root


class TestSimulate:
    def test_writes_ingestible_csv(self, pipeline_dir):
        text = (pipeline_dir / "events.csv").read_text()
        assert text.startswith("user_id,timestamp_s\n")
        assert len(text.splitlines()) == 1 + 80 * 40

    def test_jsonl_format(self, tmp_path):
        spec = tmp_path / "s.json"
        dump_json(spec, {**AOL_SPEC, "n_users": 2, "events_per_user": 3})
        assert run("simulate", "--spec", spec, "--format", "jsonl", "--out", tmp_path / "e.jsonl") == 0
        lines = (tmp_path / "e.jsonl").read_text().splitlines()
        assert len(lines) == 6 and json.loads(lines[0])["user_id"] == "u0000"

    def test_bad_spec_is_data_error(self, tmp_path):
        spec = tmp_path / "bad.json"
        spec.write_text('{"n_users": 1}')
        assert run("simulate", "--spec", spec, "--out", tmp_path / "e.csv") == 2


class TestDeltas:
    def test_two_event_fixture(self, tmp_path, capsys):
        events = tmp_path / "events.csv"
        events.write_text("user_id,timestamp_s\nu1,100\nu1,204\n")
        assert run("deltas", "--input", events, "--out", tmp_path / "out") == 0
        samples = [json.loads(l) for l in (tmp_path / "out" / "samples.jsonl").read_text().splitlines()]
        assert samples == [{"user_id": "u1", "delta_s": 104, "log2_delta": 6.700439718141092}]

    def test_spike_fixture_reported(self, tmp_path):
        lines = ["user_id,timestamp_s"]
        ts = 0
        for i in range(3000):  # smooth background: gaps 600..1499
            ts += 600 + (i % 900)
            lines.append(f"bg,{ts}")
        ts = 10
        for _ in range(500):  # the 18-minute automation artifact
            ts += 1080
            lines.append(f"bot,{ts}")
        events = tmp_path / "events.csv"
        events.write_text("\n".join(lines) + "\n")
        assert run("deltas", "--input", events, "--out", tmp_path / "out") == 0
        spikes = load_json(tmp_path / "out" / "spikes.json")
        assert [s["delta_s"] for s in spikes] == [1080]
        assert spikes[0]["offending_users"][0] == "bot"

    def test_missing_file(self, tmp_path, capsys):
        assert run("deltas", "--input", tmp_path / "nope.csv", "--out", tmp_path / "out") == 2
        assert "error" in capsys.readouterr().err

    def test_filter_report(self, tmp_path):
        events = tmp_path / "events.csv"
        events.write_text("user_id,timestamp_s\nu1,0\nu1,2\nu1,100\nu2,0\nu2,50\n")
        assert run("deltas", "--input", events, "--min-delta", 5, "--out", tmp_path / "out") == 0
        report = load_json(tmp_path / "out" / "filter_report.json")
        assert report["n_samples_extracted"] == 3
        assert report["n_samples_kept"] == 2
        assert report["removed"]["min_delta_s"] == 1


class TestFit:
    def test_converged_fit_written(self, pipeline_dir):
        fits = load_json(pipeline_dir / "work" / "fits.json")
        assert fits["results"][0]["k"] == 2
        fit = fits["results"][0]["fit"]
        assert fit["converged"] is True
        assert fit["seed"] == 7
        labels = [c["label"] for c in fit["components"]]
        assert labels == ["within", "between"]
        assert (pipeline_dir / "work" / "fit_k2.json").is_file()
        assert (pipeline_dir / "work" / "histogram.json").is_file()

    def test_multiple_k(self, tmp_path, pipeline_dir):
        assert (
            run(
                "fit",
                "--input",
                pipeline_dir / "work" / "samples.jsonl",
                "--k", 2, "--k", 3, "--k", 4,
                "--seed", 1,
                "--restarts", 1,
                "--out", tmp_path,
            )
            == 0
        )
        fits = load_json(tmp_path / "fits.json")
        assert [r["k"] for r in fits["results"]] == [2, 3, 4]
        assert all(r["bic"] is not None for r in fits["results"] if r["error"] is None)

    def test_too_few_samples(self, tmp_path, capsys):
        samples = tmp_path / "samples.jsonl"
        samples.write_text("\n".join('{"user_id":"u1","delta_s":%d}' % d for d in (2, 4, 8, 16, 32)))
        assert run("fit", "--input", samples, "--k", 2, "--out", tmp_path / "out") == 2
        assert "too few" in capsys.readouterr().err

    def test_env_seed_override(self, tmp_path, pipeline_dir, monkeypatch):
        monkeypatch.setenv("VALLEYFINDER_SEED", "31337")
        assert (
            run(
                "fit",
                "--input", pipeline_dir / "work" / "samples.jsonl",
                "--k", 2, "--restarts", 1,
                "--out", tmp_path,
            )
            == 0
        )
        fits = load_json(tmp_path / "fits.json")
        assert fits["results"][0]["fit"]["seed"] == 31337

    def test_flag_beats_env(self, tmp_path, pipeline_dir, monkeypatch):
        monkeypatch.setenv("VALLEYFINDER_SEED", "31337")
        assert (
            run(
                "fit",
                "--input", pipeline_dir / "work" / "samples.jsonl",
                "--k", 2, "--seed", 5, "--restarts", 1,
                "--out", tmp_path,
            )
            == 0
        )
        assert load_json(tmp_path / "fits.json")["results"][0]["fit"]["seed"] == 5

    def test_config_mode_matches_flags(self, tmp_path, pipeline_dir):
        config = PipelineConfig(
            input_path=str(pipeline_dir / "work" / "samples.jsonl"),
            input_format="samples",
            columns=None,
            filters=__import__("valleyfinder").FilterSpec(),
            fit_configs=(FitConfig(k=2, seed=7, restarts=2),),
            threshold_s=None,
            out_dir=str(tmp_path / "from_config"),
        )
        cfg_path = tmp_path / "config.json"
        dump_json(cfg_path, config.to_dict())
        assert run("fit", "--config", cfg_path) == 0
        assert (tmp_path / "from_config" / "fit_k2.json").read_bytes() == (
            pipeline_dir / "work" / "fit_k2.json"
        ).read_bytes()


class TestThreshold:
    def test_aol_like(self, pipeline_dir, tmp_path, capsys):
        assert run("threshold", "--fits", pipeline_dir / "work" / "fits.json", "--k", 2, "--out", tmp_path) == 0
        result = load_json(tmp_path / "threshold.json")
        assert 45 <= result["threshold_min"] <= 180
        valley = load_json(tmp_path / "valley.json")
        assert valley["found"] is True

    def test_symmetric_fixture(self, tmp_path):
        from valleyfinder import MixtureComponent, label_components
        from valleyfinder.serde import fit_to_dict
        from valleyfinder.types import MixtureFit

        fit = label_components(
            MixtureFit(
                components=(MixtureComponent(5.0, 2.0, 0.5), MixtureComponent(15.0, 2.0, 0.5)),
                log_likelihood=0.0,
                n=100,
                iterations=1,
                converged=True,
                seed=0,
            )
        )
        dump_json(
            tmp_path / "fits.json",
            {"results": [{"k": 2, "fit": fit_to_dict(fit), "bic": 0.0, "dbi": None, "error": None}]},
        )
        dump_json(tmp_path / "histogram.json", {"bin_width_log2": 0.25, "n_total": 0, "bins": []})
        assert run("threshold", "--fits", tmp_path / "fits.json", "--k", 2, "--out", tmp_path) == 0
        result = load_json(tmp_path / "threshold.json")
        assert result["threshold_min"] == pytest.approx(17.0667, abs=0.01)

    def test_unimodal_exit_code(self, tmp_path, capsys):
        samples = tmp_path / "samples.jsonl"
        samples.write_text(
            "\n".join('{"user_id":"u%d","delta_s":%d}' % (i, 30 + (i * 7) % 90) for i in range(200))
        )
        assert run("fit", "--input", samples, "--k", 2, "--restarts", 2, "--out", tmp_path) == 0
        code = run("threshold", "--fits", tmp_path / "fits.json", "--k", 2, "--out", tmp_path)
        assert code == 3
        assert "unimodal" in capsys.readouterr().err

    def test_missing_k(self, pipeline_dir, tmp_path):
        assert run("threshold", "--fits", pipeline_dir / "work" / "fits.json", "--k", 4, "--out", tmp_path) == 2

    def test_far_from_hour_warns(self, tmp_path, capsys):
        from valleyfinder import label_components
        from valleyfinder import MixtureComponent
        from valleyfinder.serde import fit_to_dict
        from valleyfinder.types import MixtureFit

        fit = label_components(
            MixtureFit(
                components=(MixtureComponent(12.7, 1.7, 0.10), MixtureComponent(18.5, 2.1, 0.63),
                            MixtureComponent(22.4, 1.7, 0.27)),
                log_likelihood=0.0, n=100, iterations=1, converged=True, seed=0,
            )
        )
        dump_json(tmp_path / "fits.json", {"results": [{"k": 3, "fit": fit_to_dict(fit), "error": None}]})
        dump_json(tmp_path / "histogram.json", {"bin_width_log2": 0.25, "n_total": 0, "bins": []})
        assert run("threshold", "--fits", tmp_path / "fits.json", "--k", 3, "--out", tmp_path) == 0
        assert "rule of thumb" in capsys.readouterr().err


class TestSessionize:
    def test_examples_end_to_end(self, tmp_path):
        events = tmp_path / "events.csv"
        events.write_text("user_id,timestamp_s\nu1,0\nu1,30\nu1,7500\nu1,7530\nu2,5\n")
        assert run("sessionize", "--input", events, "--out", tmp_path / "out") == 0
        sessions = [json.loads(l) for l in (tmp_path / "out" / "sessions.jsonl").read_text().splitlines()]
        assert [(s["user_id"], s["start_s"], s["n_events"]) for s in sessions] == [
            ("u1", 0, 2),
            ("u1", 7500, 2),
            ("u2", 5, 1),
        ]
        summary = load_json(tmp_path / "out" / "session_summary.json")
        assert summary["n_sessions"] == 3 and summary["n_users"] == 2

    def test_equal_gap_does_not_split(self, tmp_path):
        events = tmp_path / "events.csv"
        events.write_text("user_id,timestamp_s\nu1,0\nu1,3600\n")
        assert run("sessionize", "--input", events, "--out", tmp_path / "out") == 0
        sessions = (tmp_path / "out" / "sessions.jsonl").read_text().splitlines()
        assert len(sessions) == 1


class TestExitCodes:
    def test_usage_error_is_1(self):
        with pytest.raises(SystemExit) as exc:
            main(["fit", "--bogus-flag"])
        assert exc.value.code == 1

    def test_unknown_command_is_1(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 1


class TestDeterminism:
    def test_pipeline_byte_identical(self, tmp_path):
        spec_path = tmp_path / "synth.json"
        dump_json(spec_path, {**AOL_SPEC, "n_users": 40, "events_per_user": 30})

        def pipeline(root: Path):
            root.mkdir()
            assert run("simulate", "--spec", spec_path, "--out", root / "events.csv") == 0
            assert run("deltas", "--input", root / "events.csv", "--out", root) == 0
            assert run("fit", "--input", root / "samples.jsonl", "--k", 2, "--seed", 3,
                       "--restarts", 2, "--out", root) == 0
            assert run("threshold", "--fits", root / "fits.json", "--k", 2, "--out", root) == 0
            assert run("sessionize", "--input", root / "events.csv", "--out", root) == 0

        pipeline(tmp_path / "a")
        pipeline(tmp_path / "b")
        files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
        assert files_a == files_b and files_a
        for rel in files_a:
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes(), rel

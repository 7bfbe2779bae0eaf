"""End-to-end command-line flows driven through run(argv)."""

import dataclasses
import json

import numpy as np
import pytest

import reference
from dialectid.cli import run
from dialectid.corpus import Split, load_manifest, read_audio, write_manifest, write_wav
from dialectid.dsp import AudioSignal, MfccConfig, extract_features, read_features

SR = 16000


def records_from(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


@pytest.fixture(scope="module")
def bundle_dir(tiny_corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli-bundle") / "m1"
    code = run(
        [
            "train",
            "--manifest", tiny_corpus.manifest_path,
            "--components", "1",
            "--seed", "0",
            "--out", str(out),
        ]
    )
    assert code == 0
    return str(out)


@pytest.fixture(scope="module")
def vowel_wav(tmp_path_factory):
    rng = np.random.default_rng(0)
    path = tmp_path_factory.mktemp("cli-nasal") / "vowel.wav"
    write_wav(str(path), AudioSignal(reference.voiced_vowel(rng, SR), SR))
    return str(path)


class TestUsageErrors:
    def test_no_command(self):
        assert run([]) == 2

    def test_unknown_flag(self, tiny_corpus):
        assert run(["stats", "--manifest", tiny_corpus.manifest_path, "--bogus"]) == 2

    def test_missing_required_argument(self):
        assert run(["extract", "--audio", "x.wav"]) == 2

    def test_bad_component_list(self, tiny_corpus):
        code = run(
            ["sweep", "--manifest", tiny_corpus.manifest_path, "--components", "1,x"]
        )
        assert code == 2


class TestExtract:
    def test_binary_output_round_trips(self, tiny_corpus, tmp_path):
        wav = tiny_corpus.manifest.records[0].audio_path
        out = tmp_path / "feat.bin"
        rec_path = tmp_path / "records.jsonl"
        code = run(
            [
                "extract", "--audio", wav, "--out", str(out),
                "--format", "records", "--output", str(rec_path),
            ]
        )
        assert code == 0
        stored = read_features(str(out))
        direct = extract_features(read_audio(wav), MfccConfig())
        assert np.array_equal(stored, direct)
        (record,) = records_from(rec_path)
        assert record["num_frames"] == direct.shape[0]
        assert record["dim"] == 39

    def test_csv_output(self, tiny_corpus, tmp_path):
        wav = tiny_corpus.manifest.records[0].audio_path
        out = tmp_path / "feat.csv"
        assert run(["extract", "--audio", wav, "--out", str(out), "--csv"]) == 0
        stored = np.loadtxt(str(out), delimiter=",")
        direct = extract_features(read_audio(wav), MfccConfig())
        np.testing.assert_allclose(stored, direct, rtol=0.0, atol=1e-12)

    def test_missing_audio_is_a_data_error(self, tmp_path, capsys):
        code = run(
            ["extract", "--audio", str(tmp_path / "nope.wav"), "--out", str(tmp_path / "o")]
        )
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_config_changes_framing(self, tiny_corpus, tmp_path):
        wav = tiny_corpus.manifest.records[0].audio_path
        cfg = tmp_path / "wide.cfg"
        cfg.write_text("# wider hop\nmfcc.frame_shift_ms = 20\n")
        for name, extra in (("a", []), ("b", ["--config", str(cfg)])):
            rec = tmp_path / f"{name}.jsonl"
            code = run(
                [
                    "extract", "--audio", wav, "--out", str(tmp_path / f"{name}.bin"),
                    "--format", "records", "--output", str(rec), *extra,
                ]
            )
            assert code == 0
        default = records_from(tmp_path / "a.jsonl")[0]["num_frames"]
        wide = records_from(tmp_path / "b.jsonl")[0]["num_frames"]
        assert wide < default

    @pytest.mark.parametrize(
        "line",
        [
            "mfcc.bogus = 1",
            "train.bogus = 1",
            "nonsense.key = 1",
            "no equals sign here",
            "mfcc.num_filters = abc",
            "mfcc.num_filters = 0",
        ],
    )
    def test_bad_config_lines(self, tiny_corpus, tmp_path, line, capsys):
        wav = tiny_corpus.manifest.records[0].audio_path
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(line + "\n")
        code = run(
            [
                "extract", "--audio", wav, "--out", str(tmp_path / "o.bin"),
                "--config", str(cfg),
            ]
        )
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestTrainAndClassify:
    def test_bundle_loads_and_classifies(self, tiny_corpus, bundle_dir, tmp_path):
        lt_wav = next(
            r.audio_path
            for r in tiny_corpus.manifest.records
            if r.dialect.value == "LT" and r.split is Split.TEST
        )
        rec = tmp_path / "decision.jsonl"
        code = run(
            [
                "classify", "--bundle", bundle_dir, "--audio", lt_wav,
                "--format", "records", "--output", str(rec),
            ]
        )
        assert code == 0
        (record,) = records_from(rec)
        assert record["label"] == "LT"
        assert record["lt_score"] > record["ct_score"]
        assert record["tie"] is False

    def test_training_is_reproducible(self, tiny_corpus, tmp_path):
        outs = []
        for name in ("one", "two"):
            out = tmp_path / name
            code = run(
                [
                    "train", "--manifest", tiny_corpus.manifest_path,
                    "--components", "2", "--seed", "7", "--out", str(out),
                ]
            )
            assert code == 0
            outs.append(out)
        for piece in ("lt.gmm", "ct.gmm"):
            assert (outs[0] / piece).read_bytes() == (outs[1] / piece).read_bytes()

    def test_corrupt_bundle_is_a_data_error(self, bundle_dir, tiny_corpus, tmp_path, capsys):
        wav = tiny_corpus.manifest.records[0].audio_path
        assert run(["classify", "--bundle", str(tmp_path / "missing"), "--audio", wav]) == 1
        assert "error:" in capsys.readouterr().err


def _relabeled_manifest(manifest, tmp_path, name):
    """Copy with the first train speaker's records duplicated into test."""
    extra = [
        dataclasses.replace(r, split=Split.TEST, audio_path=r.audio_path + ".dup.wav")
        for r in manifest.records
        if r.speaker_id == manifest.records[0].speaker_id
    ]
    path = tmp_path / name
    write_manifest(type(manifest)(manifest.records + extra), str(path))
    return str(path)


class TestEvaluate:
    def test_report_records(self, tiny_corpus, bundle_dir, tmp_path):
        rec = tmp_path / "eval.jsonl"
        code = run(
            [
                "evaluate", "--bundle", bundle_dir,
                "--manifest", tiny_corpus.manifest_path,
                "--format", "records", "--output", str(rec),
            ]
        )
        assert code == 0
        records = records_from(rec)
        decisions = [r for r in records if r["type"] == "decision"]
        summary = records[-1]
        assert summary["type"] == "summary"
        assert len(decisions) == 10
        assert summary["utterances"] == 10
        assert summary["accuracy"] >= 0.95
        assert summary["tp"] + summary["fp"] + summary["fn"] + summary["tn"] == 10

    def test_text_report(self, tiny_corpus, bundle_dir, capsys):
        code = run(
            ["evaluate", "--bundle", bundle_dir, "--manifest", tiny_corpus.manifest_path]
        )
        assert code == 0
        text = capsys.readouterr().out
        assert "accuracy" in text and "confusion" in text

    def test_overlapping_speakers_refused(self, tiny_corpus, bundle_dir, tmp_path, capsys):
        bad = _relabeled_manifest(tiny_corpus.manifest, tmp_path, "overlap.tsv")
        code = run(["evaluate", "--bundle", bundle_dir, "--manifest", bad])
        assert code == 1
        assert "overlap" in capsys.readouterr().err

    def test_identical_runs_byte_identical(self, tiny_corpus, bundle_dir, tmp_path):
        outs = []
        for name in ("r1.jsonl", "r2.jsonl"):
            out = tmp_path / name
            code = run(
                [
                    "evaluate", "--bundle", bundle_dir,
                    "--manifest", tiny_corpus.manifest_path,
                    "--format", "records", "--output", str(out),
                ]
            )
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestSweep:
    def test_small_sweep_records(self, tiny_corpus, tmp_path):
        rec = tmp_path / "sweep.jsonl"
        code = run(
            [
                "sweep", "--manifest", tiny_corpus.manifest_path,
                "--components", "1,2", "--seed", "0",
                "--format", "records", "--output", str(rec),
            ]
        )
        assert code == 0
        rows = records_from(rec)
        assert [r["num_components"] for r in rows] == [1, 2]
        for row in rows:
            assert row["error"] is None
            assert row["accuracy"] >= 0.95
            assert row["seconds"] > 0.0

    def test_impossible_size_fails_row_not_run(self, tiny_corpus, tmp_path):
        rec = tmp_path / "sweep.jsonl"
        code = run(
            [
                "sweep", "--manifest", tiny_corpus.manifest_path,
                "--components", "1,100000", "--seed", "0",
                "--format", "records", "--output", str(rec),
            ]
        )
        assert code == 0
        rows = records_from(rec)
        assert rows[0]["error"] is None
        assert rows[1]["error"] is not None
        assert rows[1]["accuracy"] is None


class TestNasal:
    def test_single_segment_summary(self, vowel_wav, tmp_path):
        rec = tmp_path / "nasal.jsonl"
        code = run(
            [
                "nasal", "--audio", vowel_wav,
                "--format", "records", "--output", str(rec),
            ]
        )
        assert code == 0
        records = records_from(rec)
        summary = records[-1]
        assert summary["type"] == "summary"
        assert summary["detection_fraction"] >= 0.9
        assert abs(summary["median_peak_hz"] - 250.0) <= 30.0
        frames = [r for r in records if r["type"] == "frame"]
        assert len(frames) == summary["num_analyzed"]

    def test_segment_bounds_applied(self, vowel_wav, tmp_path):
        rec = tmp_path / "cut.jsonl"
        code = run(
            [
                "nasal", "--audio", vowel_wav, "--start", "0.25", "--end", "0.75",
                "--format", "records", "--output", str(rec),
            ]
        )
        assert code == 0
        summary = records_from(rec)[-1]
        # 0.5 s at a 10 ms hop and 20 ms window: (8000 - 320) // 160 + 1.
        assert summary["num_frames"] == 49

    def test_bad_bounds_are_a_data_error(self, vowel_wav, capsys):
        assert run(["nasal", "--audio", vowel_wav, "--start", "5.0"]) == 1
        assert "segment" in capsys.readouterr().err

    def test_spectra_dump(self, vowel_wav, tmp_path):
        dump = tmp_path / "spectra.txt"
        rec = tmp_path / "nasal.jsonl"
        code = run(
            [
                "nasal", "--audio", vowel_wav, "--end", "0.5",
                "--dump-spectra", str(dump),
                "--format", "records", "--output", str(rec),
            ]
        )
        assert code == 0
        summary = records_from(rec)[-1]
        lines = dump.read_text().splitlines()
        headers = [l for l in lines if l.startswith("# frame")]
        assert len(headers) == summary["num_analyzed"]
        freq, db = lines[1].split()
        assert float(freq) == 0.0
        assert np.isfinite(float(db))

    def test_paired_comparison(self, tmp_path):
        paths = {}
        for name, radius, seed in (("lt", 0.90, 11), ("ct", 0.97, 12)):
            rng = np.random.default_rng(seed)
            p = tmp_path / f"{name}.wav"
            write_wav(str(p), AudioSignal(reference.voiced_vowel(rng, SR, radius=radius), SR))
            paths[name] = str(p)
        rec = tmp_path / "pair.jsonl"
        code = run(
            [
                "nasal", "--lt-audio", paths["lt"], "--ct-audio", paths["ct"],
                "--format", "records", "--output", str(rec),
            ]
        )
        assert code == 0
        verdict = records_from(rec)[-1]
        assert verdict["type"] == "verdict"
        assert verdict["stronger"] == "CT"
        assert verdict["difference_db"] > 0.5

    def test_mixed_modes_rejected(self, vowel_wav, capsys):
        assert run(["nasal", "--audio", vowel_wav, "--lt-audio", vowel_wav]) == 2
        assert run(["nasal", "--lt-audio", vowel_wav]) == 2
        assert run(["nasal"]) == 2
        capsys.readouterr()

    def test_silent_audio(self, tmp_path, capsys):
        silent = tmp_path / "silent.wav"
        write_wav(str(silent), AudioSignal(np.zeros(8000), SR))
        assert run(["nasal", "--audio", str(silent)]) == 0
        assert "no analyzable frames" in capsys.readouterr().out
        code = run(["nasal", "--lt-audio", str(silent), "--ct-audio", str(silent)])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestValidateAndStats:
    def test_validate_passes(self, tiny_corpus, capsys):
        assert run(["validate", "--manifest", tiny_corpus.manifest_path]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "PASS"

    def test_validate_fails_on_overlap(self, tiny_corpus, tmp_path, capsys):
        bad = _relabeled_manifest(tiny_corpus.manifest, tmp_path, "overlap.tsv")
        assert run(["validate", "--manifest", bad]) == 1
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "FAIL"
        assert tiny_corpus.manifest.records[0].speaker_id in out

    def test_validate_records_missing_cells(self, tiny_corpus, tmp_path):
        train_only = type(tiny_corpus.manifest)(
            [r for r in tiny_corpus.manifest.records if r.split is Split.TRAIN]
        )
        path = tmp_path / "train_only.tsv"
        write_manifest(train_only, str(path))
        rec = tmp_path / "v.jsonl"
        code = run(
            ["validate", "--manifest", str(path), "--format", "records", "--output", str(rec)]
        )
        assert code == 0
        (record,) = records_from(rec)
        assert record["passed"] is True
        assert ["LT", "test"] in record["missing"]
        assert "no test data" in record["warnings"]

    def test_stats_records(self, tiny_corpus, tmp_path):
        rec = tmp_path / "stats.jsonl"
        code = run(
            [
                "stats", "--manifest", tiny_corpus.manifest_path,
                "--format", "records", "--output", str(rec),
            ]
        )
        assert code == 0
        rows = records_from(rec)
        cells = [r for r in rows if r["split"] in ("train", "test")]
        totals = [r for r in rows if r["split"] == "all"]
        assert len(cells) == 4 and len(totals) == 2
        assert sum(r["utterances"] for r in cells) == 26
        assert all(r["utterances"] == 13 for r in totals)
        assert not any(r["partial"] for r in rows)

    def test_stats_text_table(self, tiny_corpus, capsys):
        assert run(["stats", "--manifest", tiny_corpus.manifest_path]) == 0
        out = capsys.readouterr().out
        assert "Corpus totals" in out and "hours" in out


class TestSynth:
    def test_generation_and_determinism(self, tmp_path):
        args = [
            "synth", "--train-per-class", "2", "--test-per-class", "1",
            "--seconds", "0.5", "--per-speaker", "2", "--seed", "3",
        ]
        rec = tmp_path / "synth.jsonl"
        code = run(
            args + ["--out", str(tmp_path / "c"), "--format", "records", "--output", str(rec)]
        )
        assert code == 0
        (record,) = records_from(rec)
        assert record["utterances"] == 6
        manifest = load_manifest(record["manifest"])
        assert len(manifest.records) == 6
        first = (tmp_path / "c" / "manifest.tsv").read_bytes()
        assert run(args + ["--out", str(tmp_path / "c")]) == 0
        assert (tmp_path / "c" / "manifest.tsv").read_bytes() == first

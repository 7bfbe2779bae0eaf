"""Classifier tests: metrics arithmetic, training, decisions, sweep, bundles."""

import json

import numpy as np
import pytest

from dialectid.classifier import (
    ClassifierBundle,
    classify_utterance,
    evaluate,
    f1_score,
    load_bundle,
    metrics_from_counts,
    save_bundle,
    sweep_mixtures,
    train_bundle,
)
from dialectid.corpus import CorpusManifest, Split, load_manifest, read_audio
from dialectid.dsp import MfccConfig, extract_features
from dialectid.errors import (
    DialectIdError,
    EmptyTestSetError,
    MissingDialectError,
)
from dialectid.gmm import GmmModel, TrainConfig
from dialectid.labels import DialectLabel


@pytest.fixture(scope="module")
def bundle_m1(tiny_corpus):
    return train_bundle(
        tiny_corpus.manifest, MfccConfig(), TrainConfig(num_components=1, rng_seed=0)
    )


class TestMetrics:
    def test_perfect_counts(self):
        assert metrics_from_counts(10, 0, 0, 10) == (1.0, 1.0, 1.0, 1.0)

    def test_hand_computed_counts(self):
        accuracy, precision, recall, f1 = metrics_from_counts(8, 2, 1, 9)
        assert accuracy == pytest.approx(0.85)
        assert precision == pytest.approx(0.8)
        assert recall == pytest.approx(8.0 / 9.0)
        assert f1 == pytest.approx(0.8421052631578948)

    def test_zero_denominators_give_zero(self):
        accuracy, precision, recall, f1 = metrics_from_counts(0, 0, 0, 5)
        assert (accuracy, precision, recall, f1) == (1.0, 0.0, 0.0, 0.0)

    def test_published_precision_recall_pair(self):
        assert round(f1_score(0.82, 0.89), 2) == 0.85

    def test_f1_between_min_and_max(self):
        rng = np.random.default_rng(50)
        for _ in range(100):
            tp, fp, fn, tn = (int(v) for v in rng.integers(0, 50, 4))
            if tp + fp + fn + tn == 0:
                continue
            _, precision, recall, f1 = metrics_from_counts(tp, fp, fn, tn)
            assert 0.0 <= f1 <= 1.0
            assert f1 <= max(precision, recall) + 1e-12
            if precision > 0 and recall > 0:
                assert f1 >= min(precision, recall) - 1e-12

    def test_empty_matrix_rejected(self):
        with pytest.raises(ValueError):
            metrics_from_counts(0, 0, 0, 0)


class TestTraining:
    def test_single_component_closed_form(self, tiny_corpus):
        records = [
            tiny_corpus.manifest.subset(DialectLabel.LT, Split.TRAIN)[0],
            tiny_corpus.manifest.subset(DialectLabel.CT, Split.TRAIN)[0],
        ]
        manifest = CorpusManifest(records)
        cfg = MfccConfig()
        bundle = train_bundle(manifest, cfg, TrainConfig(num_components=1))
        for model, record in zip((bundle.lt_model, bundle.ct_model), records):
            frames = extract_features(read_audio(record.audio_path), cfg)
            assert np.allclose(model.means[0], frames.mean(axis=0), atol=1e-10)
            assert np.allclose(model.variances[0], frames.var(axis=0), atol=1e-10)
            assert model.weights[0] == 1.0

    def test_dialect_models_differ(self, bundle_m1):
        gap = np.linalg.norm(bundle_m1.lt_model.means - bundle_m1.ct_model.means)
        assert gap > 0.0

    def test_missing_dialect_rejected(self, tiny_corpus):
        lt_only = CorpusManifest(tiny_corpus.manifest.subset(DialectLabel.LT))
        with pytest.raises(MissingDialectError):
            train_bundle(lt_only, MfccConfig(), TrainConfig(num_components=1))

    def test_mismatched_models_rejected(self):
        m1 = GmmModel([1.0], [[0.0] * 39], [[1.0] * 39])
        m2 = GmmModel([1.0], [[0.0] * 12], [[1.0] * 12])
        with pytest.raises(ValueError):
            ClassifierBundle(m1, m2, MfccConfig(), TrainConfig(num_components=1))


class TestDecisions:
    def test_identical_models_tie_to_lt(self, tiny_corpus, bundle_m1):
        symmetric = ClassifierBundle(
            bundle_m1.lt_model,
            bundle_m1.lt_model,
            bundle_m1.feature_config,
            bundle_m1.train_config,
        )
        record = tiny_corpus.manifest.subset(DialectLabel.CT, Split.TEST)[0]
        decision = classify_utterance(symmetric, read_audio(record.audio_path))
        assert decision.tie
        assert decision.label is DialectLabel.LT
        assert decision.lt_score == decision.ct_score

    def test_held_out_utterances_score_their_own_model_higher(self, tiny_corpus, bundle_m1):
        lt_rec = tiny_corpus.manifest.subset(DialectLabel.LT, Split.TEST)[0]
        decision = classify_utterance(bundle_m1, read_audio(lt_rec.audio_path))
        assert decision.label is DialectLabel.LT
        assert decision.lt_score > decision.ct_score

    def test_swapping_models_inverts_decisions(self, tiny_corpus, bundle_m1):
        swapped = ClassifierBundle(
            bundle_m1.ct_model,
            bundle_m1.lt_model,
            bundle_m1.feature_config,
            bundle_m1.train_config,
        )
        for record in tiny_corpus.manifest.subset(split=Split.TEST)[:6]:
            signal = read_audio(record.audio_path)
            a = classify_utterance(bundle_m1, signal)
            b = classify_utterance(swapped, signal)
            assert not a.tie
            assert b.label is not a.label
            assert b.lt_score == a.ct_score and b.ct_score == a.lt_score

    def test_total_and_per_frame_average_agree(self, tiny_corpus, bundle_m1):
        # same frame count under both models, so the argmax is scale-invariant
        record = tiny_corpus.manifest.subset(DialectLabel.CT, Split.TEST)[1]
        signal = read_audio(record.audio_path)
        decision = classify_utterance(bundle_m1, signal)
        frames = extract_features(signal, bundle_m1.feature_config).shape[0]
        avg_label = (
            DialectLabel.LT
            if decision.lt_score / frames >= decision.ct_score / frames
            else DialectLabel.CT
        )
        assert avg_label is decision.label


class TestEvaluate:
    def test_synthetic_corpus_is_separable(self, tiny_corpus, bundle_m1):
        report = evaluate(bundle_m1, tiny_corpus.manifest)
        total = (
            report.true_positives
            + report.false_positives
            + report.false_negatives
            + report.true_negatives
        )
        assert total == len(tiny_corpus.manifest.subset(split=Split.TEST))
        assert len(report.decisions) == total
        assert report.accuracy >= 0.95
        want = metrics_from_counts(
            report.true_positives,
            report.false_positives,
            report.false_negatives,
            report.true_negatives,
        )
        assert (report.accuracy, report.precision, report.recall, report.f1) == want

    def test_symmetric_bundle_accuracy_is_lt_fraction(self, tiny_corpus, bundle_m1):
        symmetric = ClassifierBundle(
            bundle_m1.lt_model,
            bundle_m1.lt_model,
            bundle_m1.feature_config,
            bundle_m1.train_config,
        )
        report = evaluate(symmetric, tiny_corpus.manifest)
        test_records = tiny_corpus.manifest.subset(split=Split.TEST)
        lt_fraction = sum(
            r.dialect is DialectLabel.LT for r in test_records
        ) / len(test_records)
        assert all(d.tie and d.predicted is DialectLabel.LT for d in report.decisions)
        assert report.accuracy == pytest.approx(lt_fraction)

    def test_no_test_utterances_rejected(self, tiny_corpus, bundle_m1):
        train_only = CorpusManifest(tiny_corpus.manifest.subset(split=Split.TRAIN))
        with pytest.raises(EmptyTestSetError):
            evaluate(bundle_m1, train_only)


class TestSweep:
    def test_single_count(self, tiny_corpus):
        rows = sweep_mixtures(
            tiny_corpus.manifest,
            tiny_corpus.manifest,
            MfccConfig(),
            TrainConfig(num_components=1, rng_seed=0),
            [1],
        )
        assert len(rows) == 1
        assert rows[0].num_components == 1
        assert rows[0].error is None
        assert rows[0].accuracy >= 0.95
        assert rows[0].seconds >= 0.0

    def test_repeated_count_is_bit_identical(self, tiny_corpus):
        rows = sweep_mixtures(
            tiny_corpus.manifest,
            tiny_corpus.manifest,
            MfccConfig(),
            TrainConfig(num_components=1, rng_seed=0),
            [4, 4],
        )
        assert rows[0].accuracy == rows[1].accuracy

    def test_oversized_count_fails_gracefully(self, tiny_corpus):
        rows = sweep_mixtures(
            tiny_corpus.manifest,
            tiny_corpus.manifest,
            MfccConfig(),
            TrainConfig(num_components=1, rng_seed=0),
            [2, 10**5],
        )
        assert rows[0].error is None and rows[0].accuracy is not None
        assert rows[1].error is not None and rows[1].accuracy is None

    def test_empty_counts_rejected(self, tiny_corpus):
        with pytest.raises(ValueError):
            sweep_mixtures(
                tiny_corpus.manifest,
                tiny_corpus.manifest,
                MfccConfig(),
                TrainConfig(num_components=1),
                [],
            )


class TestBundlePersistence:
    def test_round_trip(self, tmp_path, bundle_m1):
        out = tmp_path / "bundle"
        save_bundle(bundle_m1, out)
        back = load_bundle(out)
        assert np.array_equal(back.lt_model.means, bundle_m1.lt_model.means)
        assert np.array_equal(back.ct_model.variances, bundle_m1.ct_model.variances)
        assert back.feature_config == bundle_m1.feature_config
        assert back.train_config == bundle_m1.train_config

    def test_unrecognized_descriptor_rejected(self, tmp_path, bundle_m1):
        out = tmp_path / "bundle"
        save_bundle(bundle_m1, out)
        desc = out / "bundle.json"
        blob = json.loads(desc.read_text(encoding="utf-8"))
        blob["format"] = "something-else"
        desc.write_text(json.dumps(blob), encoding="utf-8")
        with pytest.raises(DialectIdError):
            load_bundle(out)

    def test_corrupt_descriptor_rejected(self, tmp_path, bundle_m1):
        out = tmp_path / "bundle"
        save_bundle(bundle_m1, out)
        (out / "bundle.json").write_text("{not json", encoding="utf-8")
        with pytest.raises(DialectIdError):
            load_bundle(out)

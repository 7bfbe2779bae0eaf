"""Two-dialect maximum-likelihood classification.

One diagonal GMM per dialect, trained on pooled CMS-normalized feature
frames from that dialect's training utterances. A test utterance goes to
whichever model assigns it the higher total log-likelihood; an exact tie
goes to LT and is flagged. LT is the positive class for precision/recall.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, replace

import numpy as np

from .corpus import CorpusManifest, Split, read_audio
from .dsp import AudioSignal, MfccConfig, extract_features, extract_segment
from .errors import EmptyTestSetError, DialectIdError, MissingDialectError
from .gmm import GmmModel, TrainConfig, em_fit, load_model, log_likelihood_sequence, save_model
from .labels import DialectLabel

BUNDLE_DESCRIPTOR = "bundle.json"
_LT_MODEL_NAME = "lt.gmm"
_CT_MODEL_NAME = "ct.gmm"


@dataclass(eq=False)
class ClassifierBundle:
    lt_model: GmmModel
    ct_model: GmmModel
    feature_config: MfccConfig
    train_config: TrainConfig

    def __post_init__(self):
        if self.lt_model.dim != self.ct_model.dim:
            raise ValueError("dialect models disagree on feature dimension")
        if self.lt_model.num_components != self.ct_model.num_components:
            raise ValueError("dialect models disagree on mixture size")
        if self.lt_model.dim != 3 * self.feature_config.num_cepstra:
            raise ValueError(
                f"models are {self.lt_model.dim}-dimensional but the feature "
                f"config produces {3 * self.feature_config.num_cepstra} dims"
            )


@dataclass
class Decision:
    label: DialectLabel
    lt_score: float
    ct_score: float
    tie: bool


@dataclass
class UtteranceDecision:
    audio_path: str
    speaker_id: str
    true_label: DialectLabel
    predicted: DialectLabel
    lt_score: float
    ct_score: float
    tie: bool


@dataclass
class EvalReport:
    """Confusion counts with LT as the positive class, plus derived metrics."""

    true_positives: int
    false_positives: int
    false_negatives: int
    true_negatives: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    decisions: list[UtteranceDecision]


@dataclass
class SweepRow:
    num_components: int
    accuracy: float | None
    seconds: float
    error: str | None = None


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def metrics_from_counts(tp: int, fp: int, fn: int, tn: int):
    """(accuracy, precision, recall, f1) with the usual 0/0 -> 0 conventions."""
    total = tp + fp + fn + tn
    if total < 1:
        raise ValueError("empty confusion matrix")
    accuracy = (tp + tn) / total
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return accuracy, precision, recall, f1_score(precision, recall)


def _pooled_training_frames(
    manifest: CorpusManifest, dialect: DialectLabel, feature_config: MfccConfig
) -> np.ndarray:
    records = manifest.subset(dialect, Split.TRAIN)
    if not records:
        raise MissingDialectError(f"no {dialect.value} training utterances in manifest")
    blocks = []
    for rec in records:
        signal = read_audio(rec.audio_path)
        if rec.segment is not None:
            signal = extract_segment(signal, *rec.segment)
        blocks.append(extract_features(signal, feature_config))
    return np.vstack(blocks)


def train_bundle(
    train_manifest: CorpusManifest,
    feature_config: MfccConfig,
    train_config: TrainConfig,
) -> ClassifierBundle:
    """Fit one GMM per dialect on that dialect's pooled training frames."""
    lt_frames = _pooled_training_frames(train_manifest, DialectLabel.LT, feature_config)
    ct_frames = _pooled_training_frames(train_manifest, DialectLabel.CT, feature_config)
    lt_model, _ = em_fit(lt_frames, train_config)
    ct_model, _ = em_fit(ct_frames, train_config)
    return ClassifierBundle(lt_model, ct_model, feature_config, train_config)


def _decide(lt_model: GmmModel, ct_model: GmmModel, features: np.ndarray) -> Decision:
    lt = log_likelihood_sequence(lt_model, features)
    ct = log_likelihood_sequence(ct_model, features)
    tie = lt == ct
    label = DialectLabel.LT if lt >= ct else DialectLabel.CT
    return Decision(label, lt, ct, tie)


def classify_utterance(bundle: ClassifierBundle, signal: AudioSignal) -> Decision:
    """Score one utterance under both dialect models and pick the argmax."""
    features = extract_features(signal, bundle.feature_config)
    return _decide(bundle.lt_model, bundle.ct_model, features)


def evaluate(bundle: ClassifierBundle, test_manifest: CorpusManifest) -> EvalReport:
    """Classify every test utterance in the manifest and tally metrics.

    Assumes train/test speaker disjointness has already been checked
    (validate_split); this function only consumes split == test records.
    """
    records = test_manifest.subset(split=Split.TEST)
    if not records:
        raise EmptyTestSetError("manifest has no test utterances")
    decisions = []
    tp = fp = fn = tn = 0
    for rec in records:
        signal = read_audio(rec.audio_path)
        if rec.segment is not None:
            signal = extract_segment(signal, *rec.segment)
        d = classify_utterance(bundle, signal)
        decisions.append(
            UtteranceDecision(
                rec.audio_path, rec.speaker_id, rec.dialect,
                d.label, d.lt_score, d.ct_score, d.tie,
            )
        )
        if rec.dialect is DialectLabel.LT:
            if d.label is DialectLabel.LT:
                tp += 1
            else:
                fn += 1
        else:
            if d.label is DialectLabel.LT:
                fp += 1
            else:
                tn += 1
    accuracy, precision, recall, f1 = metrics_from_counts(tp, fp, fn, tn)
    return EvalReport(tp, fp, fn, tn, accuracy, precision, recall, f1, decisions)


def sweep_mixtures(
    train_manifest: CorpusManifest,
    test_manifest: CorpusManifest,
    feature_config: MfccConfig,
    base_train_config: TrainConfig,
    component_counts: list[int] | None = None,
) -> list[SweepRow]:
    """Accuracy as a function of mixture size, one row per count.

    Features are extracted once and shared across rows. A row that fails
    (for example, fewer frames than components) is recorded with its error
    message and the sweep moves on.
    """
    counts = list(component_counts) if component_counts is not None else [16, 32, 64, 128, 256]
    if not counts:
        raise ValueError("component_counts must be non-empty")
    if any(c < 1 for c in counts):
        raise ValueError("component counts must be positive")

    pooled = {
        d: _pooled_training_frames(train_manifest, d, feature_config)
        for d in DialectLabel
    }
    test_records = test_manifest.subset(split=Split.TEST)
    if not test_records:
        raise EmptyTestSetError("manifest has no test utterances")
    test_features = []
    for rec in test_records:
        signal = read_audio(rec.audio_path)
        if rec.segment is not None:
            signal = extract_segment(signal, *rec.segment)
        test_features.append((rec, extract_features(signal, feature_config)))

    rows = []
    for count in counts:
        start = time.perf_counter()
        try:
            config = replace(base_train_config, num_components=count)
            lt_model, _ = em_fit(pooled[DialectLabel.LT], config)
            ct_model, _ = em_fit(pooled[DialectLabel.CT], config)
            tp = fp = fn = tn = 0
            for rec, features in test_features:
                d = _decide(lt_model, ct_model, features)
                if rec.dialect is DialectLabel.LT:
                    tp += d.label is DialectLabel.LT
                    fn += d.label is DialectLabel.CT
                else:
                    fp += d.label is DialectLabel.LT
                    tn += d.label is DialectLabel.CT
            accuracy = metrics_from_counts(tp, fp, fn, tn)[0]
            rows.append(SweepRow(count, accuracy, time.perf_counter() - start))
        except DialectIdError as exc:
            rows.append(SweepRow(count, None, time.perf_counter() - start, str(exc)))
    return rows


def save_bundle(bundle: ClassifierBundle, directory) -> None:
    """Persist as lt.gmm + ct.gmm + a JSON descriptor with both configs."""
    os.makedirs(directory, exist_ok=True)
    save_model(bundle.lt_model, os.path.join(directory, _LT_MODEL_NAME))
    save_model(bundle.ct_model, os.path.join(directory, _CT_MODEL_NAME))
    descriptor = {
        "format": "dialectid-bundle",
        "version": 1,
        "lt_model": _LT_MODEL_NAME,
        "ct_model": _CT_MODEL_NAME,
        "feature_config": asdict(bundle.feature_config),
        "train_config": asdict(bundle.train_config),
    }
    with open(os.path.join(directory, BUNDLE_DESCRIPTOR), "w", encoding="utf-8") as fh:
        json.dump(descriptor, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_bundle(directory) -> ClassifierBundle:
    path = os.path.join(directory, BUNDLE_DESCRIPTOR)
    try:
        with open(path, encoding="utf-8") as fh:
            descriptor = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DialectIdError(f"{path}: invalid bundle descriptor ({exc})") from None
    if descriptor.get("format") != "dialectid-bundle" or descriptor.get("version") != 1:
        raise DialectIdError(f"{path}: not a recognized bundle descriptor")
    try:
        feature_config = MfccConfig(**descriptor["feature_config"])
        train_config = TrainConfig(**descriptor["train_config"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DialectIdError(f"{path}: bad config in descriptor ({exc})") from None
    lt_model = load_model(os.path.join(directory, descriptor["lt_model"]))
    ct_model = load_model(os.path.join(directory, descriptor["ct_model"]))
    return ClassifierBundle(lt_model, ct_model, feature_config, train_config)

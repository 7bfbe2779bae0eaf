"""Corpus manifests, WAV reading, split validation, and corpus statistics.

A manifest is a UTF-8 tab-separated file, one utterance per line:

    audio_path<TAB>speaker_id<TAB>dialect<TAB>gender<TAB>split[<TAB>start_s<TAB>end_s]

dialect is LT or CT, gender is male/female/unspecified, split is train/test,
and the optional trailing pair marks a segment of interest in seconds.
Lines starting with '#' and blank lines are ignored. Relative audio paths
are resolved against the manifest's own directory.

Audio must be RIFF WAV, PCM, 16-bit, mono, 16 kHz. Anything else is
rejected outright; there is no resampling or downmixing.
"""

from __future__ import annotations

import os
import wave
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dsp import CANONICAL_SAMPLE_RATE, AudioSignal
from .errors import AudioFormatError, ManifestError, SampleRateMismatch
from .labels import DialectLabel


class Gender(str, Enum):
    MALE = "male"
    FEMALE = "female"
    UNSPECIFIED = "unspecified"


class Split(str, Enum):
    TRAIN = "train"
    TEST = "test"


@dataclass(frozen=True)
class UtteranceRecord:
    audio_path: str
    speaker_id: str
    dialect: DialectLabel
    gender: Gender
    split: Split
    segment: tuple[float, float] | None = None

    def __post_init__(self):
        if not self.audio_path:
            raise ValueError("audio_path must be non-empty")
        if not self.speaker_id:
            raise ValueError("speaker_id must be non-empty")
        if self.segment is not None:
            start, end = self.segment
            if not 0.0 <= start < end:
                raise ValueError(f"bad segment ({start}, {end}): need 0 <= start < end")


@dataclass
class CorpusManifest:
    records: list[UtteranceRecord]

    def __post_init__(self):
        seen: set[str] = set()
        for rec in self.records:
            if rec.audio_path in seen:
                raise ManifestError(f"duplicate audio_path: {rec.audio_path}")
            seen.add(rec.audio_path)

    def subset(self, dialect: DialectLabel | None = None, split: Split | None = None):
        out = [
            r
            for r in self.records
            if (dialect is None or r.dialect is dialect)
            and (split is None or r.split is split)
        ]
        return out


def _parse_enum(enum_cls, token: str, what: str, lineno: int):
    try:
        return enum_cls(token)
    except ValueError:
        valid = "/".join(e.value for e in enum_cls)
        raise ManifestError(
            f"line {lineno}: unknown {what} {token!r} (expected {valid})"
        ) from None


def load_manifest(path) -> CorpusManifest:
    """Parse a manifest file; errors name the offending line number."""
    base = os.path.dirname(os.path.abspath(path))
    records: list[UtteranceRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in (5, 7):
                raise ManifestError(
                    f"line {lineno}: expected 5 or 7 tab-separated fields, "
                    f"got {len(parts)}"
                )
            audio_path = parts[0].strip()
            if not audio_path:
                raise ManifestError(f"line {lineno}: empty audio_path")
            if not os.path.isabs(audio_path):
                audio_path = os.path.normpath(os.path.join(base, audio_path))
            speaker = parts[1].strip()
            if not speaker:
                raise ManifestError(f"line {lineno}: empty speaker_id")
            dialect = _parse_enum(DialectLabel, parts[2].strip(), "dialect", lineno)
            gender = _parse_enum(Gender, parts[3].strip(), "gender", lineno)
            split = _parse_enum(Split, parts[4].strip(), "split", lineno)
            segment = None
            if len(parts) == 7:
                try:
                    segment = (float(parts[5]), float(parts[6]))
                except ValueError:
                    raise ManifestError(
                        f"line {lineno}: segment bounds must be numbers"
                    ) from None
            try:
                rec = UtteranceRecord(audio_path, speaker, dialect, gender, split, segment)
            except ValueError as exc:
                raise ManifestError(f"line {lineno}: {exc}") from None
            records.append(rec)
    try:
        return CorpusManifest(records)
    except ManifestError as exc:
        raise ManifestError(f"{path}: {exc}") from None


def write_manifest(manifest: CorpusManifest, path) -> None:
    """Write a manifest that load_manifest reads back to equal records."""
    lines = []
    for r in manifest.records:
        fields = [r.audio_path, r.speaker_id, r.dialect.value, r.gender.value, r.split.value]
        if r.segment is not None:
            fields += [repr(r.segment[0]), repr(r.segment[1])]
        lines.append("\t".join(fields))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
        if lines:
            fh.write("\n")


def read_audio(path) -> AudioSignal:
    """Read a 16-bit PCM mono 16 kHz WAV file into [-1, 1) float samples."""
    try:
        wf = wave.open(str(path), "rb")
    except wave.Error as exc:
        raise AudioFormatError(f"{path}: not a readable PCM WAV file ({exc})") from None
    except EOFError:
        raise AudioFormatError(f"{path}: truncated WAV file") from None
    with wf:
        if wf.getcomptype() != "NONE":
            raise AudioFormatError(f"{path}: compressed WAV is not supported")
        if wf.getnchannels() != 1:
            raise AudioFormatError(
                f"{path}: {wf.getnchannels()} channels, expected mono (no downmixing)"
            )
        if wf.getsampwidth() != 2:
            raise AudioFormatError(
                f"{path}: {8 * wf.getsampwidth()}-bit samples, expected 16-bit PCM"
            )
        rate = wf.getframerate()
        if rate != CANONICAL_SAMPLE_RATE:
            raise SampleRateMismatch(
                f"{path}: {rate} Hz, require {CANONICAL_SAMPLE_RATE} Hz (no resampling)"
            )
        raw = wf.readframes(wf.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return AudioSignal(samples, rate)


def write_wav(path, signal: AudioSignal) -> None:
    """Write mono 16-bit PCM. Samples are clipped to the int16 range."""
    scaled = np.clip(np.rint(signal.samples * 32768.0), -32768, 32767)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(signal.sample_rate)
        wf.writeframes(scaled.astype("<i2").tobytes())


def audio_duration_s(path) -> float:
    """Duration from the WAV header alone; cheap enough for whole corpora."""
    try:
        with wave.open(str(path), "rb") as wf:
            rate = wf.getframerate()
            if rate <= 0:
                raise AudioFormatError(f"{path}: invalid sample rate in header")
            return wf.getnframes() / rate
    except (wave.Error, EOFError) as exc:
        raise AudioFormatError(f"{path}: unreadable WAV header ({exc})") from None


@dataclass
class SplitReport:
    """Result of checking train/test speaker discipline."""

    passed: bool
    overlapping_speakers: list[str]
    missing: list[tuple[DialectLabel, Split]]
    warnings: list[str]


def validate_split(manifest: CorpusManifest) -> SplitReport:
    """Report speakers appearing in both splits plus dialect coverage gaps.

    The manifest passes only when no speaker is shared between train and
    test. Missing (dialect, split) combinations are reported but do not
    fail validation on their own.
    """
    train = {r.speaker_id for r in manifest.records if r.split is Split.TRAIN}
    test = {r.speaker_id for r in manifest.records if r.split is Split.TEST}
    overlap = sorted(train & test)

    missing = []
    for dialect in DialectLabel:
        for split in Split:
            if not manifest.subset(dialect, split):
                missing.append((dialect, split))

    warnings = []
    if not test:
        warnings.append("no test data")
    if not train:
        warnings.append("no train data")
    for dialect, split in missing:
        if (split is Split.TEST and test) or (split is Split.TRAIN and train):
            warnings.append(f"no {dialect.value} {split.value} data")
    return SplitReport(not overlap, overlap, missing, warnings)


@dataclass
class CellStats:
    utterances: int = 0
    duration_hours: float = 0.0
    speakers: int = 0
    male_speakers: int = 0
    female_speakers: int = 0
    unreadable: list[str] = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return bool(self.unreadable)


@dataclass
class CorpusStats:
    """Durations and speaker counts per (dialect, split) and per dialect."""

    cells: dict[tuple[DialectLabel, Split], CellStats]
    dialect_totals: dict[DialectLabel, CellStats]


def _stats_of(records: list[UtteranceRecord], durations: dict[str, float | None]) -> CellStats:
    cell = CellStats()
    speakers: dict[str, set[Gender]] = {}
    for r in records:
        cell.utterances += 1
        d = durations[r.audio_path]
        if d is None:
            cell.unreadable.append(r.audio_path)
        else:
            cell.duration_hours += d / 3600.0
        speakers.setdefault(r.speaker_id, set()).add(r.gender)
    cell.speakers = len(speakers)
    cell.male_speakers = sum(1 for g in speakers.values() if Gender.MALE in g)
    cell.female_speakers = sum(1 for g in speakers.values() if Gender.FEMALE in g)
    return cell


def corpus_stats(manifest: CorpusManifest) -> CorpusStats:
    """Header-derived durations and speaker counts; unreadable files are
    listed in their cells rather than aborting the whole scan."""
    durations: dict[str, float | None] = {}
    for r in manifest.records:
        if r.audio_path not in durations:
            try:
                durations[r.audio_path] = audio_duration_s(r.audio_path)
            except (AudioFormatError, OSError):
                durations[r.audio_path] = None
    cells = {}
    for dialect in DialectLabel:
        for split in Split:
            cells[(dialect, split)] = _stats_of(manifest.subset(dialect, split), durations)
    totals = {
        dialect: _stats_of(manifest.subset(dialect), durations)
        for dialect in DialectLabel
    }
    return CorpusStats(cells, totals)


def hours_to_hms(hours: float) -> str:
    total = int(round(hours * 3600.0))
    return f"{total // 3600}:{(total % 3600) // 60:02d}:{total % 60:02d}"


def format_stats(stats: CorpusStats) -> str:
    """Aligned text tables: per-dialect totals, then the split breakdown."""
    out = ["Corpus totals"]
    header = f"  {'metric':<18}" + "".join(f"{d.value:>12}" for d in DialectLabel)
    out.append(header)
    rows = [
        ("hours", lambda c: f"{c.duration_hours:.2f}"),
        ("h:mm:ss", lambda c: hours_to_hms(c.duration_hours)),
        ("utterances", lambda c: str(c.utterances)),
        ("speakers", lambda c: str(c.speakers)),
        ("male spk", lambda c: str(c.male_speakers)),
        ("female spk", lambda c: str(c.female_speakers)),
        ("partial", lambda c: "yes" if c.partial else "no"),
    ]
    for name, fmt in rows:
        out.append(
            f"  {name:<18}"
            + "".join(f"{fmt(stats.dialect_totals[d]):>12}" for d in DialectLabel)
        )
    out.append("")
    out.append("Split breakdown")
    out.append(
        f"  {'metric':<18}{'split':<8}" + "".join(f"{d.value:>12}" for d in DialectLabel)
    )
    for split in Split:
        for name, fmt in rows:
            out.append(
                f"  {name:<18}{split.value:<8}"
                + "".join(f"{fmt(stats.cells[(d, split)]):>12}" for d in DialectLabel)
            )
    return "\n".join(out)


def stats_records(stats: CorpusStats) -> list[dict]:
    """One structured record per (dialect, split) cell plus dialect totals."""

    def rec(cell: CellStats, dialect: DialectLabel, split: str) -> dict:
        return {
            "dialect": dialect.value,
            "split": split,
            "utterances": cell.utterances,
            "duration_hours": cell.duration_hours,
            "duration_hms": hours_to_hms(cell.duration_hours),
            "speakers": cell.speakers,
            "male_speakers": cell.male_speakers,
            "female_speakers": cell.female_speakers,
            "partial": cell.partial,
            "unreadable": sorted(cell.unreadable),
        }

    out = []
    for dialect in DialectLabel:
        for split in Split:
            out.append(rec(stats.cells[(dialect, split)], dialect, split.value))
    for dialect in DialectLabel:
        out.append(rec(stats.dialect_totals[dialect], dialect, "all"))
    return out

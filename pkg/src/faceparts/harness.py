"""Dataset model and the subject-independent evaluation protocol.

A protocol run draws the evaluation subjects (disjoint from the
fine-tuning subjects), repeats n_tests times: partition subjects into
folds, fit the classification stage (PCA + standardization + SVM by
default) on the training folds only, and score the held-out fold. All
randomness derives from the single protocol seed, so a rerun reproduces
the report byte for byte.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BadFoldCount, LengthMismatch, SingleClass, TooFewSubjects
from .pca import pca_fit, pca_transform
from .svm import KernelParams, svm_predict_many, svm_train_multiclass

EXPRESSIONS = ("Angry", "Disgust", "Fear", "Happy", "Sad", "Surprise")
EXPRESSION_INDEX = {name: i for i, name in enumerate(EXPRESSIONS)}
NEUTRAL = "Neutral"

MANIFEST_FIELDS = ("subject_id", "expression", "intensity",
                   "texture_path", "depth_path", "landmarks_path")


@dataclass(frozen=True)
class SampleRecord:
    subject_id: str
    expression: str
    intensity: int
    texture_path: str
    depth_path: str
    landmarks_path: str
    features: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.expression not in EXPRESSIONS and self.expression != NEUTRAL:
            raise ValueError(f"unknown expression label {self.expression!r}")
        if self.intensity not in (1, 2, 3, 4):
            raise ValueError(f"intensity {self.intensity} outside 1..4")

    @property
    def label(self) -> int:
        return EXPRESSION_INDEX[self.expression]

    @property
    def sample_id(self) -> str:
        return f"{self.subject_id}_{self.expression}_{self.intensity}"


def read_manifest(path) -> list[SampleRecord]:
    """Read a dataset manifest; relative paths resolve against its folder."""
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p: str) -> str:
        return p if (not p or os.path.isabs(p)) else os.path.normpath(os.path.join(base, p))

    records = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        missing = [c for c in MANIFEST_FIELDS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: manifest missing columns {missing}")
        for row in reader:
            extras = {k: resolve(v) for k, v in row.items()
                      if k not in MANIFEST_FIELDS and v}
            records.append(SampleRecord(
                subject_id=row["subject_id"],
                expression=row["expression"],
                intensity=int(row["intensity"]),
                texture_path=resolve(row["texture_path"]),
                depth_path=resolve(row["depth_path"]),
                landmarks_path=resolve(row["landmarks_path"]),
                features=extras,
            ))
    return records


def write_manifest(path, records: list[SampleRecord]) -> None:
    """Write a manifest; paths under the manifest folder become relative."""
    base = os.path.dirname(os.path.abspath(path))

    def compact(p: str) -> str:
        if p and os.path.isabs(p):
            rel = os.path.relpath(p, base)
            if not rel.startswith(".."):
                return rel
        return p

    extra_cols = sorted({k for r in records for k in r.features})
    tmp = f"{os.fspath(path)}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(list(MANIFEST_FIELDS) + extra_cols)
        for r in records:
            row = [r.subject_id, r.expression, str(r.intensity),
                   compact(r.texture_path), compact(r.depth_path),
                   compact(r.landmarks_path)]
            row += [compact(r.features.get(c, "")) for c in extra_cols]
            writer.writerow(row)
    os.replace(tmp, path)


@dataclass(frozen=True)
class ProtocolConfig:
    n_subjects_eval: int = 60
    intensities: tuple[int, ...] = (3, 4)
    n_tests: int = 100
    n_folds: int = 10
    seed: int = 0


def derive_seed(master: int, *key: int) -> int:
    """Stable child seed for a protocol sub-draw."""
    return int(np.random.SeedSequence(entropy=master, spawn_key=key).generate_state(1)[0])


def split_subjects(all_subjects, seed: int) -> tuple[list[str], list[str]]:
    """Disjoint, exhaustive 60/40 partition into (eval, fine-tune) subjects."""
    subjects = sorted(all_subjects)
    n = len(subjects)
    if n < 2:
        raise TooFewSubjects(f"need at least 2 subjects, have {n}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_eval = min(max(int(round(n * 0.6)), 1), n - 1)
    shuffled = [subjects[i] for i in order]
    return shuffled[:n_eval], shuffled[n_eval:]


def make_folds(subjects, n_folds: int, seed: int) -> list[list[str]]:
    """Partition subjects (not samples) into n_folds near-equal groups."""
    subjects = list(subjects)
    if n_folds < 1 or n_folds > len(subjects):
        raise BadFoldCount(f"{n_folds} folds for {len(subjects)} subjects")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(subjects))
    shuffled = [subjects[i] for i in order]
    return [list(part) for part in np.array_split(np.asarray(shuffled, dtype=object), n_folds)]


def confusion_matrix(truth, predicted, n_classes: int = len(EXPRESSIONS)) -> np.ndarray:
    """Row-normalized matrix: row i, col j = P(predicted j | true i).

    Rows for classes absent from `truth` are all zero.
    """
    truth = np.asarray(truth, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if truth.shape != predicted.shape:
        raise LengthMismatch(f"{truth.shape} truths vs {predicted.shape} predictions")
    counts = np.zeros((n_classes, n_classes))
    np.add.at(counts, (truth, predicted), 1.0)
    totals = counts.sum(axis=1, keepdims=True)
    return np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)


class PcaSvmClassifier:
    """Default classification stage: PCA, then standardized polynomial SVM."""

    def __init__(self, target_variance: float = 0.99,
                 kernel: KernelParams = KernelParams(), tol: float = 1e-3):
        self.target_variance = target_variance
        self.kernel = kernel
        self.tol = tol
        self._pca = None
        self._svm = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "PcaSvmClassifier":
        self._pca = pca_fit(X, self.target_variance)
        Z = pca_transform(self._pca, X)
        self._svm = svm_train_multiclass(Z, y, self.kernel, tol=self.tol)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        Z = pca_transform(self._pca, X)
        return svm_predict_many(self._svm, Z)


@dataclass(frozen=True)
class EvalReport:
    per_test_accuracy: list[float]
    mean_accuracy: float
    confusion: np.ndarray                    # pooled, row-normalized
    fold_subjects: list[list[list[str]]]     # [test][fold] -> subject ids
    samples_per_test: list[int]
    config: ProtocolConfig

    def to_dict(self) -> dict:
        return {
            "mean_accuracy": self.mean_accuracy,
            "per_test_accuracy": self.per_test_accuracy,
            "confusion_matrix": [[float(v) for v in row] for row in self.confusion],
            "expressions": list(EXPRESSIONS),
            "fold_subjects": self.fold_subjects,
            "samples_per_test": self.samples_per_test,
            "protocol": {
                "n_subjects_eval": self.config.n_subjects_eval,
                "intensities": sorted(self.config.intensities),
                "n_tests": self.config.n_tests,
                "n_folds": self.config.n_folds,
                "seed": self.config.seed,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def protocol_samples(records: list[SampleRecord],
                     cfg: ProtocolConfig) -> list[SampleRecord]:
    """The records the protocol evaluates: 6 basic expressions at the
    configured intensities."""
    return [r for r in records
            if r.expression in EXPRESSION_INDEX and r.intensity in cfg.intensities]


def run_protocol(records: list[SampleRecord], features: np.ndarray,
                 cfg: ProtocolConfig, classifier_factory=None) -> EvalReport:
    """Run the full repeated subject-independent cross-validation.

    `features` has one row per record, aligned by index. `classifier_factory`
    maps a derived integer seed to an object with fit(X, y) / predict(X);
    the default builds the PCA + SVM stage.
    """
    if classifier_factory is None:
        classifier_factory = lambda seed: PcaSvmClassifier()  # noqa: E731
    records = list(records)
    features = np.asarray(features)
    if len(records) != len(features):
        raise LengthMismatch(f"{len(records)} records vs {len(features)} feature rows")

    keep = [i for i, r in enumerate(records)
            if r.expression in EXPRESSION_INDEX and r.intensity in cfg.intensities]
    recs = [records[i] for i in keep]
    X = features[keep]
    y = np.array([r.label for r in recs], dtype=np.int64)
    subjects_all = sorted({r.subject_id for r in recs})

    eval_pool, finetune = split_subjects(subjects_all, cfg.seed)
    eval_pool_sorted = sorted(eval_pool)
    by_subject: dict[str, list[int]] = {}
    for i, r in enumerate(recs):
        by_subject.setdefault(r.subject_id, []).append(i)

    per_test_accuracy: list[float] = []
    samples_per_test: list[int] = []
    fold_subjects: list[list[list[str]]] = []
    pooled_counts = np.zeros((len(EXPRESSIONS), len(EXPRESSIONS)))

    for t in range(cfg.n_tests):
        rng = np.random.default_rng(derive_seed(cfg.seed, 1, t))
        order = rng.permutation(len(eval_pool_sorted))
        n_take = min(cfg.n_subjects_eval, len(eval_pool_sorted))
        chosen = [eval_pool_sorted[i] for i in order[:n_take]]
        folds = make_folds(chosen, cfg.n_folds, derive_seed(cfg.seed, 2, t))
        fold_subjects.append(folds)

        n_correct = 0
        n_total = 0
        for f, test_subj in enumerate(folds):
            train_subj = [s for fi, fold in enumerate(folds) if fi != f for s in fold]
            overlap = set(train_subj) & set(test_subj)
            if overlap:
                raise RuntimeError(f"subject leakage across folds: {sorted(overlap)}")
            leak = set(train_subj + list(test_subj)) & set(finetune)
            if leak:
                raise RuntimeError(f"fine-tune subjects in evaluation: {sorted(leak)}")
            tr_idx = [i for s in train_subj for i in by_subject.get(s, [])]
            te_idx = [i for s in test_subj for i in by_subject.get(s, [])]
            if not tr_idx or not te_idx:
                continue
            clf = classifier_factory(derive_seed(cfg.seed, 3, t, f))
            try:
                clf.fit(X[tr_idx], y[tr_idx])
            except SingleClass:
                continue
            pred = np.asarray(clf.predict(X[te_idx]), dtype=np.int64)
            n_correct += int(np.sum(pred == y[te_idx]))
            n_total += len(te_idx)
            np.add.at(pooled_counts, (y[te_idx], pred), 1.0)
        per_test_accuracy.append(n_correct / n_total if n_total else 0.0)
        samples_per_test.append(n_total)

    totals = pooled_counts.sum(axis=1, keepdims=True)
    confusion = np.divide(pooled_counts, totals,
                          out=np.zeros_like(pooled_counts), where=totals > 0)
    return EvalReport(
        per_test_accuracy=per_test_accuracy,
        mean_accuracy=float(np.mean(per_test_accuracy)) if per_test_accuracy else 0.0,
        confusion=confusion,
        fold_subjects=fold_subjects,
        samples_per_test=samples_per_test,
        config=cfg,
    )

"""Command-line pipeline: synth -> align -> parts -> features ->
train-fusion -> extract -> evaluate, plus pca / svm / ref-distance
utilities.

Each stage consumes the previous stage's output directory through its
manifest and emits a new manifest beside its own artifacts, so stages
can be rerun or tested in isolation. Every command takes --config,
--seed and --jobs. File writes are atomic (temp name + rename); a
per-sample failure is logged and skips only that sample.
"""

from __future__ import annotations

import concurrent.futures
import csv
import os
import sys

import click
import numpy as np

from . import fusionnet, report, synth
from .config import PipelineConfig, load_config, update_config_value, with_seed
from .descriptors import early_fuse, hog, ulbp
from .errors import FacePartsError, MissingStageOutput
from .harness import (EXPRESSIONS, ProtocolConfig, SampleRecord,
                      PcaSvmClassifier, derive_seed, protocol_samples,
                      read_manifest, run_protocol, split_subjects,
                      write_manifest)
from .imgcore import Image, hflip, read_pnm, resize, write_pnm
from .landmarks import align_face, interocular_distance, read_landmarks, write_landmarks
from .parts import PART_ORDER, extract_parts
from .pca import pca_fit, pca_transform
from .svm import KernelParams, svm_predict_many, svm_train_multiclass
from .tensorio import read_tensors, write_tensors

MODALITIES = ("tex", "dep")
MODALITY_NAMES = {"tex": "texture", "dep": "depth"}


def _load_cfg(config_path, seed) -> PipelineConfig:
    return with_seed(load_config(config_path), seed)


def _require(path, what: str):
    if not os.path.exists(path):
        raise MissingStageOutput(f"{what} not found at {path}")
    return path


def _map_samples(records, fn, jobs: int):
    """Apply fn to each record; returns (ordered results, error list).

    Failed samples contribute None results and (sample_id, message) errors.
    """
    results = [None] * len(records)
    errors = []
    if jobs <= 1:
        for i, rec in enumerate(records):
            try:
                results[i] = fn(rec)
            except Exception as exc:  # noqa: BLE001 - per-sample isolation
                errors.append((rec.sample_id, f"{type(exc).__name__}: {exc}"))
        return results, errors
    with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = {pool.submit(fn, rec): i for i, rec in enumerate(records)}
        for fut in concurrent.futures.as_completed(futures):
            i = futures[fut]
            try:
                results[i] = fut.result()
            except Exception as exc:  # noqa: BLE001
                errors.append((records[i].sample_id, f"{type(exc).__name__}: {exc}"))
    errors.sort()
    return results, errors


def _finish_stage(out_dir, kept_records, errors) -> None:
    """Write the stage manifest and error log; exit nonzero on errors."""
    write_manifest(os.path.join(out_dir, "manifest.csv"), kept_records)
    if errors:
        with open(os.path.join(out_dir, "errors.txt"), "w", encoding="utf-8") as f:
            for sid, msg in errors:
                f.write(f"{sid}\t{msg}\n")
        for sid, msg in errors:
            click.echo(f"error: {sid}: {msg}", err=True)
        sys.exit(1)


def _wrap_errors(fn):
    """Convert pipeline errors into clean CLI failures."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FacePartsError as exc:
            raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc
    return wrapper


common_options = [
    click.option("--config", "config_path", type=click.Path(exists=True),
                 default=None, help="Pipeline config file."),
    click.option("--seed", type=int, default=None,
                 help="Override every seed in the config."),
    click.option("--jobs", type=int, default=1, show_default=True,
                 help="Worker threads across samples."),
]


def add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


@click.group()
def main():
    """Facial-parts expression recognition pipeline."""


# ---------------------------------------------------------------------------
@main.command("synth")
@click.argument("out_dir", type=click.Path())
@click.option("--subjects", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_wrap_errors
def cmd_synth(out_dir, subjects, seed):
    """Generate a synthetic dataset with ground-truth landmarks."""
    manifest = synth.generate_dataset(out_dir, subjects, seed)
    click.echo(f"wrote {manifest}")


# ---------------------------------------------------------------------------
@main.command("ref-distance")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--update-config", "config_out", type=click.Path(), default=None,
              help="Write the value into this config file.")
@_wrap_errors
def cmd_ref_distance(manifest_path, config_out):
    """Mean inter-ocular distance over all manifest samples."""
    records = read_manifest(manifest_path)
    if not records:
        raise click.ClickException("manifest has no samples")
    dists = [interocular_distance(read_landmarks(r.landmarks_path)) for r in records]
    value = float(np.mean(dists))
    click.echo(repr(value))
    if config_out:
        update_config_value(config_out, "alignment", "ref_interocular_distance", repr(value))


# ---------------------------------------------------------------------------
@main.command("align")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@add_options(common_options)
@_wrap_errors
def cmd_align(manifest_path, out_dir, config_path, seed, jobs):
    """Rotation- and scale-normalize every sample."""
    out_dir = os.path.abspath(out_dir)
    cfg = _load_cfg(config_path, seed)
    records = read_manifest(manifest_path)
    for sub in ("textures", "depths", "landmarks"):
        os.makedirs(os.path.join(out_dir, sub), exist_ok=True)

    def process(rec: SampleRecord) -> SampleRecord:
        texture = read_pnm(_require(rec.texture_path, "texture image"))
        depth = read_pnm(_require(rec.depth_path, "depth image"))
        lms = read_landmarks(_require(rec.landmarks_path, "landmark file"))
        result = align_face(texture, depth, lms, cfg.ref_interocular_distance)
        name = rec.sample_id
        tex_path = os.path.join(out_dir, "textures", f"{name}.ppm")
        dep_path = os.path.join(out_dir, "depths", f"{name}.pgm")
        lm_path = os.path.join(out_dir, "landmarks", f"{name}.txt")
        write_pnm(tex_path, result.texture)
        write_pnm(dep_path, result.depth)
        write_landmarks(lm_path, result.landmarks)
        return SampleRecord(rec.subject_id, rec.expression, rec.intensity,
                            tex_path, dep_path, lm_path)

    results, errors = _map_samples(records, process, jobs)
    kept = [r for r in results if r is not None]
    click.echo(f"aligned {len(kept)}/{len(records)} samples")
    _finish_stage(out_dir, kept, errors)


# ---------------------------------------------------------------------------
@main.command("parts")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@add_options(common_options)
@_wrap_errors
def cmd_parts(manifest_path, out_dir, config_path, seed, jobs):
    """Crop the four 64x64 facial parts from both modalities."""
    out_dir = os.path.abspath(out_dir)
    cfg = _load_cfg(config_path, seed)
    records = read_manifest(manifest_path)
    os.makedirs(os.path.join(out_dir, "crops"), exist_ok=True)

    def process(rec: SampleRecord) -> SampleRecord:
        texture = read_pnm(_require(rec.texture_path, "aligned texture"))
        depth = read_pnm(_require(rec.depth_path, "aligned depth"))
        lms = read_landmarks(_require(rec.landmarks_path, "aligned landmarks"))
        tex_set, dep_set = extract_parts(texture, depth, lms, cfg.part_pad)
        cols = {}
        for modality, part_set in (("tex", tex_set), ("dep", dep_set)):
            ext = "ppm" if modality == "tex" else "pgm"
            for kind in PART_ORDER:
                path = os.path.join(
                    out_dir, "crops",
                    f"{rec.sample_id}_{MODALITY_NAMES[modality]}_{kind.value}.{ext}")
                write_pnm(path, part_set.crops[kind])
                cols[f"part_{modality}_{kind.value}"] = path
        sidecar = os.path.join(out_dir, "crops", f"{rec.sample_id}_bboxes.txt")
        with open(sidecar, "w", encoding="utf-8") as f:
            for kind in PART_ORDER:
                b = tex_set.source_bboxes[kind]
                f.write(f"{kind.value} {b.x_min} {b.y_min} {b.x_max} {b.y_max}\n")
        return SampleRecord(rec.subject_id, rec.expression, rec.intensity,
                            rec.texture_path, rec.depth_path, rec.landmarks_path,
                            features=cols)

    results, errors = _map_samples(records, process, jobs)
    kept = [r for r in results if r is not None]
    click.echo(f"extracted parts for {len(kept)}/{len(records)} samples")
    _finish_stage(out_dir, kept, errors)


# ---------------------------------------------------------------------------
def _part_image(rec: SampleRecord, modality: str, part_name: str) -> Image:
    key = f"part_{modality}_{part_name}"
    if key not in rec.features:
        raise MissingStageOutput(f"{rec.sample_id}: parts-stage column {key} missing "
                                 f"(run the parts command first)")
    return read_pnm(_require(rec.features[key], f"part crop {key}"))


def _whole_image(rec: SampleRecord, modality: str) -> Image:
    path = rec.texture_path if modality == "tex" else rec.depth_path
    return resize(read_pnm(_require(path, "aligned image")), 64, 64)


def _replicate3(img: Image) -> np.ndarray:
    arr = img.data
    return np.repeat(arr, 3, axis=2) if img.channels == 1 else arr


@main.command("features")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--feature-source", "source_override",
              type=click.Choice(["stub_encoder", "tensor_files", "hog", "ulbp"]),
              default=None, help="Override the configured feature source.")
@click.option("--whole-face", is_flag=True,
              help="Encode the whole aligned face instead of the four parts.")
@add_options(common_options)
@_wrap_errors
def cmd_features(manifest_path, out_dir, source_override, whole_face,
                 config_path, seed, jobs):
    """Produce feature tensors (conv stub / external files / HOG / ULBP)."""
    out_dir = os.path.abspath(out_dir)
    cfg = _load_cfg(config_path, seed)
    source = source_override or cfg.feature_source
    records = read_manifest(manifest_path)
    os.makedirs(out_dir, exist_ok=True)
    part_names = ["whole"] if whole_face else [k.value for k in PART_ORDER]

    if source == "tensor_files":
        def validate(rec: SampleRecord) -> SampleRecord:
            for modality in MODALITIES:
                for part in part_names:
                    key = f"feat_{modality}_{part}"
                    if key not in rec.features:
                        raise MissingStageOutput(
                            f"{rec.sample_id}: tensor-file column {key} missing")
                    tensors = read_tensors(_require(rec.features[key], key))
                    if "conv5" not in tensors or tensors["conv5"].shape != (6, 6, 512):
                        raise ValueError(f"{rec.features[key]}: expected a (6,6,512) "
                                         f"'conv5' entry")
            return rec
        results, errors = _map_samples(records, validate, jobs)
        kept = [r for r in results if r is not None]
        click.echo(f"validated conv features for {len(kept)}/{len(records)} samples")
        _finish_stage(out_dir, kept, errors)
        return

    if source == "stub_encoder":
        def load(rec, modality, part):
            img = _whole_image(rec, modality) if whole_face \
                else _part_image(rec, modality, part)
            return _replicate3(img)

        # Dataset mean image per (modality, part), then encode against it.
        means = {}
        for modality in MODALITIES:
            for part in part_names:
                total = np.zeros((64, 64, 3))
                for rec in records:
                    total += load(rec, modality, part)
                means[(modality, part)] = total / max(len(records), 1)
                write_tensors(os.path.join(out_dir, f"mean_{modality}_{part}.fpt"),
                              {"mean": means[(modality, part)]})

        def process(rec: SampleRecord) -> SampleRecord:
            cols = {}
            for modality in MODALITIES:
                for part in part_names:
                    img = _whole_image(rec, modality) if whole_face \
                        else _part_image(rec, modality, part)
                    mean = means[(modality, part)]
                    feat = fusionnet.stub_encode(img, mean=mean, seed=cfg.stub_seed)
                    feat_flip = fusionnet.stub_encode(hflip(img), mean=mean,
                                                      seed=cfg.stub_seed)
                    path = os.path.join(out_dir, f"{rec.sample_id}_{modality}_{part}.fpt")
                    write_tensors(path, {"conv5": feat, "conv5_flip": feat_flip})
                    cols[f"feat_{modality}_{part}"] = path
            return SampleRecord(rec.subject_id, rec.expression, rec.intensity,
                                rec.texture_path, rec.depth_path,
                                rec.landmarks_path, features=cols)
    else:  # hog / ulbp hand-crafted vectors with early fusion over parts
        dcfg = cfg.descriptors

        def describe(img: Image):
            if source == "hog":
                return hog(img, dcfg.hog_cell, dcfg.hog_block, dcfg.hog_bins)
            return ulbp(img, dcfg.ulbp_cell)

        def process(rec: SampleRecord) -> SampleRecord:
            cols = {}
            for modality in MODALITIES:
                vecs = []
                for part in part_names:
                    img = _whole_image(rec, modality) if whole_face \
                        else _part_image(rec, modality, part)
                    vecs.append(describe(img))
                fused = early_fuse(vecs)
                path = os.path.join(out_dir, f"{rec.sample_id}_{modality}.fpt")
                write_tensors(path, {"vector": fused.values})
                cols[f"feat_{modality}"] = path
            return SampleRecord(rec.subject_id, rec.expression, rec.intensity,
                                rec.texture_path, rec.depth_path,
                                rec.landmarks_path, features=cols)

    results, errors = _map_samples(records, process, jobs)
    kept = [r for r in results if r is not None]
    click.echo(f"encoded features ({source}) for {len(kept)}/{len(records)} samples")
    _finish_stage(out_dir, kept, errors)


# ---------------------------------------------------------------------------
def _conv_part_names(records) -> list[str]:
    """Which conv-feature columns the manifest carries (parts or whole)."""
    sample = records[0]
    if "feat_tex_whole" in sample.features:
        return ["whole"]
    names = [k.value for k in PART_ORDER]
    if all(f"feat_tex_{n}" in sample.features for n in names):
        return names
    raise MissingStageOutput(
        "manifest lacks conv-feature columns (feat_tex_<part> or feat_tex_whole); "
        "run the features command first")


def _conv_input(rec: SampleRecord, modality: str, part_names: list[str],
                entry: str = "conv5") -> np.ndarray | None:
    """Flattened fusion-net input for one sample/modality, or None if the
    requested (flip) entry is absent."""
    tensors = []
    for part in part_names:
        path = rec.features[f"feat_{modality}_{part}"]
        data = read_tensors(_require(path, "conv feature file"))
        if entry not in data:
            return None
        tensors.append(data[entry])
    if len(tensors) == 1:
        return tensors[0].ravel()
    return fusionnet.concat_parts(tensors).ravel()


@main.command("train-fusion")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@add_options(common_options)
@_wrap_errors
def cmd_train_fusion(manifest_path, out_dir, config_path, seed, jobs):
    """Train the per-modality fusion subnets on the fine-tuning subjects."""
    out_dir = os.path.abspath(out_dir)
    cfg = _load_cfg(config_path, seed)
    records = read_manifest(manifest_path)
    part_names = _conv_part_names(records)
    os.makedirs(out_dir, exist_ok=True)

    samples = protocol_samples(records, cfg.protocol)
    subjects = sorted({r.subject_id for r in samples})
    _, finetune = split_subjects(subjects, cfg.protocol.seed)
    pool = [r for r in samples if r.subject_id in set(finetune)]
    if not pool:
        raise MissingStageOutput("no fine-tuning samples; dataset too small")

    # Subject-disjoint train/val split inside the fine-tune pool.
    rng = np.random.default_rng(derive_seed(cfg.protocol.seed, 100))
    ft_subjects = sorted({r.subject_id for r in pool})
    order = rng.permutation(len(ft_subjects))
    n_val = max(1, int(round(len(ft_subjects) * 0.2)))
    val_subjects = {ft_subjects[i] for i in order[:n_val]}
    train_recs = [r for r in pool if r.subject_id not in val_subjects]
    val_recs = [r for r in pool if r.subject_id in val_subjects]

    for m_idx, modality in enumerate(MODALITIES):
        Xtr, ytr = [], []
        flips_missing = 0
        for rec in train_recs:
            x = _conv_input(rec, modality, part_names)
            Xtr.append(x)
            ytr.append(rec.label)
            x_flip = _conv_input(rec, modality, part_names, entry="conv5_flip")
            if x_flip is None:
                flips_missing += 1
            else:
                Xtr.append(x_flip)
                ytr.append(rec.label)
        Xva = [_conv_input(rec, modality, part_names) for rec in val_recs]
        yva = [rec.label for rec in val_recs]
        if flips_missing:
            click.echo(f"warning: {flips_missing} samples lack flip features; "
                       f"training on originals only for those", err=True)

        Xtr = np.asarray(Xtr, dtype=np.float32)
        Xva = np.asarray(Xva, dtype=np.float32)
        net = fusionnet.FusionNet.init(
            Xtr.shape[1], cfg.fusion.fc6_width, cfg.fusion.fc7_width,
            seed=derive_seed(cfg.fusion.train.seed, 200, m_idx), dtype=np.float32)
        best, logs = fusionnet.train(
            net, (Xtr, np.asarray(ytr)), (Xva, np.asarray(yva)), cfg.fusion.train)
        write_tensors(os.path.join(out_dir, f"fusion_{MODALITY_NAMES[modality]}.fpt"),
                      best.params)
        log_path = os.path.join(out_dir, f"log_{MODALITY_NAMES[modality]}.csv")
        with open(log_path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["epoch", "lr", "train_loss", "val_error"])
            for row in logs:
                writer.writerow([row.epoch, repr(row.lr), repr(row.train_loss),
                                 repr(row.val_error)])
        click.echo(f"{MODALITY_NAMES[modality]}: trained on {len(Xtr)} samples, "
                   f"best val error {min(l.val_error for l in logs):.4f}")


# ---------------------------------------------------------------------------
@main.command("extract")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--fusion-dir", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@add_options(common_options)
@_wrap_errors
def cmd_extract(manifest_path, fusion_dir, out_dir, config_path, seed, jobs):
    """Extract per-modality FC7 feature vectors with the trained subnets."""
    out_dir = os.path.abspath(out_dir)
    cfg = _load_cfg(config_path, seed)
    records = read_manifest(manifest_path)
    part_names = _conv_part_names(records)
    os.makedirs(out_dir, exist_ok=True)

    nets = {}
    for modality in MODALITIES:
        path = _require(os.path.join(
            fusion_dir, f"fusion_{MODALITY_NAMES[modality]}.fpt"),
            "fusion checkpoint")
        nets[modality] = fusionnet.FusionNet(read_tensors(path))

    def process(rec: SampleRecord) -> SampleRecord:
        cols = {}
        for modality in MODALITIES:
            x = _conv_input(rec, modality, part_names)
            fc7 = fusionnet.extract_fc7(nets[modality], x)
            if cfg.fusion.extract_post_relu:
                fc7 = np.maximum(fc7, 0.0)
            path = os.path.join(
                out_dir, f"{rec.sample_id}_fc7_{MODALITY_NAMES[modality]}.fpt")
            write_tensors(path, {"vector": fc7})
            cols[f"feat_{modality}"] = path
        return SampleRecord(rec.subject_id, rec.expression, rec.intensity,
                            rec.texture_path, rec.depth_path, rec.landmarks_path,
                            features=cols)

    results, errors = _map_samples(records, process, jobs)
    kept = [r for r in results if r is not None]
    click.echo(f"extracted FC7 features for {len(kept)}/{len(records)} samples")
    _finish_stage(out_dir, kept, errors)


# ---------------------------------------------------------------------------
def _vector_features(records, modality: str) -> np.ndarray:
    """Stack per-sample vectors; 'both' concatenates texture then depth."""
    rows = []
    for rec in records:
        vecs = []
        for m in (("tex", "dep") if modality == "both" else
                  (("tex",) if modality == "texture" else ("dep",))):
            key = f"feat_{m}"
            if key not in rec.features:
                raise MissingStageOutput(
                    f"{rec.sample_id}: vector column {key} missing (run the "
                    f"extract command, or features with hog/ulbp, first)")
            data = read_tensors(_require(rec.features[key], key))
            vecs.append(np.asarray(data["vector"], dtype=np.float64).ravel())
        rows.append(np.concatenate(vecs))
    return np.stack(rows)


@main.command("evaluate")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--modality", type=click.Choice(["both", "texture", "depth"]),
              default="both", show_default=True)
@add_options(common_options)
@_wrap_errors
def cmd_evaluate(manifest_path, out_dir, modality, config_path, seed, jobs):
    """Run the repeated subject-independent CV protocol and write reports."""
    cfg = _load_cfg(config_path, seed)
    records = read_manifest(manifest_path)
    if not records:
        raise click.ClickException("manifest has no samples")
    X = _vector_features(records, modality)

    def factory(_seed: int):
        return PcaSvmClassifier(cfg.pca_target_variance, cfg.kernel, cfg.svm_tol)

    result = run_protocol(records, X, cfg.protocol, classifier_factory=factory)
    paths = report.write_report(out_dir, result)
    click.echo(f"mean accuracy: {result.mean_accuracy:.4f} "
               f"over {len(result.per_test_accuracy)} tests")
    click.echo(f"report: {paths['json']}")


# ---------------------------------------------------------------------------
@main.command("pca")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--modality", type=click.Choice(["both", "texture", "depth"]),
              default="both", show_default=True)
@add_options(common_options)
@_wrap_errors
def cmd_pca(manifest_path, out_path, modality, config_path, seed, jobs):
    """Fit a PCA model on all manifest feature vectors and save it."""
    cfg = _load_cfg(config_path, seed)
    records = protocol_samples(read_manifest(manifest_path), cfg.protocol)
    X = _vector_features(records, modality)
    model = pca_fit(X, cfg.pca_target_variance)
    write_tensors(out_path, {
        "mean": model.mean, "basis": model.basis,
        "eigenvalues": model.eigenvalues,
        "explained_ratio": np.asarray([model.explained_ratio]),
    })
    click.echo(f"retained {model.k} components "
               f"(explained variance {model.explained_ratio:.4f})")


@main.command("svm")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--modality", type=click.Choice(["both", "texture", "depth"]),
              default="both", show_default=True)
@add_options(common_options)
@_wrap_errors
def cmd_svm(manifest_path, out_dir, modality, config_path, seed, jobs):
    """Train a multiclass SVM (after PCA) on all manifest samples."""
    cfg = _load_cfg(config_path, seed)
    records = protocol_samples(read_manifest(manifest_path), cfg.protocol)
    X = _vector_features(records, modality)
    y = np.asarray([r.label for r in records])
    pca_model = pca_fit(X, cfg.pca_target_variance)
    Z = pca_transform(pca_model, X)
    model = svm_train_multiclass(Z, y, cfg.kernel, tol=cfg.svm_tol)
    os.makedirs(out_dir, exist_ok=True)

    entries = {"classes": np.asarray(model.classes, dtype=np.float64),
               "feat_mean": model.feat_mean, "feat_std": model.feat_std,
               "pca_mean": pca_model.mean, "pca_basis": pca_model.basis}
    for i, (pair, machine) in enumerate(zip(model.pairs, model.machines)):
        entries[f"m{i}_sv"] = machine.support_vectors
        entries[f"m{i}_coef"] = machine.dual_coef
        entries[f"m{i}_meta"] = np.asarray(
            [machine.bias, machine.max_kkt_violation, pair[0], pair[1]])
    write_tensors(os.path.join(out_dir, "svm_model.fpt"), entries)
    params = model.params
    with open(os.path.join(out_dir, "kernel_params.txt"), "w", encoding="utf-8") as f:
        f.write(f"degree = {params.degree}\ngamma = {params.gamma!r}\n"
                f"coef0 = {params.coef0!r}\nC = {params.C!r}\n")
    train_acc = float(np.mean(svm_predict_many(model, Z) == y))
    click.echo(f"training accuracy: {train_acc:.4f} "
               f"({len(model.machines)} pairwise machines)")


if __name__ == "__main__":
    main()

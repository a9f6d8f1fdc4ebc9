"""Pipeline configuration: INI-style sections of flat key/value pairs.

Every key has a default; unknown sections or keys are rejected so a
misspelled option cannot silently fall back to its default.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, replace

from .fusionnet import FC6_WIDTH, FC7_WIDTH, TrainConfig
from .harness import ProtocolConfig
from .svm import KernelParams

FEATURE_SOURCES = ("stub_encoder", "tensor_files", "hog", "ulbp")


@dataclass(frozen=True)
class DescriptorConfig:
    hog_cell: int = 8
    hog_block: int = 2
    hog_bins: int = 9
    ulbp_cell: int = 16


@dataclass(frozen=True)
class FusionConfig:
    fc6_width: int = FC6_WIDTH
    fc7_width: int = FC7_WIDTH
    extract_post_relu: bool = False
    train: TrainConfig = field(default_factory=TrainConfig)


@dataclass(frozen=True)
class PipelineConfig:
    ref_interocular_distance: float = 55.0
    part_pad: float = 7.0
    feature_source: str = "stub_encoder"
    stub_seed: int = 0
    descriptors: DescriptorConfig = field(default_factory=DescriptorConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    kernel: KernelParams = field(default_factory=KernelParams)
    svm_tol: float = 1e-3
    pca_target_variance: float = 0.99
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)


def _parse_intensities(text: str) -> tuple[int, ...]:
    vals = tuple(int(v) for v in text.replace(",", " ").split())
    if not vals or any(v not in (1, 2, 3, 4) for v in vals):
        raise ValueError(f"intensities must be within 1..4, got {text!r}")
    return vals


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_gamma(text: str):
    return None if text.strip().lower() in ("", "auto") else float(text)


# (section, key) -> parser; the update functions below consume the values.
_SCHEMA = {
    ("alignment", "ref_interocular_distance"): float,
    ("parts", "pad"): float,
    ("features", "source"): str,
    ("features", "stub_seed"): int,
    ("descriptors", "hog_cell"): int,
    ("descriptors", "hog_block"): int,
    ("descriptors", "hog_bins"): int,
    ("descriptors", "ulbp_cell"): int,
    ("fusion", "fc6_width"): int,
    ("fusion", "fc7_width"): int,
    ("fusion", "extract_post_relu"): _parse_bool,
    ("fusion", "batch_size"): int,
    ("fusion", "lr_start"): float,
    ("fusion", "lr_end"): float,
    ("fusion", "epochs"): int,
    ("fusion", "momentum"): float,
    ("fusion", "weight_decay"): float,
    ("fusion", "seed"): int,
    ("svm", "degree"): int,
    ("svm", "gamma"): _parse_gamma,
    ("svm", "coef0"): float,
    ("svm", "c"): float,
    ("svm", "tol"): float,
    ("pca", "target_variance"): float,
    ("protocol", "n_subjects_eval"): int,
    ("protocol", "intensities"): _parse_intensities,
    ("protocol", "n_tests"): int,
    ("protocol", "n_folds"): int,
    ("protocol", "seed"): int,
}


def load_config(path=None) -> PipelineConfig:
    """Defaults, overridden by the file at `path` when given."""
    cfg = PipelineConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser()
    with open(path, "r", encoding="utf-8") as f:
        parser.read_file(f)

    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            spec = _SCHEMA.get((section.lower(), key.lower()))
            if spec is None:
                raise ValueError(f"{path}: unknown config key [{section}] {key}")
            values[(section.lower(), key.lower())] = spec(raw)

    def take(section, key, fallback):
        return values.get((section, key), fallback)

    if take("features", "source", cfg.feature_source) not in FEATURE_SOURCES:
        raise ValueError(f"{path}: feature source must be one of {FEATURE_SOURCES}")

    descriptors = DescriptorConfig(
        hog_cell=take("descriptors", "hog_cell", cfg.descriptors.hog_cell),
        hog_block=take("descriptors", "hog_block", cfg.descriptors.hog_block),
        hog_bins=take("descriptors", "hog_bins", cfg.descriptors.hog_bins),
        ulbp_cell=take("descriptors", "ulbp_cell", cfg.descriptors.ulbp_cell),
    )
    train = TrainConfig(
        batch_size=take("fusion", "batch_size", cfg.fusion.train.batch_size),
        lr_start=take("fusion", "lr_start", cfg.fusion.train.lr_start),
        lr_end=take("fusion", "lr_end", cfg.fusion.train.lr_end),
        epochs=take("fusion", "epochs", cfg.fusion.train.epochs),
        momentum=take("fusion", "momentum", cfg.fusion.train.momentum),
        weight_decay=take("fusion", "weight_decay", cfg.fusion.train.weight_decay),
        seed=take("fusion", "seed", cfg.fusion.train.seed),
    )
    fusion = FusionConfig(
        fc6_width=take("fusion", "fc6_width", cfg.fusion.fc6_width),
        fc7_width=take("fusion", "fc7_width", cfg.fusion.fc7_width),
        extract_post_relu=take("fusion", "extract_post_relu", cfg.fusion.extract_post_relu),
        train=train,
    )
    kernel = KernelParams(
        degree=take("svm", "degree", cfg.kernel.degree),
        gamma=take("svm", "gamma", cfg.kernel.gamma),
        coef0=take("svm", "coef0", cfg.kernel.coef0),
        C=take("svm", "c", cfg.kernel.C),
    )
    protocol = ProtocolConfig(
        n_subjects_eval=take("protocol", "n_subjects_eval", cfg.protocol.n_subjects_eval),
        intensities=take("protocol", "intensities", cfg.protocol.intensities),
        n_tests=take("protocol", "n_tests", cfg.protocol.n_tests),
        n_folds=take("protocol", "n_folds", cfg.protocol.n_folds),
        seed=take("protocol", "seed", cfg.protocol.seed),
    )
    out = PipelineConfig(
        ref_interocular_distance=take("alignment", "ref_interocular_distance",
                                      cfg.ref_interocular_distance),
        part_pad=take("parts", "pad", cfg.part_pad),
        feature_source=take("features", "source", cfg.feature_source),
        stub_seed=take("features", "stub_seed", cfg.stub_seed),
        descriptors=descriptors,
        fusion=fusion,
        kernel=kernel,
        svm_tol=take("svm", "tol", cfg.svm_tol),
        pca_target_variance=take("pca", "target_variance", cfg.pca_target_variance),
        protocol=protocol,
    )
    if out.ref_interocular_distance <= 0:
        raise ValueError(f"{path}: ref_interocular_distance must be positive")
    if not 0 <= out.part_pad <= 32:
        raise ValueError(f"{path}: parts pad must lie in [0, 32]")
    return out


def update_config_value(path, section: str, key: str, value) -> None:
    """Rewrite one key in a config file, creating file/section as needed."""
    parser = configparser.ConfigParser()
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as f:
            parser.read_file(f)
    if not parser.has_section(section):
        parser.add_section(section)
    parser.set(section, key, str(value))
    tmp = f"{os.fspath(path)}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as f:
        parser.write(f)
    os.replace(tmp, path)


def with_seed(cfg: PipelineConfig, seed: int | None) -> PipelineConfig:
    """Override every seed-bearing sub-config from one CLI --seed value."""
    if seed is None:
        return cfg
    return replace(
        cfg,
        stub_seed=seed,
        fusion=replace(cfg.fusion, train=replace(cfg.fusion.train, seed=seed)),
        protocol=replace(cfg.protocol, seed=seed),
    )

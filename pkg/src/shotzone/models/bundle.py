"""Trained-model bundles: standardization, prediction, bit-exact persistence."""

from __future__ import annotations

import json
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..context import FEATURE_LEDGER_VERSION
from ..errors import ConfigError, FormatVersionError, VersionMismatch
from ..frames import FeatureFrame
from ..taxonomy import N_ZONES, TAXONOMY_VERSION
from .nets import Batch, MODEL_KINDS, NaiveModel, make_model

BUNDLE_FORMAT_VERSION = 1

STD_FLOOR = 1e-6


@dataclass
class ModelBundle:
    kind: str
    params: dict[str, np.ndarray]
    ctx_mean: np.ndarray  # (39,)
    ctx_std: np.ndarray  # (39,) floored at 1e-6
    aux_mean: np.ndarray  # (46,)
    aux_std: np.ndarray  # (46,)
    aux_globals: np.ndarray  # (46,) blending means, frozen at training time
    manifest: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    taxonomy_version: str = TAXONOMY_VERSION
    ledger_version: str = FEATURE_LEDGER_VERSION

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}")
        assert np.all(self.ctx_std >= STD_FLOOR)
        assert np.all(self.aux_std >= STD_FLOOR)
        self._net = None

    def check_versions(self) -> None:
        if (self.taxonomy_version != TAXONOMY_VERSION
                or self.ledger_version != FEATURE_LEDGER_VERSION):
            raise VersionMismatch(
                f"bundle built for taxonomy {self.taxonomy_version}/ledger "
                f"{self.ledger_version}; this build is {TAXONOMY_VERSION}/"
                f"{FEATURE_LEDGER_VERSION}")

    def _network(self):
        if self._net is None:
            if self.kind == "naive":
                self._net = NaiveModel(self.params["class_probs"])
            else:
                rng = np.random.default_rng(0)  # placeholder init, overwritten
                net = make_model(
                    self.kind, rng,
                    hidden=self.config.get("hidden", 64),
                    depth=self.config.get("depth", 2),
                    hidden_head=self.config.get("hidden_head", 64),
                    dtype=np.dtype(self.config.get("precision", "float32")).type,
                )
                net.load_parameters(self.params)
                self._net = net
        return self._net

    def prepare_batch(self, seq_raw: np.ndarray, mask: np.ndarray,
                      aux_raw: np.ndarray) -> Batch:
        """Standardize raw frames; padded slots are zeroed after standardization."""
        dtype = np.dtype(self.config.get("precision", "float32")).type
        seq = ((seq_raw - self.ctx_mean) / self.ctx_std).astype(dtype)
        seq[mask] = 0.0
        aux = ((aux_raw - self.aux_mean) / self.aux_std).astype(dtype)
        return Batch(seq=seq, mask=mask, aux=aux)

    def predict_batch(self, seq_raw: np.ndarray, mask: np.ndarray,
                      aux_raw: np.ndarray) -> np.ndarray:
        """(B, 17) probabilities in float64; rows sum to 1 within 1e-9."""
        self.check_versions()
        batch = self.prepare_batch(seq_raw, mask, aux_raw)
        return self._network().predict_proba(batch)

    def predict(self, frame: FeatureFrame) -> np.ndarray:
        """Zone distribution for a single frame."""
        probs = self.predict_batch(frame.sequence[None], frame.mask[None],
                                   frame.aux[None])
        return probs[0]


def save_bundle(bundle: ModelBundle, path: str | Path) -> None:
    meta = {
        "format_version": BUNDLE_FORMAT_VERSION,
        "kind": bundle.kind,
        "taxonomy_version": bundle.taxonomy_version,
        "ledger_version": bundle.ledger_version,
        "manifest": bundle.manifest,
        "config": bundle.config,
        "param_names": sorted(bundle.params),
    }
    arrays = {
        "meta_json": np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8),
        "ctx_mean": bundle.ctx_mean,
        "ctx_std": bundle.ctx_std,
        "aux_mean": bundle.aux_mean,
        "aux_std": bundle.aux_std,
        "aux_globals": bundle.aux_globals,
    }
    for name, value in bundle.params.items():
        arrays[f"param:{name}"] = value
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_bundle(path: str | Path) -> ModelBundle:
    try:
        with np.load(path) as data:
            meta = json.loads(bytes(data["meta_json"]).decode("utf-8"))
            if meta.get("format_version") != BUNDLE_FORMAT_VERSION:
                raise FormatVersionError(
                    f"bundle format {meta.get('format_version')!r}, expected "
                    f"{BUNDLE_FORMAT_VERSION}")
            params = {name: data[f"param:{name}"] for name in meta["param_names"]}
            return ModelBundle(
                kind=meta["kind"],
                params=params,
                ctx_mean=data["ctx_mean"],
                ctx_std=data["ctx_std"],
                aux_mean=data["aux_mean"],
                aux_std=data["aux_std"],
                aux_globals=data["aux_globals"],
                manifest=meta["manifest"],
                config=meta["config"],
                taxonomy_version=meta["taxonomy_version"],
                ledger_version=meta["ledger_version"],
            )
    except (FormatVersionError, FileNotFoundError):
        raise
    except (zipfile.BadZipFile, KeyError, ValueError, EOFError,
            json.JSONDecodeError) as exc:
        raise FormatVersionError(f"unreadable bundle {path}: {exc}") from exc

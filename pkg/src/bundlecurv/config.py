"""Declarative run configuration.

A run is described by a single TOML document with nested sections: which
subgroup chain to build, which metric to put on it, and the parameters of
the requested operation. Parsing is strict: unknown keys are rejected by
full path, so a typo never silently falls back to a default.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .bundle import BundleTriple, catalog_triple, make_block_triple
from .errors import ValidationError
from .metric import (
    MetricSpec,
    diagonal_metric,
    identity_metric,
    random_spd_metric,
)

METRIC_KINDS = ("identity", "phi_t", "diagonal", "random-spd")
FORMATS = ("json", "csv")


def _reject_unknown(table: dict, allowed, path: str) -> None:
    for key in table:
        if key not in allowed:
            raise ValidationError(f"unknown key {path}.{key}")


def _get_typed(table: dict, key: str, kind, path: str, default=None, required=False):
    if key not in table:
        if required:
            raise ValidationError(f"missing required key {path}.{key}")
        return default
    value = table[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is int and isinstance(value, bool):
        raise ValidationError(f"{path}.{key} must be an integer, got a boolean")
    if not isinstance(value, kind):
        raise ValidationError(
            f"{path}.{key} must be of type {getattr(kind, '__name__', kind)}, got {value!r}"
        )
    return value


def _get_float_list(table: dict, key: str, path: str, default=None, required=False):
    if key not in table:
        if required:
            raise ValidationError(f"missing required key {path}.{key}")
        return default
    value = table[key]
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ValidationError(f"{path}.{key} must be a list of numbers")
    return [float(v) for v in value]


@dataclass(frozen=True)
class TripleConfig:
    catalog: str | None = None
    blocks: tuple | None = None

    def build(self) -> BundleTriple:
        if self.catalog is not None:
            return catalog_triple(self.catalog)
        n_k, n_h, n_g = self.blocks
        return make_block_triple(n_k, n_h, n_g, name=f"blocks:{n_k}:{n_h}:{n_g}")


@dataclass(frozen=True)
class MetricConfig:
    kind: str = "identity"
    t: float | None = None
    diagonal: list | None = None
    seed: int | None = None
    eig_range: tuple = (0.5, 2.0)

    def build(self, triple: BundleTriple, run_seed: int) -> MetricSpec:
        if self.kind == "identity":
            return identity_metric(triple.algebra)
        if self.kind == "phi_t":
            return triple.collapse_metric(self.t)
        if self.kind == "diagonal":
            return diagonal_metric(triple.algebra, self.diagonal)
        seed = self.seed if self.seed is not None else run_seed
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        return random_spd_metric(triple.algebra, rng, eig_range=self.eig_range)


@dataclass(frozen=True)
class FatnessConfig:
    seed: int | None = None
    restarts: int = 20


@dataclass(frozen=True)
class CertifyConfig:
    eps: list = field(default_factory=lambda: [0.1, 0.05, 0.025, 0.0125])
    n_starts: int = 8


@dataclass(frozen=True)
class ScanConfig:
    n_samples: int = 0
    planes_per_point: int = 1
    include_witness_plane: bool = False
    bins: int = 24


@dataclass(frozen=True)
class SweepConfig:
    t_grid: list = field(default_factory=list)
    n_samples: int = 0
    planes_per_point: int = 16
    include_witness_plane: bool = False


@dataclass(frozen=True)
class RunConfig:
    """Everything a command run needs, resolved from one TOML document."""

    triple: TripleConfig
    metric: MetricConfig
    fatness: FatnessConfig
    certify: CertifyConfig
    scan: ScanConfig
    sweep: SweepConfig
    seed: int = 0
    out: str | None = None
    format: str | None = None
    figures: bool = True

    def resolved(self) -> dict:
        """Plain-dict image of the full configuration, for embedding in reports."""
        return {
            "triple": {
                "catalog": self.triple.catalog,
                "blocks": list(self.triple.blocks) if self.triple.blocks else None,
            },
            "metric": {
                "kind": self.metric.kind,
                "t": self.metric.t,
                "diagonal": self.metric.diagonal,
                "seed": self.metric.seed,
                "eig_range": list(self.metric.eig_range),
            },
            "fatness": {"seed": self.fatness.seed, "restarts": self.fatness.restarts},
            "certify": {"eps": list(self.certify.eps), "n_starts": self.certify.n_starts},
            "scan": {
                "n_samples": self.scan.n_samples,
                "planes_per_point": self.scan.planes_per_point,
                "include_witness_plane": self.scan.include_witness_plane,
                "bins": self.scan.bins,
            },
            "sweep": {
                "t_grid": list(self.sweep.t_grid),
                "n_samples": self.sweep.n_samples,
                "planes_per_point": self.sweep.planes_per_point,
                "include_witness_plane": self.sweep.include_witness_plane,
            },
            "seed": self.seed,
            "out": self.out,
            "format": self.format,
            "figures": self.figures,
        }


def _parse_triple(table: dict) -> TripleConfig:
    _reject_unknown(table, {"catalog", "blocks"}, "triple")
    catalog = _get_typed(table, "catalog", str, "triple")
    blocks = table.get("blocks")
    if (catalog is None) == (blocks is None):
        raise ValidationError("triple needs exactly one of 'catalog' or 'blocks'")
    if blocks is not None:
        if (
            not isinstance(blocks, list)
            or len(blocks) != 3
            or not all(isinstance(b, int) and not isinstance(b, bool) for b in blocks)
        ):
            raise ValidationError("triple.blocks must be three integers [n_k, n_h, n_g]")
        blocks = tuple(blocks)
    return TripleConfig(catalog=catalog, blocks=blocks)


def _parse_metric(table: dict) -> MetricConfig:
    _reject_unknown(table, {"kind", "t", "diagonal", "seed", "eig_range"}, "metric")
    kind = _get_typed(table, "kind", str, "metric", default="identity")
    if kind not in METRIC_KINDS:
        raise ValidationError(f"metric.kind must be one of {METRIC_KINDS}, got {kind!r}")
    t = _get_typed(table, "t", float, "metric", required=(kind == "phi_t"))
    diagonal = _get_float_list(table, "diagonal", "metric", required=(kind == "diagonal"))
    seed = _get_typed(table, "seed", int, "metric")
    eig_range = _get_float_list(table, "eig_range", "metric", default=[0.5, 2.0])
    if len(eig_range) != 2 or not (0 < eig_range[0] <= eig_range[1]):
        raise ValidationError("metric.eig_range must be [lo, hi] with 0 < lo <= hi")
    if t is not None and kind != "phi_t":
        raise ValidationError("metric.t only applies to kind = 'phi_t'")
    if diagonal is not None and kind != "diagonal":
        raise ValidationError("metric.diagonal only applies to kind = 'diagonal'")
    return MetricConfig(kind=kind, t=t, diagonal=diagonal, seed=seed, eig_range=tuple(eig_range))


def _parse_fatness(table: dict) -> FatnessConfig:
    _reject_unknown(table, {"seed", "restarts"}, "fatness")
    return FatnessConfig(
        seed=_get_typed(table, "seed", int, "fatness"),
        restarts=_get_typed(table, "restarts", int, "fatness", default=20),
    )


def _parse_certify(table: dict) -> CertifyConfig:
    _reject_unknown(table, {"eps", "n_starts"}, "certify")
    return CertifyConfig(
        eps=_get_float_list(table, "eps", "certify", default=[0.1, 0.05, 0.025, 0.0125]),
        n_starts=_get_typed(table, "n_starts", int, "certify", default=8),
    )


def _parse_scan(table: dict) -> ScanConfig:
    _reject_unknown(
        table, {"n_samples", "planes_per_point", "include_witness_plane", "bins"}, "scan"
    )
    return ScanConfig(
        n_samples=_get_typed(table, "n_samples", int, "scan", default=0),
        planes_per_point=_get_typed(table, "planes_per_point", int, "scan", default=1),
        include_witness_plane=_get_typed(
            table, "include_witness_plane", bool, "scan", default=False
        ),
        bins=_get_typed(table, "bins", int, "scan", default=24),
    )


def _parse_sweep(table: dict) -> SweepConfig:
    _reject_unknown(
        table, {"t_grid", "n_samples", "planes_per_point", "include_witness_plane"}, "sweep"
    )
    return SweepConfig(
        t_grid=_get_float_list(table, "t_grid", "sweep", default=[]),
        n_samples=_get_typed(table, "n_samples", int, "sweep", default=0),
        planes_per_point=_get_typed(table, "planes_per_point", int, "sweep", default=16),
        include_witness_plane=_get_typed(
            table, "include_witness_plane", bool, "sweep", default=False
        ),
    )


_TOP_KEYS = {
    "triple",
    "metric",
    "fatness",
    "certify",
    "scan",
    "sweep",
    "seed",
    "out",
    "format",
    "figures",
}


def parse_config(data: dict) -> RunConfig:
    """Validate a parsed TOML table into a RunConfig."""
    if not isinstance(data, dict):
        raise ValidationError("config root must be a table")
    _reject_unknown(data, _TOP_KEYS, "config")
    if "triple" not in data:
        raise ValidationError("config needs a [triple] section")
    for section in ("triple", "metric", "fatness", "certify", "scan", "sweep"):
        if section in data and not isinstance(data[section], dict):
            raise ValidationError(f"config.{section} must be a section, not a value")
    fmt = _get_typed(data, "format", str, "config")
    if fmt is not None and fmt not in FORMATS:
        raise ValidationError(f"config.format must be one of {FORMATS}, got {fmt!r}")
    return RunConfig(
        triple=_parse_triple(data["triple"]),
        metric=_parse_metric(data.get("metric", {})),
        fatness=_parse_fatness(data.get("fatness", {})),
        certify=_parse_certify(data.get("certify", {})),
        scan=_parse_scan(data.get("scan", {})),
        sweep=_parse_sweep(data.get("sweep", {})),
        seed=_get_typed(data, "seed", int, "config", default=0),
        out=_get_typed(data, "out", str, "config"),
        format=fmt,
        figures=_get_typed(data, "figures", bool, "config", default=True),
    )


def load_config(path) -> RunConfig:
    """Read and validate a TOML config file."""
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"config file not found: {p}")
    try:
        with open(p, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"malformed config file {p}: {exc}") from None
    return parse_config(data)

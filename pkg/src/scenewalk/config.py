"""Flat key-value experiment configuration.

The file format is deliberately primitive: one `key = value` per line,
dotted section keys, `#` comments, matrices as row-major comma lists.
Observables are semicolon lists of terms, each either

    coeff:const                  a constant term, or
    coeff:k1,k2[,...][:phase]    coeff * cos(2 pi (k1 x1 + k2 x2 + ...) + phase)

e.g. "0.5:const; 0.5:1,0" is (1 + cos(2 pi x1)) / 2.
"""

from __future__ import annotations

import hashlib

import numpy as np

from . import scenery, torus
from .errors import ConfigError

_DEFAULTS = {
    "run.reps": "1000",
    "run.seed": "0",
    "run.threads": "1",
    "analysis.P": "32",
    "analysis.t_grid": "-3:3:61",
    "analysis.v_method": "walk",
    "analysis.m": "10000",
    "analysis.eps": "0.05",
    "analysis.sigma2": "1.0",
    "analysis.n_grid": "8,16,32,48",
    "analysis.gaps": "1,2,4,8",
    "analysis.block_len": "2",
    "analysis.n_max": "12",
    "output.dir": ".",
}


def parse_config(text: str) -> dict[str, str]:
    """Parse config text into a key -> value string map."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value.strip()
    return out


def serialize_config(cfg: dict[str, str]) -> str:
    """Canonical text form; parse(serialize(parse(t))) == parse(t)."""
    return "".join(f"{k} = {cfg[k]}\n" for k in sorted(cfg))


def config_hash(cfg: dict[str, str]) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()[:12]


def get(cfg: dict[str, str], key: str, default: str | None = None) -> str:
    if key in cfg:
        return cfg[key]
    if default is not None:
        return default
    if key in _DEFAULTS:
        return _DEFAULTS[key]
    raise ConfigError(f"missing config key {key!r}")


def get_int(cfg, key, default=None) -> int:
    try:
        return int(get(cfg, key, default))
    except ValueError as e:
        raise ConfigError(f"key {key!r}: {e}") from None


def get_float(cfg, key, default=None) -> float:
    try:
        return float(get(cfg, key, default))
    except ValueError as e:
        raise ConfigError(f"key {key!r}: {e}") from None


def int_list(cfg, key, default=None) -> list[int]:
    try:
        return [int(v) for v in get(cfg, key, default).split(",") if v.strip()]
    except ValueError as e:
        raise ConfigError(f"key {key!r}: {e}") from None


def float_list(cfg, key, default=None) -> list[float]:
    try:
        return [float(v) for v in get(cfg, key, default).split(",") if v.strip()]
    except ValueError as e:
        raise ConfigError(f"key {key!r}: {e}") from None


def parse_grid(spec: str) -> np.ndarray:
    """'lo:hi:count' linear grid."""
    try:
        lo, hi, count = spec.split(":")
        return np.linspace(float(lo), float(hi), int(count))
    except ValueError as e:
        raise ConfigError(f"bad grid spec {spec!r}: {e}") from None


def parse_observable(spec: str) -> torus.TrigPolynomial:
    """Parse the observable term grammar documented in the module docstring."""
    terms = []
    constant = 0.0
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        fields = part.split(":")
        if len(fields) not in (2, 3):
            raise ConfigError(f"bad observable term {part!r}")
        try:
            coeff = float(fields[0])
        except ValueError:
            raise ConfigError(f"bad coefficient in observable term {part!r}") from None
        if fields[1].strip() == "const":
            constant += coeff
            continue
        try:
            freq = tuple(int(v) for v in fields[1].split(","))
            phase = float(fields[2]) if len(fields) == 3 else 0.0
        except ValueError:
            raise ConfigError(f"bad frequency/phase in observable term {part!r}") from None
        terms.append((freq, coeff, phase))
    return torus.TrigPolynomial(terms=tuple(terms), constant=constant)


def build_map(cfg: dict[str, str]) -> torus.TorusMap:
    d = get_int(cfg, "model.dim", "2")
    entries = int_list(cfg, "model.map")
    if len(entries) != d * d:
        raise ConfigError(f"model.map needs {d * d} row-major entries, got {len(entries)}")
    return torus.make_torus_map(np.array(entries, dtype=np.int64).reshape(d, d))


def build_model(cfg: dict[str, str]) -> scenery.SceneryModel:
    """Build and validate the scenery model described by a config."""
    variant = get(cfg, "model.variant")
    if variant == "iid-rademacher":
        model = scenery.IIDScenery("rademacher")
    elif variant == "iid-gaussian":
        model = scenery.IIDScenery("gaussian", sd=get_float(cfg, "model.sd", "1.0"))
    elif variant in ("torus-direct", "torus-coin"):
        tmap = build_map(cfg)
        f = parse_observable(get(cfg, "model.f"))
        cls = scenery.TorusDirect if variant == "torus-direct" else scenery.TorusCoin
        model = cls(map=tmap, f=f)
    elif variant == "torus-multi":
        tmap = build_map(cfg)
        thetas = tuple(float_list(cfg, "model.thetas"))
        fs = []
        for j in range(1, len(thetas) + 1):
            fs.append(parse_observable(get(cfg, f"model.f{j}")))
        model = scenery.TorusMulti(map=tmap, thetas=thetas, fs=tuple(fs))
    else:
        raise ConfigError(f"unknown model.variant {variant!r}")
    scenery.validate_model(model)
    return model

"""Flat ``key = value`` experiment configuration.

One experiment per file. Blank lines and ``#`` comments are ignored;
every other line is ``key = value`` with a known key. Vectors are
comma-separated numbers, matrices are rows of such vectors separated by
``;``. :func:`serialize` writes every key in a fixed order, so
``serialize(parse(serialize(cfg))) == serialize(cfg)``.

Keys
----
source              law of one source symbol, e.g. ``0.5,0.5``
channel             ``bsc`` | ``bec`` | ``matrix``
channel_p           crossover / erasure probability for bsc / bec
channel_matrix      rows of the channel when ``channel = matrix``
kappa               channel uses per source symbol (>= 0)
perception          ``tv`` | ``scaled_tv`` | ``w2sq``
perception_embedding real embedding of the symbols for ``w2sq``
distortion          ``hamming`` | ``matrix``
distortion_matrix   rows of the distortion when ``distortion = matrix``
solver_*            fields of :class:`dpsep.rdp.SolverConfig`
scheme              uncoded | zero_rate | quantize_restore | cr_synthesis | separated | concat
scheme_mode         auto | exact | monte_carlo
scheme_R            description rate in bits per symbol
scheme_test_p       crossover of the BSC test channel for cr_synthesis
scheme_p_budget     per-letter TV slack allowed to the restoration step
scheme_code         quantizer | dithered (source code inside ``separated``)
scheme_err_inject, scheme_eps_R, scheme_delta_R   pipeline parameters
scheme_parts        ``name:copies`` list for ``concat``, e.g. ``uncoded:1,zero_rate:1``
trials, seed, n, k  integers
check_trials        trials per assumption check in ``audit``
region_points       number of perception budgets in ``region``
output_path         default output file (empty: stdout)
"""

from dataclasses import dataclass, fields, replace

import numpy as np

from .perception import scaled_tv_family, tv_family, w2sq_family
from .probcore import Channel, Dist, DistortionFn, bec, bsc, hamming
from .rdp import SolverConfig

CHANNELS = ("bsc", "bec", "matrix")
PERCEPTIONS = ("tv", "scaled_tv", "w2sq")
DISTORTIONS = ("hamming", "matrix")
SCHEMES = ("uncoded", "zero_rate", "quantize_restore", "cr_synthesis", "separated", "concat")
MODES = ("auto", "exact", "monte_carlo")
CODES = ("quantizer", "dithered")


class ConfigError(ValueError):
    """Malformed or out-of-range configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    source: tuple = (0.5, 0.5)
    channel: str = "bsc"
    channel_p: float = 0.1
    channel_matrix: tuple = ()
    kappa: float = 1.0
    perception: str = "tv"
    perception_embedding: tuple = ()
    distortion: str = "hamming"
    distortion_matrix: tuple = ()
    solver_grid_resolution: int = 64
    solver_refinement_iters: int = 200
    solver_tolerance: float = 1e-6
    solver_seed: int = 0
    solver_starts: int = 4
    scheme: str = "uncoded"
    scheme_mode: str = "auto"
    scheme_R: float = 0.5
    scheme_test_p: float = 0.1
    scheme_p_budget: float = 0.0
    scheme_code: str = "quantizer"
    scheme_err_inject: float = 0.0
    scheme_eps_R: float = 0.1
    scheme_delta_R: float = 0.0
    scheme_parts: str = "uncoded:1,zero_rate:1"
    trials: int = 10000
    seed: int = 0
    n: int = 4
    k: int = 1
    check_trials: int = 500
    region_points: int = 5
    output_path: str = ""

    def __post_init__(self):
        validate(self)

    # -- derived objects ---------------------------------------------------
    def source_dist(self):
        return Dist(self.source)

    def channel_obj(self):
        if self.channel == "bsc":
            return bsc(self.channel_p)
        if self.channel == "bec":
            return bec(self.channel_p)
        return Channel(np.array(self.channel_matrix))

    def distortion_obj(self):
        if self.distortion == "hamming":
            return hamming(len(self.source))
        return DistortionFn(np.array(self.distortion_matrix))

    def perception_obj(self):
        if self.perception == "tv":
            return tv_family()
        if self.perception == "scaled_tv":
            return scaled_tv_family()
        return w2sq_family(self.perception_embedding or np.arange(len(self.source), dtype=float))

    def solver(self):
        return SolverConfig(
            grid_resolution=self.solver_grid_resolution,
            refinement_iters=self.solver_refinement_iters,
            tolerance=self.solver_tolerance,
            seed=self.solver_seed,
            starts=self.solver_starts,
        )

    def parts(self):
        return parse_parts(self.scheme_parts)


def _field_kind(f):
    if f.name in ("channel_matrix", "distortion_matrix"):
        return "matrix"
    if f.name in ("source", "perception_embedding"):
        return "vector"
    return {int: "int", float: "float", str: "str"}[f.type]


def parse_parts(text):
    out = []
    for item in filter(None, (t.strip() for t in text.split(","))):
        name, _, copies = item.partition(":")
        name = name.strip()
        if name not in SCHEMES or name == "concat":
            raise ConfigError(f"unknown concat part {name!r}")
        try:
            c = int(copies) if copies else 1
        except ValueError as exc:
            raise ConfigError(f"bad copy count in {item!r}") from exc
        if c < 0:
            raise ConfigError("copy counts must be nonnegative")
        out.append((name, c))
    if not out or sum(c for _, c in out) == 0:
        raise ConfigError("scheme_parts needs at least one copy")
    return out


def _in(name, value, options):
    if value not in options:
        raise ConfigError(f"{name} must be one of {options}, got {value!r}")


def _prob(name, value):
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name} must lie in [0, 1], got {value}")


def validate(cfg):
    _in("channel", cfg.channel, CHANNELS)
    _in("perception", cfg.perception, PERCEPTIONS)
    _in("distortion", cfg.distortion, DISTORTIONS)
    _in("scheme", cfg.scheme, SCHEMES)
    _in("scheme_mode", cfg.scheme_mode, MODES)
    _in("scheme_code", cfg.scheme_code, CODES)
    try:
        Dist(cfg.source)
        if cfg.channel == "matrix":
            Channel(np.array(cfg.channel_matrix))
        if cfg.distortion == "matrix":
            d = DistortionFn(np.array(cfg.distortion_matrix))
            if d.matrix.shape != (len(cfg.source),) * 2:
                raise ConfigError("distortion matrix must be square on the source alphabet")
        if cfg.perception == "w2sq" and cfg.perception_embedding:
            if len(cfg.perception_embedding) != len(cfg.source):
                raise ConfigError("perception_embedding must have one entry per symbol")
        SolverConfig(cfg.solver_grid_resolution, cfg.solver_refinement_iters, cfg.solver_tolerance,
                     None, cfg.solver_seed, cfg.solver_starts)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for name in ("channel_p", "scheme_test_p", "scheme_err_inject", "scheme_eps_R"):
        _prob(name, getattr(cfg, name))
    for name in ("kappa", "scheme_R", "scheme_p_budget", "scheme_delta_R"):
        v = getattr(cfg, name)
        if not (np.isfinite(v) and v >= 0):
            raise ConfigError(f"{name} must be finite and nonnegative, got {v}")
    for name in ("trials", "n", "k", "check_trials", "region_points"):
        if getattr(cfg, name) < 1:
            raise ConfigError(f"{name} must be at least 1")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    parse_parts(cfg.scheme_parts)


def _fmt_num(x):
    return repr(float(x))


def _format(kind, value):
    if kind == "vector":
        return ",".join(_fmt_num(x) for x in value)
    if kind == "matrix":
        return ";".join(",".join(_fmt_num(x) for x in row) for row in value)
    if kind == "float":
        return _fmt_num(value)
    return str(value)


def _convert(kind, name, text):
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "vector":
            return tuple(float(x) for x in text.split(",") if x.strip()) if text else ()
        if kind == "matrix":
            if not text:
                return ()
            rows = tuple(tuple(float(x) for x in r.split(",")) for r in text.split(";"))
            if len({len(r) for r in rows}) != 1:
                raise ConfigError(f"{name}: ragged matrix")
            return rows
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {text!r}") from exc
    return text


def parse(text):
    """Parse a config document; unknown or repeated keys are errors."""
    kinds = {f.name: _field_kind(f) for f in fields(ExperimentConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key not in kinds:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: repeated key {key!r}")
        values[key] = _convert(kinds[key], key, value)
    return ExperimentConfig(**values)


def serialize(cfg):
    lines = [f"{f.name} = {_format(_field_kind(f), getattr(cfg, f.name))}".rstrip() for f in fields(cfg)]
    return "\n".join(lines) + "\n"


def load(path):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def with_overrides(cfg, **kw):
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})

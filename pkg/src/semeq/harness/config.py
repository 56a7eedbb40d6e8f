"""Experiment configuration and the flat key-value config file format.

Grammar: one ``key = value`` pair per line; ``#`` starts a comment
(full-line or trailing); blank lines are ignored; repeating a key appends
to a list. Values are scalars (numbers, booleans, names, paths).

Example::

    scenario = toy-codec
    image_size = 12
    equalizer = linear      # repeated keys form lists
    equalizer = pfe
    pilots = 32
    pilots = 128
    snr_align = 10
    seed = 42
    seed = 43
    out = sweep.csv
"""

from dataclasses import dataclass

from ..errors import ConfigError

EQUALIZER_KINDS = ("none", "linear", "mlp", "cnn1", "cnn2", "pfe", "pfe-full")
SCENARIO_KINDS = ("mismatch", "toy-codec")

_LIST_KEYS = {"equalizer", "pilots", "snr_align", "seed"}
_KNOWN_KEYS = _LIST_KEYS | {
    "scenario",
    "family",
    "d",
    "m",
    "layout_c",
    "layout_h",
    "layout_w",
    "image_size",
    "latent_dim",
    "seed_tx",
    "seed_rx",
    "dataset_seed",
    "pool_size",
    "eval_size",
    "snr_eval",
    "snr_djsc",
    "fading",
    "noise_repeats",
    "power_budget",
    "out",
    "workers",
    "max_epochs",
    "patience",
    "batch_size",
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass
class ExperimentConfig:
    scenario: str = "mismatch"
    family: str = "orthogonal"
    d: int = 16
    m: int | None = None
    layout: tuple[int, int, int] | None = None
    image_size: int = 12
    latent_dim: int | None = None
    seed_tx: int = 42
    seed_rx: int = 43
    dataset_seed: int = 7
    pool_size: int = 4000
    eval_size: int = 2000
    equalizers: tuple[str, ...] = ("linear",)
    pilots: tuple[int, ...] = (64,)
    snr_align: tuple[float, ...] = (10.0,)
    snr_eval: float | None = None
    snr_djsc: float | None = None
    fading: bool = False
    seeds: tuple[int, ...] = (42, 43, 44, 45, 46)
    noise_repeats: int = 1
    power_budget: float | None = None
    out: str | None = None
    workers: int = 1
    max_epochs: int = 2000
    patience: int = 20
    batch_size: int = 64

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.scenario not in SCENARIO_KINDS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if not self.equalizers:
            raise ConfigError("equalizer list is empty")
        for kind in self.equalizers:
            if kind not in EQUALIZER_KINDS:
                raise ConfigError(f"unknown equalizer {kind!r}")
        if len(set(self.equalizers)) != len(self.equalizers):
            raise ConfigError("equalizer list has duplicates")
        if not self.pilots:
            raise ConfigError("pilot grid is empty")
        if any(n < 1 for n in self.pilots):
            raise ConfigError("pilot counts must be >= 1")
        if max(self.pilots) > self.pool_size:
            raise ConfigError("pilot grid exceeds pool_size")
        if not self.snr_align:
            raise ConfigError("snr_align grid is empty")
        if not self.seeds:
            raise ConfigError("seed list is empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if self.noise_repeats < 1:
            raise ConfigError("noise_repeats must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.eval_size < 1:
            raise ConfigError("eval_size must be >= 1")


def parse_config_text(text):
    """Parse the key-value grammar into {key: [values...]}."""
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        pairs.setdefault(key, []).append(value)
    return pairs


def _bool(value, key):
    low = value.lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def _scalar(pairs, key, convert, default=None):
    if key not in pairs:
        return default
    values = pairs[key]
    if len(values) > 1:
        raise ConfigError(f"{key} given {len(values)} times; expected once")
    try:
        return convert(values[0])
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def config_from_pairs(pairs):
    """Build an ExperimentConfig from parsed key-value pairs."""
    unknown = set(pairs) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    kwargs["scenario"] = _scalar(pairs, "scenario", str, "mismatch")
    kwargs["family"] = _scalar(pairs, "family", str, "orthogonal")
    kwargs["d"] = _scalar(pairs, "d", int, 16)
    kwargs["m"] = _scalar(pairs, "m", int)
    layout = tuple(
        _scalar(pairs, key, int) for key in ("layout_c", "layout_h", "layout_w")
    )
    if any(v is not None for v in layout):
        if any(v is None for v in layout):
            raise ConfigError("layout_c, layout_h, layout_w must be given together")
        kwargs["layout"] = layout
    kwargs["image_size"] = _scalar(pairs, "image_size", int, 12)
    kwargs["latent_dim"] = _scalar(pairs, "latent_dim", int)
    kwargs["seed_tx"] = _scalar(pairs, "seed_tx", int, 42)
    kwargs["seed_rx"] = _scalar(pairs, "seed_rx", int, 43)
    kwargs["dataset_seed"] = _scalar(pairs, "dataset_seed", int, 7)
    kwargs["pool_size"] = _scalar(pairs, "pool_size", int, 4000)
    kwargs["eval_size"] = _scalar(pairs, "eval_size", int, 2000)
    if "equalizer" in pairs:
        kwargs["equalizers"] = tuple(pairs["equalizer"])
    if "pilots" in pairs:
        try:
            kwargs["pilots"] = tuple(int(v) for v in pairs["pilots"])
        except ValueError as exc:
            raise ConfigError(f"pilots: {exc}") from exc
    if "snr_align" in pairs:
        try:
            kwargs["snr_align"] = tuple(float(v) for v in pairs["snr_align"])
        except ValueError as exc:
            raise ConfigError(f"snr_align: {exc}") from exc
    kwargs["snr_eval"] = _scalar(pairs, "snr_eval", float)
    kwargs["snr_djsc"] = _scalar(pairs, "snr_djsc", float)
    if "fading" in pairs:
        kwargs["fading"] = _bool(pairs["fading"][-1], "fading")
    if "seed" in pairs:
        try:
            kwargs["seeds"] = tuple(int(v) for v in pairs["seed"])
        except ValueError as exc:
            raise ConfigError(f"seed: {exc}") from exc
    kwargs["noise_repeats"] = _scalar(pairs, "noise_repeats", int, 1)
    kwargs["power_budget"] = _scalar(pairs, "power_budget", float)
    kwargs["out"] = _scalar(pairs, "out", str)
    kwargs["workers"] = _scalar(pairs, "workers", int, 1)
    kwargs["max_epochs"] = _scalar(pairs, "max_epochs", int, 2000)
    kwargs["patience"] = _scalar(pairs, "patience", int, 20)
    kwargs["batch_size"] = _scalar(pairs, "batch_size", int, 64)
    if kwargs.get("snr_djsc") is not None and "snr_align" not in pairs:
        kwargs["snr_align"] = (kwargs["snr_djsc"],)
    return ExperimentConfig(**kwargs)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_pairs(parse_config_text(fh.read()))

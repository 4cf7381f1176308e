"""Run configuration: defaults, INI files, previous manifests and command-line flags.

Precedence, lowest first: built-in defaults, config file, flags. Config files
are INI with the sections below; a ``manifest.json`` from an earlier run is
accepted in place of an INI file and reproduces that run.

    [model]        name
    [truncation]   phi_coefficient, phi_exponent, nu
    [scheme]       dt, horizon, steps, override_admissibility, storage, batch_size
    [ensemble]     samples, initial, master_seed, workers
    [observation]  mean_every, ecdf_times, capture_times, functionals
    [distance]     method, subsample, epsilon, max_iterations
    [coupling]     pairs
    [output]       directory, plots
"""

import configparser
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from src.enums import DistanceMethod, StorageMode, parse_enum
from src.exceptions import ConfigurationError, UsageError
from src.models.functional import parse_functional
from src.models.grid import Grid
from src.models.initial_data import parse_initial
from src.models.sdde_model import EXAMPLE_MODEL, get_model

logger = logging.getLogger(__name__)


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(part) for part in text.replace(",", " ").split())


def _names(text: str) -> Tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _pairs(text: str) -> Tuple[Tuple[str, str], ...]:
    pairs = []
    for item in _names(text):
        first, sep, second = item.partition("/")
        if not sep or not first.strip() or not second.strip():
            raise ValueError(f"coupling pair '{item}' must look like a/b")
        pairs.append((first.strip(), second.strip()))
    return tuple(pairs)


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: '{text}'")


def _optional_int(text: str) -> Optional[int]:
    return None if text.strip().lower() in ("", "none") else int(text)


# (section, key) -> (field, parser)
INI_KEYS: Dict[Tuple[str, str], Tuple[str, Callable[[str], Any]]] = {
    ("model", "name"): ("model", str.strip),
    ("truncation", "phi_coefficient"): ("phi_coefficient", float),
    ("truncation", "phi_exponent"): ("phi_exponent", float),
    ("truncation", "nu"): ("nu", float),
    ("scheme", "dt"): ("dts", _floats),
    ("scheme", "horizon"): ("horizon", float),
    ("scheme", "steps"): ("steps", _optional_int),
    ("scheme", "override_admissibility"): ("override_admissibility", _bool),
    ("scheme", "storage"): ("storage", lambda text: parse_enum(StorageMode, text)),
    ("scheme", "batch_size"): ("batch_size", int),
    ("ensemble", "samples"): ("samples", int),
    ("ensemble", "initial"): ("initials", _names),
    ("ensemble", "master_seed"): ("master_seed", int),
    ("ensemble", "workers"): ("workers", int),
    ("observation", "mean_every"): ("mean_every", float),
    ("observation", "ecdf_times"): ("ecdf_times", _floats),
    ("observation", "capture_times"): ("capture_times", _floats),
    ("observation", "functionals"): ("functionals", _names),
    ("distance", "method"): ("distance_method", lambda text: parse_enum(DistanceMethod, text)),
    ("distance", "subsample"): ("subsample", int),
    ("distance", "epsilon"): ("epsilon", float),
    ("distance", "max_iterations"): ("max_iterations", int),
    ("coupling", "pairs"): ("coupling_pairs", _pairs),
    ("output", "directory"): ("out_dir", str.strip),
    ("output", "plots"): ("plots", _bool),
}


@dataclass
class RunConfig:
    """Everything one ``run`` needs; times are decimal and checked against each grid."""

    model: str = EXAMPLE_MODEL
    phi_coefficient: float = 16.0
    phi_exponent: float = 4.0
    nu: float = 0.01
    dts: Tuple[float, ...] = (1e-3,)
    horizon: float = 10.0
    steps: Optional[int] = None
    override_admissibility: bool = False
    storage: StorageMode = StorageMode.STREAMING
    batch_size: int = 500
    samples: int = 2000
    initials: Tuple[str, ...] = ("xi1", "xi2", "xi3")
    master_seed: int = 0
    workers: int = 1
    mean_every: float = 0.1
    ecdf_times: Tuple[float, ...] = ()
    capture_times: Tuple[float, ...] = ()
    functionals: Tuple[str, ...] = ("cos-norm", "clip-norm-2")
    distance_method: DistanceMethod = DistanceMethod.EXACT
    subsample: int = 512
    epsilon: float = 0.01
    max_iterations: int = 10_000
    coupling_pairs: Tuple[Tuple[str, str], ...] = ()
    out_dir: str = "temsp-out"
    plots: bool = False
    extra: Dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def grid(self, dt: float) -> Grid:
        """Return the grid for one step size, with the horizon in steps."""
        tau = get_model(self.model).tau
        grid = Grid.from_dt(tau, dt)
        if self.steps is not None:
            return grid.with_steps(self.steps)
        return grid.with_steps(grid.steps_for_time(self.horizon))

    def observation_steps(self, grid: Grid) -> Dict[str, List[int]]:
        """Convert the observation times to step indices on a grid.

        Raises:
            UsageError: If a time is off-grid or beyond the horizon
        """
        stride = grid.steps_for_time(self.mean_every)
        if stride < 1:
            raise UsageError(f"mean_every must be at least one step, got {self.mean_every}")
        means = list(range(0, grid.n_steps + 1, stride))
        if means[-1] != grid.n_steps:
            means.append(grid.n_steps)
        ecdf = [grid.steps_for_time(t) for t in self.ecdf_times] or [grid.n_steps]
        capture = [grid.steps_for_time(t) for t in self.capture_times]
        for k in ecdf + capture:
            if not 0 <= k <= grid.n_steps:
                raise UsageError(f"observation step {k} lies beyond the horizon {grid.n_steps}")
        return {"means": means, "ecdf": sorted(set(ecdf)), "capture": sorted(set(capture))}

    def validate(self) -> None:
        """Check every field and raise once with all problems found.

        Raises:
            ConfigurationError: If anything is invalid
        """
        problems: List[str] = []
        try:
            model = get_model(self.model)
        except ConfigurationError as exc:
            problems.extend(exc.problems)
            model = None
        if not self.dts:
            problems.append("at least one dt is required")
        if self.samples < 1:
            problems.append(f"samples must be >= 1, got {self.samples}")
        if self.workers < 1:
            problems.append(f"workers must be >= 1, got {self.workers}")
        if self.batch_size < 1:
            problems.append(f"batch_size must be >= 1, got {self.batch_size}")
        if self.subsample < 1:
            problems.append(f"subsample must be >= 1, got {self.subsample}")
        if not self.epsilon > 0:
            problems.append(f"epsilon must be > 0, got {self.epsilon}")
        if self.steps is not None and self.steps < 0:
            problems.append(f"steps must be >= 0, got {self.steps}")
        if not self.initials:
            problems.append("at least one initial datum is required")
        for name in self.functionals:
            try:
                parse_functional(name)
            except ConfigurationError as exc:
                problems.extend(exc.problems)
        if model is not None:
            for spec in self.initials:
                try:
                    parse_initial(spec, model.d)
                except ConfigurationError as exc:
                    problems.extend(exc.problems)
            for dt in self.dts:
                try:
                    self.observation_steps(self.grid(dt))
                except (ConfigurationError, UsageError) as exc:
                    problems.extend(getattr(exc, "problems", [str(exc)]))
        for first, second in self.coupling_pairs:
            for name in (first, second):
                if name not in self.initials:
                    problems.append(f"coupling pair member '{name}' is not a configured initial")
        if problems:
            raise ConfigurationError("Invalid run configuration", problems)

    def to_dict(self) -> Dict[str, Any]:
        """Return the resolved configuration as JSON-friendly values."""
        data = asdict(self)
        data.pop("extra")
        data["storage"] = self.storage.name.lower()
        data["distance_method"] = self.distance_method.value
        data["dts"] = list(self.dts)
        data["initials"] = list(self.initials)
        data["ecdf_times"] = list(self.ecdf_times)
        data["capture_times"] = list(self.capture_times)
        data["functionals"] = list(self.functionals)
        data["coupling_pairs"] = [list(pair) for pair in self.coupling_pairs]
        return data


def _coerce(name: str, value: Any) -> Any:
    """Convert a JSON or flag value to the field's type."""
    if value is None:
        return None
    if name == "storage" and not isinstance(value, StorageMode):
        return parse_enum(StorageMode, str(value))
    if name == "distance_method" and not isinstance(value, DistanceMethod):
        return parse_enum(DistanceMethod, str(value))
    if name == "coupling_pairs":
        return tuple(tuple(pair) for pair in value)
    if name in ("dts", "ecdf_times", "capture_times"):
        return tuple(float(v) for v in value)
    if name in ("initials", "functionals"):
        return tuple(str(v) for v in value)
    return value


def read_ini(path: Path) -> Dict[str, Any]:
    """Read an INI config file into field overrides.

    Raises:
        ConfigurationError: Listing every unknown key and unparsable value
    """
    parser = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except configparser.Error as exc:
        raise ConfigurationError(f"Cannot parse config file {path}: {exc}") from exc
    values: Dict[str, Any] = {}
    problems = []
    for section in parser.sections():
        for key, text in parser.items(section):
            entry = INI_KEYS.get((section, key))
            if entry is None:
                problems.append(f"unknown key [{section}] {key}")
                continue
            name, parse = entry
            try:
                values[name] = parse(text)
            except ValueError as exc:
                problems.append(f"[{section}] {key}: {exc}")
    if problems:
        raise ConfigurationError(f"Invalid config file {path}", problems)
    return values


def read_manifest(path: Path) -> Dict[str, Any]:
    """Read the resolved configuration recorded in a run manifest."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            manifest = json.load(handle)
        config = manifest["config"]
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigurationError(f"Cannot read manifest {path}: {exc}") from exc
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(config) - known)
    if unknown:
        raise ConfigurationError(f"Manifest {path} has unknown config keys", unknown)
    try:
        return {name: _coerce(name, value) for name, value in config.items()}
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"Manifest {path} has an invalid value: {exc}") from exc


def load_config_file(path) -> Dict[str, Any]:
    """Read overrides from an INI file or a ``.json`` manifest."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Config file {path} does not exist")
    if path.suffix.lower() == ".json":
        return read_manifest(path)
    return read_ini(path)


def resolve_config(
    config_path=None, flags: Optional[Dict[str, Any]] = None, base: Optional[RunConfig] = None
) -> RunConfig:
    """Apply defaults, then the config file, then flags, and validate.

    Args:
        config_path: Optional INI file or manifest
        flags: Field overrides from the command line; None values are ignored
        base: Defaults to start from (a plain ``RunConfig`` if omitted)

    Returns:
        The validated configuration

    Raises:
        ConfigurationError: With every violated field
    """
    values = (base or RunConfig()).__dict__.copy()
    if config_path is not None:
        values.update(load_config_file(config_path))
        logger.debug("Loaded config file %s", config_path)
    for name, value in (flags or {}).items():
        if value is not None:
            values[name] = _coerce(name, value)
    config = RunConfig(**values)
    config.validate()
    return config

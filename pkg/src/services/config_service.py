"""
Configuration Service - Run configuration persistence

Manages the INI-style defaults file (~/.config/mdz/mdz.ini) and the
RunConfig handed from the command line to the services.
"""

import configparser
import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

from services.series_service import EvalParams

logger = logging.getLogger(__name__)

SECTION = 'mdz'
THREADS_ENV = 'MDZ_THREADS'


@dataclass(frozen=True)
class RunConfig:
    """
    Everything one `mdz eval` run needs, as literals.

    to_ini() and to_argv() print it so that parsing the output gives back
    an equal RunConfig.
    """

    field: str = "Q"
    cones: str = "1"
    exp: str = "2"
    bound: Optional[int] = None
    tol: float = 1e-8
    threads: int = 1
    format: str = "json"
    mode: str = "sum"

    def params(self) -> EvalParams:
        return EvalParams(bound=self.bound, tol=self.tol, threads=self.threads, mode=self.mode)

    def to_ini(self) -> str:
        lines = [f"[{SECTION}]"]
        for key, value in self._items().items():
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"

    def to_argv(self) -> List[str]:
        argv = []
        for key, value in self._items().items():
            argv.extend([f"--{key}", value])
        return argv

    def _items(self) -> Dict[str, str]:
        items = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            items[f.name] = repr(value) if isinstance(value, float) else str(value)
        return items

    @classmethod
    def from_ini(cls, text: str) -> 'RunConfig':
        """Parse INI text; a missing section header means the [mdz] section."""
        values = read_ini(text)
        return cls(**{k: coerce(k, v) for k, v in values.items()})


def read_ini(text: str) -> Dict[str, str]:
    """key=value pairs of the [mdz] section, unknown keys dropped."""
    if not text.lstrip().startswith('['):
        text = f"[{SECTION}]\n" + text
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_string(text)
    if not parser.has_section(SECTION):
        return {}
    known = {f.name for f in fields(RunConfig)}
    values = {}
    for key, value in parser.items(SECTION):
        if key in known:
            values[key] = value.strip()
        else:
            logger.warning("Ignoring unknown config key '%s'", key)
    return values


def coerce(key: str, value: Any) -> Any:
    """Convert a config string to the RunConfig field's type."""
    if not isinstance(value, str):
        return value
    if key == 'bound':
        return int(value) if value else None
    if key == 'tol':
        return float(value)
    if key == 'threads':
        return int(value)
    return value


class ConfigService:
    """
    Service class for loading run defaults.

    Precedence: command-line flags, then the config file, then MDZ_THREADS
    (threads only), then DEFAULT_CONFIG.
    """

    CONFIG_DIR = Path.home() / '.config' / 'mdz'
    CONFIG_FILE = CONFIG_DIR / 'mdz.ini'

    DEFAULT_CONFIG = asdict(RunConfig())

    def __init__(self, path: Optional[str] = None, environ: Optional[Dict[str, str]] = None):
        self._path = Path(path) if path else self.CONFIG_FILE
        self._explicit = path is not None
        self._environ = os.environ if environ is None else environ
        self._config = dict(self.DEFAULT_CONFIG)
        self._apply_environment()
        self._load_config()

    def _apply_environment(self):
        raw = self._environ.get(THREADS_ENV)
        if raw is None:
            return
        try:
            threads = int(raw)
            if threads < 1:
                raise ValueError(raw)
        except ValueError:
            logger.warning("Ignoring %s=%r (expected a positive integer)", THREADS_ENV, raw)
            return
        self._config['threads'] = threads

    def _load_config(self):
        """Load configuration from file."""
        if not self._path.exists():
            if self._explicit:
                logger.warning("Config file %s does not exist; using defaults", self._path)
            return
        try:
            loaded = read_ini(self._path.read_text(encoding='utf-8'))
            self._config.update({k: coerce(k, v) for k, v in loaded.items()})
        except (configparser.Error, ValueError, OSError) as e:
            logger.warning("Could not read config file %s (%s); using defaults", self._path, e)

    def save(self, config: RunConfig) -> bool:
        """
        Save a run configuration as the new defaults.

        Returns:
            True if the file was written, False otherwise
        """
        try:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            self._path.write_text(config.to_ini(), encoding='utf-8')
            return True
        except OSError as e:
            logger.warning("Could not write config file %s (%s)", self._path, e)
            return False

    @property
    def path(self) -> Path:
        return self._path

    @property
    def threads(self) -> int:
        return self._config['threads']

    @property
    def tol(self) -> float:
        return self._config['tol']

    @property
    def bound(self) -> Optional[int]:
        return self._config['bound']

    @property
    def output_format(self) -> str:
        return self._config['format']

    @property
    def mode(self) -> str:
        return self._config['mode']

    def run_config(self, **overrides) -> RunConfig:
        """
        The defaults with every non-None override applied.

        Args:
            **overrides: RunConfig field values from the command line

        Returns:
            RunConfig
        """
        base = RunConfig(**self._config)
        given = {k: coerce(k, v) for k, v in overrides.items() if v is not None}
        return replace(base, **given)

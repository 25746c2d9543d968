"""
Run configuration, read from a TOML file with one table per processing stage:

    [run]         seed, verbosity
    [paths]       input and output files (relative paths are resolved against the config file)
    [features]    feature extraction thresholds
    [confidence]  noise and complete thresholds
    [ga]          genetic algorithm parameters
    [zones]       zone learning parameters
    [triplets]    triplet time-window mode
    [repair]      gap interpolation
    [synth]       synthetic scene generator

All randomness derives from the global seed: every stage uses its own seed, derived from the
global seed and the stage name, unless its table sets `rng_seed` explicitly.
"""
import hashlib
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .confidence import ConfidenceConfig
from .exceptions import ConfigError
from .features import FeatureConfig
from .genetic import GaConfig
from .repair import RepairConfig
from .synthetic import SynthConfig
from .triplets import TripletConfig
from .zone_learning import ZoneLearningConfig

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20080101

VERBOSITY_LEVELS = {
    'debug': logging.DEBUG,
    'info': logging.INFO,
    'warning': logging.WARNING,
    'error': logging.ERROR,
}

PATH_KEYS = (
    'workdir',
    'scene',
    'trajectories',
    'truth',
    'weights',
    'learned_zones',
    'scores',
    'triplets',
    'repaired',
    'fusions',
    'report',
)

SECTIONS = ('run', 'paths', 'features', 'confidence', 'ga', 'zones', 'triplets', 'repair', 'synth')

# Stages with a seeded random number generator
SEEDED_SECTIONS = ('ga', 'synth')


def derive_seed(seed, module):
    """
    Derive the seed of a processing stage from the global seed.

    Parameters
    ----------
    seed : int
        Global seed.
    module : str
        Stage name (e.g., "ga").

    Returns
    -------
    seed : int
        First 8 bytes of SHA-256("<seed>:<module>"), as an unsigned integer modulo 2**32.
    """
    digest = hashlib.sha256(f"{seed}:{module}".encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big') % 2**32


@dataclass(frozen=True)
class RunConfig:
    seed: int = DEFAULT_SEED
    verbosity: str = 'info'
    paths: Dict[str, str] = field(default_factory=dict)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    confidence: ConfidenceConfig = field(default_factory=ConfidenceConfig)
    ga: GaConfig = field(default_factory=GaConfig)
    zones: ZoneLearningConfig = field(default_factory=ZoneLearningConfig)
    triplets: TripletConfig = field(default_factory=TripletConfig)
    repair: RepairConfig = field(default_factory=RepairConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    explicit_seeds: FrozenSet[str] = frozenset()  # sections that set rng_seed themselves

    def path(self, key):
        """Configured path for the given key, or None."""
        assert key in PATH_KEYS
        return self.paths.get(key)

    def stage_seed(self, module):
        """Seed of a processing stage (derived from the global seed unless set explicitly)."""
        if module in self.explicit_seeds:
            return getattr(self, module).rng_seed
        return derive_seed(self.seed, module)

    def ga_config(self):
        return replace(self.ga, rng_seed=self.stage_seed('ga'))

    def synth_config(self):
        return replace(self.synth, rng_seed=self.stage_seed('synth'))

    def with_seed(self, seed):
        return replace(self, seed=seed)


def _table(document, section):
    table = document.get(section, {})
    if not isinstance(table, dict):
        raise ConfigError(f"[{section}] must be a table")
    return table


def config_from_document(document, base_dir="."):
    """
    Build the run configuration from a parsed TOML document.

    Parameters
    ----------
    document : dict
        Parsed TOML document.
    base_dir : str, optional
        Directory against which relative paths are resolved.

    Returns
    -------
    config : RunConfig
        The run configuration.
    """
    unknown = sorted(set(document) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"Unknown section(s): {', '.join(unknown)}")

    run = dict(_table(document, 'run'))
    seed = run.pop('seed', DEFAULT_SEED)
    verbosity = run.pop('verbosity', 'info')
    if run:
        raise ConfigError(f"Unknown key(s) in [run]: {', '.join(sorted(run))}")
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"run.seed must be a non-negative integer, got {seed!r}")
    if verbosity not in VERBOSITY_LEVELS:
        raise ConfigError(f"run.verbosity must be one of {', '.join(VERBOSITY_LEVELS)}, got {verbosity!r}")

    paths = _table(document, 'paths')
    unknown = sorted(set(paths) - set(PATH_KEYS))
    if unknown:
        raise ConfigError(f"Unknown key(s) in [paths]: {', '.join(unknown)}")
    paths = {key: os.path.normpath(os.path.join(base_dir, value)) for key, value in paths.items()}

    return RunConfig(
        seed=seed,
        verbosity=verbosity,
        paths=paths,
        features=FeatureConfig.from_mapping(_table(document, 'features')),
        confidence=ConfidenceConfig.from_mapping(_table(document, 'confidence')),
        ga=GaConfig.from_mapping(_table(document, 'ga')),
        zones=ZoneLearningConfig.from_mapping(_table(document, 'zones')),
        triplets=TripletConfig.from_mapping(_table(document, 'triplets')),
        repair=RepairConfig.from_mapping(_table(document, 'repair')),
        synth=SynthConfig.from_mapping(_table(document, 'synth')),
        explicit_seeds=frozenset(section for section in SEEDED_SECTIONS
                                 if 'rng_seed' in _table(document, section)),
    )


def load_config(filename):
    """
    Load the run configuration from a TOML file.

    Parameters
    ----------
    filename : str
        Name of the configuration file.

    Returns
    -------
    config : RunConfig
        The run configuration; relative paths are resolved against the file's directory.
    """
    try:
        with open(filename, 'rb') as fp:
            document = tomllib.load(fp)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Malformed configuration: {e}", source=filename) from None

    try:
        return config_from_document(document, os.path.dirname(os.path.abspath(filename)))
    except ConfigError as e:
        raise e.with_source(filename)

"""Configuration handling for matching experiments."""

import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

from matching_advice.generators import GENERATORS

logger = logging.getLogger(__name__)

# Load environment variables from .env file if it exists
load_dotenv()

ALGORITHMS = (
    "ranking",
    "greedy",
    "kvv",
    "randomized_category",
    "advice_category",
    "eps_advice",
)
ARRIVAL_POLICIES = ("given", "identity", "random")


def _env_int(name: str) -> Optional[int]:
    value = os.environ.get(name)
    if value is None or value == "":
        return None
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"Environment variable {name} must be an integer, got {value!r}")


@dataclass
class ExperimentConfig:
    """One experiment: an algorithm, an instance source, and how many seeded trials to run."""

    algorithm: str
    instance_file: Optional[str] = None
    generator: Optional[str] = None
    generator_params: Dict[str, Any] = field(default_factory=dict)
    instance_per_trial: bool = False
    k: int = 1
    epsilon: float = 0.2
    trials: int = 1
    seed: int = 0
    arrival: str = "identity"
    arrival_order: Optional[str] = None
    sigma: Optional[str] = None
    perfect_only: bool = False
    workers: int = 1

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """Create configuration from dictionary.

        Seed, trials and workers fall back to MATCHING_ADVICE_SEED,
        MATCHING_ADVICE_TRIALS and MATCHING_ADVICE_WORKERS.

        Raises:
            ValueError: If a value is missing, unknown or out of range
        """
        if not data.get("algorithm"):
            raise ValueError("Experiment configuration must name an algorithm")
        algorithm = str(data["algorithm"])
        if algorithm not in ALGORITHMS:
            raise ValueError(f"Unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")

        instance_file = data.get("instance_file")
        generator = data.get("generator")
        if bool(instance_file) == bool(generator):
            raise ValueError("Specify exactly one of instance_file and generator")
        if generator and generator not in GENERATORS:
            raise ValueError(f"Unknown generator {generator!r}; choose from {', '.join(sorted(GENERATORS))}")

        def pick(key: str, env: str, default: int) -> int:
            if data.get(key) is not None:
                return int(data[key])
            from_env = _env_int(env)
            return default if from_env is None else from_env

        trials = pick("trials", "MATCHING_ADVICE_TRIALS", 1)
        workers = pick("workers", "MATCHING_ADVICE_WORKERS", 1)
        if trials < 1:
            raise ValueError(f"trials must be at least 1, got {trials}")
        if workers < 1:
            raise ValueError(f"workers must be at least 1, got {workers}")

        arrival = str(data.get("arrival", "given" if data.get("arrival_order") else "identity"))
        if arrival not in ARRIVAL_POLICIES:
            raise ValueError(f"arrival must be one of {', '.join(ARRIVAL_POLICIES)}, got {arrival!r}")
        if arrival == "given" and not data.get("arrival_order"):
            raise ValueError("arrival 'given' requires arrival_order")

        epsilon = float(data.get("epsilon", 0.2))
        if not 0 < epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
        k = int(data.get("k", 1))
        if k < 1:
            raise ValueError(f"k must be at least 1, got {k}")

        params = data.get("generator_params") or {}
        if not isinstance(params, dict):
            raise ValueError("generator_params must be a mapping")

        return cls(
            algorithm=algorithm,
            instance_file=instance_file,
            generator=generator,
            generator_params=dict(params),
            instance_per_trial=bool(data.get("instance_per_trial", False)),
            k=k,
            epsilon=epsilon,
            trials=trials,
            seed=pick("seed", "MATCHING_ADVICE_SEED", 0),
            arrival=arrival,
            arrival_order=data.get("arrival_order"),
            sigma=data.get("sigma"),
            perfect_only=bool(data.get("perfect_only", False)),
            workers=workers,
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def load_config(
    config_path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None
) -> ExperimentConfig:
    """Load an experiment configuration from a YAML file.

    Args:
        config_path: Path to configuration file; default locations are tried when omitted
        overrides: Values that win over the file (command-line flags)

    Returns:
        Experiment configuration

    Raises:
        FileNotFoundError: If an explicit configuration file is not found
        ValueError: If configuration is invalid
    """
    default_locations = [
        Path("experiment.yaml"),
        Path("experiment.yml"),
        Path("~/.config/matching-advice/experiment.yaml"),
    ]

    config_data: Dict[str, Any] = {}
    if config_path:
        with open(config_path, "r") as f:
            config_data = yaml.safe_load(f) or {}
        logger.info(f"Loaded configuration from {config_path}")
    else:
        for path in default_locations:
            expanded_path = path.expanduser()
            if expanded_path.exists():
                with open(expanded_path, "r") as f:
                    config_data = yaml.safe_load(f) or {}
                logger.info(f"Loaded configuration from {expanded_path}")
                break

    if not isinstance(config_data, dict):
        raise ValueError("Configuration file must contain a mapping of keys to values")
    for key, value in (overrides or {}).items():
        if value is not None:
            config_data[key] = value
    if not config_data:
        raise ValueError("No configuration file found and no settings given")
    return ExperimentConfig.from_dict(config_data)

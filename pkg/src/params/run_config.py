"""
Run configuration loader.
Reads the YAML config file (see config.example.yaml for the schema)
into a RunConfig holding system parameters plus simulation, audit,
logging and output settings.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import yaml

from params.system_params import (
    ParameterError,
    SystemParams,
    ValidatedParams,
    validate,
)


SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """The config file is unreadable or does not follow the schema."""


@dataclass(frozen=True)
class ScriptedUpdate:
    """A writer pinned by the config: which submodel and which true subpackets."""
    round: int
    theta: int
    subpackets: Tuple[int, ...]


@dataclass(frozen=True)
class AuditSettings:
    trials: int = 10000
    significance: float = 0.01
    exhaustive: str = 'auto'


@dataclass
class RunConfig:
    """Everything a CLI command needs, parsed from one YAML file."""
    system: Dict
    rounds: int = 3
    writers_per_round: int = 1
    readers_per_round: Optional[int] = None
    scripted_updates: List[ScriptedUpdate] = field(default_factory=list)
    permutation: Optional[Tuple[int, ...]] = None
    audit: AuditSettings = field(default_factory=AuditSettings)
    logging: Dict = field(default_factory=dict)
    out_dir: str = 'output'
    source_path: Optional[str] = None

    def system_params(self) -> SystemParams:
        """Build SystemParams; constants are generated when absent."""
        s = self.system
        missing = [k for k in ('N', 'M', 'P', 'ell', 'q') if k not in s]
        if missing:
            raise ParameterError([f"system.{k} is required" for k in missing])
        return SystemParams.create(
            N=s['N'], M=s['M'], P=s['P'], ell=s['ell'], q=s['q'],
            r=s.get('r', 0),
            seed=s.get('seed', 0),
            L=s.get('L'),
            f=s.get('f'),
            alpha=s.get('alpha'),
            r_prime_cap=s.get('r_prime_cap'),
        )

    def validated(self) -> ValidatedParams:
        """Delegates every structural check to params.validate, then checks the pinned permutation."""
        params = validate(self.system_params())
        if self.permutation and sorted(self.permutation) != list(range(1, params.P + 1)):
            raise ParameterError([f"permutation must reorder 1..{params.P}, got {list(self.permutation)}"])
        return params

    def scripted_for_round(self, round_index: int) -> List[ScriptedUpdate]:
        return [u for u in self.scripted_updates if u.round == round_index]


def _load_yaml(config_path: str) -> dict:
    try:
        with open(config_path, 'r') as f:
            data = yaml.safe_load(f)
    except FileNotFoundError:
        raise ConfigError(f"Config file {config_path} not found")
    except yaml.YAMLError as e:
        raise ConfigError(f"Error parsing config file: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {config_path} must contain a mapping")
    return data


def parse_run_config(data: dict, seed_override: Optional[int] = None,
                     source_path: Optional[str] = None) -> RunConfig:
    version = data.get('schema_version')
    if version is None:
        raise ConfigError("schema_version is required")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"Unsupported schema_version {version} (expected {SCHEMA_VERSION})")

    system = dict(data.get('system') or {})
    if seed_override is not None:
        system['seed'] = seed_override

    sim = data.get('simulation') or {}
    scripted = []
    for entry in sim.get('scripted_updates') or []:
        try:
            scripted.append(ScriptedUpdate(
                round=int(entry['round']),
                theta=int(entry['theta']),
                subpackets=tuple(int(s) for s in entry['subpackets']),
            ))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Malformed scripted update {entry!r}: {e}")

    permutation = system.pop('permutation', None)
    audit_cfg = data.get('audit') or {}
    exhaustive = audit_cfg.get('exhaustive', 'auto')
    if isinstance(exhaustive, bool):
        exhaustive = 'true' if exhaustive else 'false'

    try:
        readers = sim.get('readers_per_round')
        return RunConfig(
            system=system,
            rounds=int(sim.get('rounds', 3)),
            writers_per_round=int(sim.get('writers_per_round', 1)),
            readers_per_round=int(readers) if readers is not None else None,
            scripted_updates=scripted,
            permutation=tuple(int(p) for p in permutation) if permutation else None,
            audit=AuditSettings(
                trials=int(audit_cfg.get('trials', 10000)),
                significance=float(audit_cfg.get('significance', 0.01)),
                exhaustive=str(exhaustive),
            ),
            logging=data.get('logging') or {},
            out_dir=(data.get('output') or {}).get('out_dir', 'output'),
            source_path=source_path,
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Malformed simulation, audit or permutation setting: {e}")


def load_run_config(config_path: str, seed_override: Optional[int] = None) -> RunConfig:
    """
    Load and schema-check a YAML run config.

    Raises:
        ConfigError: unreadable file, missing/unknown schema_version, malformed entries
    """
    return parse_run_config(_load_yaml(config_path), seed_override, config_path)

"""
Shared fixtures: puts src/ and the repo root on sys.path the way the CLI
does, and registers hypothesis profiles.
"""

import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / 'src'))
sys.path.insert(0, str(ROOT))

from params.system_params import SystemParams, validate  # noqa: E402

settings.register_profile('default', max_examples=50, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile('ci', max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile('default')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: acceptance grid and full-size audits')


def make_params(N=6, M=2, P=5, ell=1, q=2053, r='2/5', seed=1, **kwargs):
    return validate(SystemParams.create(N=N, M=M, P=P, ell=ell, q=q, r=r, seed=seed, **kwargs))


@pytest.fixture
def small_params():
    """N=6, M=2, P=5, ell=1 over F_2053."""
    return make_params()


@pytest.fixture
def golden_params():
    """P=5 over F_7 with two writes per user."""
    return make_params(q=7, seed=5)


@pytest.fixture
def quiet_logging():
    return {'level': 'WARNING', 'log_file': ''}


def write_config(path: Path, system: dict, simulation: dict = None, audit: dict = None,
                 out_dir: str = 'out') -> Path:
    """Write a schema-1 YAML config under path and return it."""
    import yaml
    data = {
        'schema_version': 1,
        'system': system,
        'simulation': simulation or {'rounds': 2, 'writers_per_round': 1},
        'audit': audit or {},
        'logging': {'level': 'WARNING', 'log_file': ''},
        'output': {'out_dir': str(path.parent / out_dir)},
    }
    path.write_text(yaml.safe_dump(data, sort_keys=False), encoding='utf-8')
    return path

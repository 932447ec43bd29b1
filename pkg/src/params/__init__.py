"""
System parameterization, validation and run configuration.
"""

from .system_params import ParameterError, SystemParams, ValidatedParams, validate

__all__ = ['ParameterError', 'SystemParams', 'ValidatedParams', 'validate']

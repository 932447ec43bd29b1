"""
Utility modules for the PRUW simulator.
"""

from .logger import SimulatorLogger, get_logger

__all__ = ['SimulatorLogger', 'get_logger']

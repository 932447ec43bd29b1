"""
One-shot trusted setup: permutation, reversing matrices, initial storage.
"""

from .setup_coordinator import Permutation, SetupCoordinator, SetupResult

__all__ = ['Permutation', 'SetupCoordinator', 'SetupResult']

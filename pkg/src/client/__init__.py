"""
User-side query construction, decoding and sparse update encoding.
"""

from .client_session import ClientSession, CauchyVandermondeDecoder
from .update_encoder import SparseUpdate, emit_write_pairs, sparsify

__all__ = ['ClientSession', 'CauchyVandermondeDecoder', 'SparseUpdate', 'emit_write_pairs', 'sparsify']

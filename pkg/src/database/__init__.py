"""
Database servers: noisy storage, private reads and sparse writes.
"""

from .database_server import DatabaseServer, DatabaseState, ProtocolError, ReadQuery, WritePair

__all__ = ['DatabaseServer', 'DatabaseState', 'ProtocolError', 'ReadQuery', 'WritePair']

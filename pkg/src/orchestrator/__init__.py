"""
Round orchestration, transcript, cost ledger and plaintext oracle.
"""

from .cost_ledger import CostLedger, MeasuredCosts, Transcript, TranscriptRecord
from .plaintext_oracle import PlaintextOracle
from .round_orchestrator import PRUWOrchestrator, RoundAbortedError, RoundPlan, RoundReport

__all__ = [
    'CostLedger', 'MeasuredCosts', 'Transcript', 'TranscriptRecord', 'PlaintextOracle',
    'PRUWOrchestrator', 'RoundAbortedError', 'RoundPlan', 'RoundReport',
]

"""
Report files: transcript, cost/verification/audit tables and markdown summaries.
"""

from .report_writer import ReportWriter

__all__ = ['ReportWriter']

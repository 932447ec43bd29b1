"""
Privacy audits over single-database views.
"""

from .database_view import DatabaseView, assert_secret_free, collect_view
from .privacy_auditor import AuditReport, AuditTarget, AuditTest, PrivacyAuditor

__all__ = [
    'DatabaseView', 'assert_secret_free', 'collect_view',
    'AuditReport', 'AuditTarget', 'AuditTest', 'PrivacyAuditor',
]

"""Failure types shared across modules.

A :class:`TheoremFalsified` means an exact computation contradicts one of the proved
bounds (N <= 2^n, m <= 2^n for acute-free sets); a :class:`PropertyViolation` means a
structural property that must hold for boxes failed.  Both carry enough data to
reproduce the failure.
"""
from __future__ import annotations


class PropertyViolation(AssertionError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class TheoremFalsified(AssertionError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness

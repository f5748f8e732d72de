"""
Effective-operator toolkit for decaying quantum systems: Lindblad evolution,
neutral-kaon and trapped-ion models, and Bell-inequality violation analysis.
"""

__version__ = "1.0.0"

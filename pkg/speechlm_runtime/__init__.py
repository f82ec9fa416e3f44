"""
Streaming conversation runtime and evaluation toolkit for interleaved
audio-text token models.
"""

__version__ = "0.1.0"

"""Numerical experiments on zeros of zeta and zeta' near the critical line."""

from __future__ import annotations

__version__ = "0.1.0"

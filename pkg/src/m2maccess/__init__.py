"""Transmit-power versus arrival-rate tradeoffs for massive machine-type uplink access."""

from .linkmodel import DeviceDrop, LinkEnv, ResourceSlice

__version__ = "0.1.0"
__all__ = ["DeviceDrop", "LinkEnv", "ResourceSlice"]

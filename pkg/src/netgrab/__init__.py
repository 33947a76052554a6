"""netgrab: extract weighted graphs from images of network-like structures."""

__version__ = "0.1.0"

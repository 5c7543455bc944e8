"""wavelab — gravity-capillary water waves with constant vorticity in holomorphic coordinates."""

__version__ = "0.1.0"

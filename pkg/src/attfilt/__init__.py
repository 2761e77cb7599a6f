"""Geometric attitude and angular-velocity estimation on SO(3) from
multi-rate gyro and direction measurements."""

__version__ = "0.1.0"

"""Geodesic flow of the BGPP hyperkahler metric and its Eguchi-Hanson limit."""

__version__ = "0.1.0"

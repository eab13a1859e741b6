"""Fuzzy CPE assignment and CVE scanning for software inventories."""

__version__ = "0.1.0"

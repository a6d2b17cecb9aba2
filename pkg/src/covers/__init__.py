"""Covers (uniform interpolants) for EUF, LRA and their combination."""

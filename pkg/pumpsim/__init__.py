"""Disordered Thouless pumping of one and two bosons on a Rice-Mele chain."""

__version__ = "1.0.0"

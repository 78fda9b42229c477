"""Closed-form GN/EGN QoT workbench: NLI models, a GN quadrature oracle, link and network studies."""

__version__ = "0.1.0"

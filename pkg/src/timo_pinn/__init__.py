"""Physics-informed network solver and energy diagnostics for the
thermoelastic Timoshenko beam with second sound."""

__version__ = "0.1.0"

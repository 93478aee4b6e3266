class ConfigError(ValueError):
    """Invalid scenario, terrain file or source placement."""


class NumericalAbort(RuntimeError):
    """The integrator hit a stability guard (timestep floor, CFL, non-finite flux)."""

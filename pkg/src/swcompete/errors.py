"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration value is missing or outside its domain.

    ``key`` names the offending setting so the CLI can report it.
    """

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class DomainError(ValueError):
    """An operation was applied outside its domain (empty graph, unknown node, ...)."""

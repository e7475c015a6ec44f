"""Shared exception types for the library and the CLI exit-code contract."""


class ShadowlabError(Exception):
    """Base class for library-specific failures."""


class CapacityError(ShadowlabError):
    """A combinatorial budget (ball size, enumeration count, node visits) was exceeded.

    Raised instead of silently grinding; the CLI maps this to exit code 3.
    """


class GenerationError(ShadowlabError):
    """A seeded random construction could not satisfy its constraints."""


class ConfigError(ShadowlabError):
    """Bad experiment configuration (schema violation, missing file, bad value).

    The CLI maps this to exit code 2.
    """

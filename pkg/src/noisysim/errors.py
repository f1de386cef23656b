class ParameterError(ValueError):
    """Out-of-range parameter (eta, n, delta, round index...)."""


class EncodingError(ValueError):
    pass


class DecodeError(ValueError):
    pass


class ConfigurationError(RuntimeError):
    pass


class CompileError(ValueError):
    """Raised when a protocol automaton is malformed."""


class ConfigParseError(ValueError):
    pass

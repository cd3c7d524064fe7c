"""Exception types shared across the simulator."""


class SimError(Exception):
    """Error with a stable machine-readable ``code`` token.

    The codes are part of the public contract (tests and callers match on
    them); the free-form detail is not.
    """

    def __init__(self, code: str, detail: str = ""):
        self.code = code
        self.detail = detail
        super().__init__(f"{code}: {detail}" if detail else code)


class UnsupportedOnBackend(SimError):
    """An expression node or operation the target backend cannot represent."""

    def __init__(self, backend: str, node, detail: str = ""):
        self.backend = backend
        self.node = node
        msg = f"{type(node).__name__ if not isinstance(node, str) else node} on backend {backend!r}"
        if detail:
            msg += f" ({detail})"
        super().__init__("unsupported-on-backend", msg)


class ConfigError(SimError):
    """Scenario configuration failed schema validation."""

    def __init__(self, detail: str, where: str = ""):
        self.where = where
        super().__init__("config-error", f"{where}: {detail}" if where else detail)

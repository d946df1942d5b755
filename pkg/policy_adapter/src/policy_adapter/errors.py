"""Error types raised by the adapter."""


class AdapterError(Exception):
    """Base class for adapter failures."""


class PatchFormatError(AdapterError):
    """Patch text is not a well-formed edit list."""


class BindingError(AdapterError):
    """A binding rule cannot be applied to the native assets."""


class UnboundPathError(BindingError):
    """Patch paths with no usable binding.

    ``unbound`` paths have no rule at all; ``unsupported`` paths are
    explicitly marked as not representable in the native format.
    """

    def __init__(self, unbound=(), unsupported=()):
        self.unbound = tuple(unbound)
        self.unsupported = tuple(unsupported)
        parts = []
        if self.unbound:
            parts.append("no binding for: " + ", ".join(self.unbound))
        if self.unsupported:
            parts.append("marked unsupported: " + ", ".join(self.unsupported))
        super().__init__("; ".join(parts) or "no unbindable paths")


class WireError(AdapterError):
    """Malformed or out-of-vocabulary protocol message."""

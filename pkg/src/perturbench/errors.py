"""Exception types shared across the package."""

from __future__ import annotations


class PerturbenchError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PerturbenchError):
    """A scene or task violates a structural invariant.

    Carries the individual violations so callers can report all of them
    instead of only the first one found.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ParameterRangeError(PerturbenchError):
    """A perturbation parameter lies outside its documented range."""


class DegenerateGeometryError(PerturbenchError):
    """A geometric operation would produce an ill-defined configuration."""


class IncompatibleScenesError(PerturbenchError):
    """Two scenes cannot be diffed because they describe different scenes."""


class StalePatchError(PerturbenchError):
    """A patch's base fingerprint does not match the scene it is applied to."""


class PatchPathError(PerturbenchError):
    """A patch edit names a path that does not exist in the target scene."""


class RegistryError(PerturbenchError):
    """A registry manifest is malformed or fails its completeness check."""


class PackingError(PerturbenchError):
    """No collision-free placement could be found for a new object."""


class ConstraintError(PerturbenchError):
    """A pose jitter could not satisfy the semantic-relation constraints."""


class LexiconCoverageError(PerturbenchError):
    """An instruction contains no phrase covered by the rewrite lexicon."""


class MissingObjectError(PerturbenchError):
    """An operation references an object id absent from the scene."""


class RewriterServiceError(PerturbenchError):
    """The external rewriting service failed or returned a malformed reply."""


class ProtocolError(PerturbenchError):
    """A wire-protocol peer sent a malformed or unexpected message."""


class TransportError(PerturbenchError):
    """The wire-protocol transport failed (closed pipe, timeout, bad frame)."""


class DegenerateTableError(PerturbenchError):
    """A contingency table has an empty margin, so the test is undefined."""


class CoverageError(PerturbenchError):
    """Evaluation records do not cover every (entry, model) pair.

    ``missing`` lists the uncovered (entry_id, model_id) pairs.
    """

    def __init__(self, missing: list[tuple[str, str]]):
        self.missing = list(missing)
        preview = ", ".join(f"{e}/{m}" for e, m in self.missing[:5])
        more = "" if len(self.missing) <= 5 else f" (+{len(self.missing) - 5} more)"
        super().__init__(f"missing evaluations: {preview}{more}")


class MissingBaselineError(PerturbenchError):
    """Aggregation requires unperturbed records but none were provided."""

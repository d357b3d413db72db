"""Exception types shared across the library.

Every solver failure carries a short ``stage`` tag so that the CLI can report
where a pipeline broke without a traceback.
"""


class AnnuliError(Exception):
    """Base class; ``stage`` names the failing sub-step."""

    stage = "general"

    def __init__(self, message, stage=None, **details):
        super().__init__(message)
        if stage is not None:
            self.stage = stage
        self.details = details

    def __str__(self):
        base = super().__str__()
        if self.details:
            extra = ", ".join(f"{k}={v}" for k, v in sorted(self.details.items()))
            return f"[{self.stage}] {base} ({extra})"
        return f"[{self.stage}] {base}"


class ResolutionError(AnnuliError):
    stage = "resolution"


class GeometryError(AnnuliError):
    stage = "geometry"


class WeldingError(AnnuliError):
    stage = "weld"


class CompositionError(AnnuliError):
    stage = "compose"


class FlowError(AnnuliError):
    stage = "flow"


class PathError(AnnuliError):
    stage = "path"


class UnderResolvedWarning(UserWarning):
    """A series carries too much mass in its highest modes."""

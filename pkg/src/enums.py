"""Core enumerations for the TEMSP package."""

from enum import Enum, auto


class InitialDataKind(Enum):
    """Families of initial segments on [-tau, 0]."""

    CONSTANT = "constant-vector"
    AFFINE = "affine-in-theta"
    BROWNIAN = "brownian-path"
    GRID_SAMPLES = "grid-samples"

    def __str__(self) -> str:
        """Return a readable string representation."""
        return self.value


class StreamLabel(Enum):
    """Labels separating the random substreams of one trajectory."""

    SCHEME_NOISE = 0
    INITIAL_DATA = 1

    def __str__(self) -> str:
        """Return a readable string representation."""
        return self.name.lower().replace("_", "-")


class FunctionalKind(Enum):
    """Kinds of test functionals on segment space."""

    COS_NORM = "cos-norm"
    CLIP_NORM = "clip-norm"
    COORDINATE_EVAL = "coordinate-eval"
    CUSTOM = "custom"

    def __str__(self) -> str:
        """Return a readable string representation."""
        return self.value


class DistanceMethod(Enum):
    """Solvers for the truncated Wasserstein distance."""

    EXACT = "exact-assignment"
    ENTROPIC = "entropic"

    def __str__(self) -> str:
        """Return a readable string representation."""
        return self.value


class StorageMode(Enum):
    """How much of each trajectory the engine keeps."""

    FULL = auto()
    STREAMING = auto()

    def __str__(self) -> str:
        """Return a readable string representation."""
        return self.name.lower()


def parse_enum(enum_cls, text: str):
    """Look up an enum member by value or by name, case-insensitively.

    Args:
        enum_cls: Enum class to search
        text: Value or name as written in a config file or on the command line

    Returns:
        Matching enum member

    Raises:
        ValueError: If nothing matches
    """
    wanted = text.strip().lower()
    for member in enum_cls:
        if str(member.value).lower() == wanted or member.name.lower() == wanted:
            return member
        if member.name.lower().replace("_", "-") == wanted:
            return member
    choices = ", ".join(str(member) for member in enum_cls)
    raise ValueError(f"Unknown {enum_cls.__name__} '{text}' (expected one of: {choices})")

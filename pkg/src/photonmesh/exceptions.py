"""Exception hierarchy for mesh compilation and verification."""


class PhotonMeshError(Exception):
    """Base class for all errors raised by this package."""


class LayoutError(PhotonMeshError, ValueError):
    """Invalid mesh layout parameters or out-of-range mesh coordinates."""


class SettingsError(PhotonMeshError, ValueError):
    """Settings do not match the mesh they are applied to."""


class SerializationError(PhotonMeshError, ValueError):
    """Malformed interchange document."""


class DefectError(PhotonMeshError, ValueError):
    """Defect specification references an unknown location."""


class NonUnitaryError(PhotonMeshError, ValueError):
    """Matrix expected to be unitary is not, within tolerance."""


class PlanError(PhotonMeshError, ValueError):
    """Routing plans are inconsistent or cannot be merged."""


class UnsalvageableError(PlanError):
    """Too many ports must be discarded; no usable mesh remains."""


class EmbedError(PhotonMeshError, ValueError):
    """Embedding a target onto the surviving mesh failed."""


class EmbedStructureError(EmbedError):
    """Surviving tunable crossings do not form the expected template."""

"""Exception types shared across the pipeline."""


class CcflocError(Exception):
    """Base class for every error this package raises deliberately."""


# --- tensor container / manifest ingestion ---

class BadMagic(CcflocError):
    """File does not start with the expected magic bytes or has a corrupt header."""


class UnsupportedVersion(CcflocError):
    """Tensor file declares a version or dtype code this reader does not handle."""


class DimMismatch(CcflocError):
    """Declared extents disagree with the data they describe."""


class NonFiniteValue(CcflocError):
    """A tensor holds NaN or infinity."""


class ParseError(CcflocError):
    """Manifest document is malformed."""


class DuplicateImageId(CcflocError):
    pass


class MissingFile(CcflocError):
    pass


class BoxOutOfBounds(CcflocError):
    """A bounding box is degenerate or extends past the image."""


# --- feature selection ---

class KernelCountMismatch(CcflocError):
    """Feature stacks in one image set disagree on the kernel count."""


class LengthMismatch(CcflocError):
    pass


class TooFewKernels(CcflocError):
    """Fewer kernels than requested clusters."""


class RankOutOfRange(CcflocError):
    pass


# --- superpixels ---

class ImageTooSmall(CcflocError):
    """Image has fewer pixels than the requested superpixel count."""


# --- superpixel graph ---

class BoundaryOutOfRange(CcflocError):
    """Boundary probabilities must lie in [0, 1]."""


# --- propagation ---

class NonPositiveMu(CcflocError):
    """Diffusion scale must be > 0."""


# --- evaluation ---

class UnknownImageId(CcflocError):
    pass


class MissingResult(CcflocError):
    pass

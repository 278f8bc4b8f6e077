"""Exception types shared across the pipeline."""


class GaitPipeError(Exception):
    """Base class for all errors raised by this package."""


# --- pose ingestion ---

class MalformedJsonError(GaitPipeError):
    """Input bytes are not the expected keypoint JSON."""


class BadKeypointArityError(GaitPipeError):
    """A person entry does not carry exactly 18 (x, y, c) triples."""


class BadConfidenceError(GaitPipeError):
    """A confidence value lies outside [0, 1] beyond clamping tolerance."""


class EmptyDirectoryError(GaitPipeError):
    """No keypoint files found in the input directory."""


# --- track cleaning ---

class NoInitFrameError(GaitPipeError):
    """No frame with two resolvable entries; views cannot be separated."""


# --- preprocessing ---

class NoScaleError(GaitPipeError):
    """Hip-neck distance undefined on every frame of the track."""


class TooShortError(GaitPipeError):
    """Signal segment shorter than the configured minimum length."""


# --- spectral features ---

class BadEdgesError(GaitPipeError):
    """Band edges are not strictly ascending within [0, Nyquist]."""


# --- models ---

class SingularSystemError(GaitPipeError):
    """Unregularized least squares on a rank-deficient design."""


class DivergedLossError(GaitPipeError):
    """Training loss became non-finite."""


class SingleClassError(GaitPipeError):
    """Classification requested on single-class targets."""


class BadLevelError(GaitPipeError):
    """Motor-function level outside 1..5."""


# --- synthetic generation ---

class NyquistViolationError(GaitPipeError):
    """Requested gait harmonics exceed what the frame rate can represent."""


# --- evaluation ---

class LengthMismatchError(GaitPipeError):
    """Paired arrays differ in length."""


class TooFewSamplesError(GaitPipeError):
    """Not enough samples for the requested split."""


# --- persistence ---

class BadHeaderError(GaitPipeError):
    """Artifact header missing or inconsistent."""


class BadArityError(GaitPipeError):
    """Row has the wrong number of columns."""


class NonFiniteValueError(GaitPipeError):
    """Attempt to persist a NaN or infinite value."""


class UnknownKindError(GaitPipeError):
    """Artifact declares a model kind this reader does not know."""


class VersionMismatchError(GaitPipeError):
    """Artifact written by an incompatible format version, or truncated."""

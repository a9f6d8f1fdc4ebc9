"""Exception types raised across the pipeline."""


class FacePartsError(Exception):
    """Base class for all pipeline errors."""


class NonPositiveFactor(FacePartsError):
    """Scale factor is non-positive or outside the allowed range."""


class EmptyRegion(FacePartsError):
    """A crop box clamped to the image has zero area."""


class BadDimensions(FacePartsError):
    """Image dimensions violate an operation's requirements."""


class DegenerateLandmarks(FacePartsError):
    """Landmark geometry leaves the alignment angle undefined."""


class DimensionMismatch(FacePartsError):
    """Texture and depth images have different shapes."""


class ExtremeScale(FacePartsError):
    """Required alignment scale factor is outside (0.1, 10)."""


class ShapeMismatch(FacePartsError):
    """Tensor or vector shapes are incompatible."""


class SingleClass(FacePartsError):
    """SVM training set contains fewer than two classes."""


class DegenerateData(FacePartsError):
    """PCA input has zero total variance."""


class EmptySet(FacePartsError):
    """Training or validation set is empty."""


class DivergedLoss(FacePartsError):
    """Training loss became non-finite."""


class TooFewSubjects(FacePartsError):
    """Not enough distinct subjects for the requested split."""


class BadFoldCount(FacePartsError):
    """Fold count exceeds the number of subjects."""


class LengthMismatch(FacePartsError):
    """Paired label lists have different lengths."""


class MissingStageOutput(FacePartsError):
    """A required output of a previous pipeline stage does not exist."""

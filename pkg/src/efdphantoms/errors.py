"""Exception and warning types.

Every error carries a module-qualified ``code`` (``"<module>.<Name>"``) that
the CLI surfaces in run manifests and on stderr.
"""


class PhantomError(Exception):
    module = "efdphantoms"

    @property
    def code(self):
        return f"{self.module}.{type(self).__name__}"


class GeometryError(PhantomError, ValueError):
    module = "mask_geometry"


class NoForeground(GeometryError):
    pass


class MultipleComponents(GeometryError):
    pass


class HasHoles(GeometryError):
    pass


class DegenerateContour(GeometryError):
    pass


class OutOfCanvas(GeometryError):
    pass


class CodecError(PhantomError, ValueError):
    module = "efd_codec"


class NyquistViolation(CodecError):
    pass


class NonUniformSampling(CodecError):
    pass


class EmptyDataset(PhantomError, ValueError):
    pass


class StatsMismatch(CodecError):
    pass


class FrameError(PhantomError, ValueError):
    """Per-frame failure inside a video, wrapping the original error."""

    def __init__(self, index, cause):
        super().__init__(f"frame {index}: {cause}")
        self.index = index
        self.cause = cause

    @property
    def code(self):
        return getattr(self.cause, "code", "efdphantoms.FrameError")


class DatasetError(PhantomError, ValueError):
    module = "dataset_pipeline"


class MalformedManifest(DatasetError):
    pass


class InconsistentDimensions(DatasetError):
    pass


class SingleLineage(DatasetError):
    pass


class DiffusionError(PhantomError, ValueError):
    module = "ts_diffusion"


class ShapeMismatch(DiffusionError):
    pass


class NonFiniteLoss(DiffusionError, ArithmeticError):
    pass


class InvalidConfig(DiffusionError):
    pass


class CheckpointError(DiffusionError):
    pass


class MetricsError(PhantomError, ValueError):
    module = "morph_metrics"


class EmptyCurve(MetricsError):
    pass


class DegenerateContourWarning(UserWarning):
    pass


class SelfIntersectionWarning(UserWarning):
    pass

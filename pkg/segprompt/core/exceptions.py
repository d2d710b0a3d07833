import typing as t


class BaseSegPromptException(Exception):
    default_message: str = 'Something went wrong'
    kind: str = 'error'
    exit_code: int = 1

    def __init__(self, message: t.Optional[str] = None, path: t.Optional[str] = None) -> None:
        """Base exception class for all SegPrompt exceptions

        Args:
            message (str, optional): Message to replace default exception message. Defaults to None.
            path (str, optional): File the error relates to, reported by the CLI. Defaults to None.
        """
        self.message = message if message else self.default_message
        self.path = str(path) if path is not None else None
        super().__init__(self.message)

    @property
    def details(self) -> t.Dict[str, t.Optional[str]]:
        return {
            "kind": self.kind,
            "message": self.message,
            "path": self.path
        }


class PyVersionInvalid(BaseSegPromptException):
    default_message = "Python version is not equal or greater than 3.10"


class RasterError(BaseSegPromptException):
    default_message = "Raster data is not a valid 8-bit image"
    kind = 'raster'


class InvalidBoxError(BaseSegPromptException):
    default_message = "Bounding box is empty or outside the image"
    kind = 'box'
    exit_code = 2


class CoordinateError(BaseSegPromptException):
    default_message = "Point lies outside the region of interest"
    kind = 'coordinate'


class ShapeMismatchError(BaseSegPromptException):
    default_message = "Raster dimensions do not match"
    kind = 'shape'
    exit_code = 3


class DegenerateInputError(BaseSegPromptException):
    default_message = "Input is too degenerate for this operation"
    kind = 'degenerate'


class NoBackgroundError(DegenerateInputError):
    default_message = "Mask has no background pixel to measure distances to"


class EmptyMarkersError(DegenerateInputError):
    default_message = "No foreground marker could be extracted"


class ModelDegenerateError(BaseSegPromptException):
    default_message = "Mixture covariance is not positive definite after regularization"
    kind = 'model'


class EmptyInputError(BaseSegPromptException):
    default_message = "Nothing to aggregate"
    kind = 'empty'


class ConfigurationError(BaseSegPromptException):
    default_message = "Settings have been improperly configured"
    kind = 'config'
    exit_code = 2


class SpecError(BaseSegPromptException):
    default_message = "Scene specification cannot be satisfied"
    kind = 'spec'
    exit_code = 5


class ImageIOError(BaseSegPromptException):
    default_message = "Could not read or write the file"
    kind = 'io'
    exit_code = 2

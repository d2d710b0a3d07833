import functools
import json
import logging
import os
import sys
import tempfile
import typing as t
from pathlib import Path

import click
import numpy as np
from PIL import Image, UnidentifiedImageError

from segprompt.core.exceptions import BaseSegPromptException, ImageIOError
from segprompt.core.raster import BinaryMask, RasterImage

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = ('.png', '.pgm', '.ppm', '.pbm')
LOG_FORMAT = '%(levelname)s %(name)s: %(message)s'


def configure_logging(verbosity: int) -> None:
    """Without '-v' warnings reach stderr through the last-resort handler."""
    if verbosity < 1:
        return
    level = logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def handle_errors(command: t.Callable) -> t.Callable:
    """Report library errors as ``{kind, message, path}`` JSON on stderr and exit with their code."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except BaseSegPromptException as exc:
            logger.debug('Command failed', exc_info=True)
            click.echo(json.dumps(exc.details, sort_keys=True), err=True)
            click.get_current_context().exit(exc.exit_code)
    return wrapper


def _open(path: t.Union[str, Path]) -> Image.Image:
    try:
        with Image.open(path) as img:
            return img.copy()
    except FileNotFoundError:
        raise ImageIOError('File does not exist', path=path)
    except (UnidentifiedImageError, OSError) as exc:
        raise ImageIOError(f'Cannot decode image: {exc}', path=path)


def read_image(path: t.Union[str, Path]) -> RasterImage:
    """PNG, PGM or PPM file as an 8-bit RGB raster; gray inputs are replicated over the channels."""
    img = _open(path)
    return RasterImage(np.asarray(img.convert('RGB'), dtype=np.uint8))


def read_mask(path: t.Union[str, Path]) -> BinaryMask:
    """Any nonzero sample is foreground."""
    img = _open(path)
    return BinaryMask(np.asarray(img.convert('L')) > 0)


def _atomic(path: t.Union[str, Path], write: t.Callable[[t.IO[bytes]], None]) -> None:
    path = Path(path)
    try:
        handle, temp = tempfile.mkstemp(dir=path.parent, prefix=f'.{path.name}.', suffix='.tmp')
    except OSError as exc:
        raise ImageIOError(f'Cannot write to directory: {exc.strerror}', path=path.parent)
    try:
        with os.fdopen(handle, 'wb') as stream:
            write(stream)
        os.replace(temp, path)
    except OSError as exc:
        Path(temp).unlink(missing_ok=True)
        raise ImageIOError(f'Cannot write file: {exc.strerror}', path=path)


def _format_for(path: Path) -> str:
    extension = path.suffix.lower()
    formats = Image.registered_extensions()
    if extension not in IMAGE_SUFFIXES or extension not in formats:
        raise ImageIOError(f'Unsupported image extension {extension!r}', path=path)
    return formats[extension]


def write_mask(path: t.Union[str, Path], mask: BinaryMask) -> None:
    """Single-channel 8-bit file with 0 for background and 255 for foreground."""
    path = Path(path)
    img = Image.fromarray(np.where(mask.bits, 255, 0).astype(np.uint8))
    fmt = _format_for(path)
    _atomic(path, lambda stream: img.save(stream, format=fmt))


def write_image(path: t.Union[str, Path], image: RasterImage) -> None:
    path = Path(path)
    img = Image.fromarray(np.ascontiguousarray(image.data))
    fmt = _format_for(path)
    _atomic(path, lambda stream: img.save(stream, format=fmt))


def dump_json(data: t.Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + '\n'


def write_json(path: t.Union[str, Path], data: t.Any) -> None:
    text = dump_json(data).encode('utf-8')
    _atomic(path, lambda stream: stream.write(text))


def read_json(path: t.Union[str, Path], error: t.Type[BaseSegPromptException] = ImageIOError) -> t.Any:
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as exc:
        raise ImageIOError(f'Cannot read file: {exc.strerror}', path=path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise error(f'Invalid JSON: {exc.msg} at line {exc.lineno}', path=path)


def image_files(directory: t.Union[str, Path]) -> t.Dict[str, Path]:
    """Image files of ``directory`` by file name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ImageIOError('Not a directory', path=directory)
    return {entry.name: entry for entry in sorted(directory.iterdir())
            if entry.is_file() and entry.suffix.lower() in IMAGE_SUFFIXES}


def emit(data: t.Any, output: t.Optional[str]) -> None:
    """Write JSON to ``output`` or print it."""
    if output:
        write_json(output, data)
    else:
        click.echo(dump_json(data), nl=False)

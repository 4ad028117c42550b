"""Small file-writing helper shared by training and the CLI."""

import os
import tempfile


def write_atomic(path: str, text: str) -> None:
    """Write to a temp file in the target directory and rename into place,
    so failures never leave a partially written artifact.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

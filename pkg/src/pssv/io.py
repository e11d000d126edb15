"""Matrix file formats: headerless numeric CSV and grayscale PGM (P2/P5)."""

import os

import numpy as np

__all__ = [
    "MatrixFileError",
    "read_csv_matrix",
    "write_csv_matrix",
    "read_pgm",
    "write_pgm",
    "read_matrix",
    "write_matrix",
    "matrix_format",
]


class MatrixFileError(ValueError):
    """Malformed or unreadable matrix file."""


def matrix_format(path):
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".pgm", ".pnm"):
        return "pgm"
    return "csv"


def read_csv_matrix(path):
    """Read comma-separated numeric rows (no header) into a float matrix."""
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values = [float(tok) for tok in line.split(",")]
            except ValueError:
                raise MatrixFileError(f"{path}:{lineno}: non-numeric entry in {line!r}") from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise MatrixFileError(
                    f"{path}:{lineno}: expected {width} columns, found {len(values)}")
            rows.append(values)
    if not rows:
        raise MatrixFileError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def write_csv_matrix(path, X):
    """Write `X` as CSV with 17 significant digits (exact float64 round-trip)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    with open(path, "w") as fh:
        for row in X:
            fh.write(",".join(format(v, ".17g") for v in row))
            fh.write("\n")


def _pgm_tokens(data, count, pos):
    """Read `count` whitespace-separated header tokens, skipping # comments."""
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise MatrixFileError("truncated PGM header")
        tokens.append(data[start:pos])
    return tokens, pos


def read_pgm(path):
    """Read a P2 (ASCII) or P5 (binary) PGM into a float matrix of raw gray levels.

    Returns ``(matrix, maxval)``.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise MatrixFileError(f"{path}: not a P2/P5 PGM file")
    try:
        (w, h, maxval), pos = _pgm_tokens(data, 3, 2)
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise MatrixFileError(f"{path}: malformed PGM header") from None
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise MatrixFileError(f"{path}: invalid PGM dimensions or maxval")
    count = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        nbytes = count * np.dtype(dtype).itemsize
        raw = data[pos:pos + nbytes]
        if len(raw) < nbytes:
            raise MatrixFileError(f"{path}: truncated PGM raster")
        values = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    else:
        try:
            values = np.array(data[pos:].split(), dtype=np.float64)
        except ValueError:
            raise MatrixFileError(f"{path}: non-numeric PGM raster") from None
        if values.size < count:
            raise MatrixFileError(f"{path}: truncated PGM raster")
        values = values[:count]
    if values.max() > maxval:
        raise MatrixFileError(f"{path}: pixel value exceeds maxval {maxval}")
    return values.reshape(height, width), maxval


def write_pgm(path, X, binary=True):
    """Write `X` as an 8-bit PGM, clamping to [0, 255] and rounding."""
    img = np.clip(np.rint(np.asarray(X, dtype=np.float64)), 0, 255).astype(np.uint8)
    if img.ndim != 2:
        raise ValueError("PGM images must be 2-D")
    height, width = img.shape
    with open(path, "wb") as fh:
        if binary:
            fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
            fh.write(img.tobytes())
        else:
            fh.write(f"P2\n{width} {height}\n255\n".encode("ascii"))
            for row in img:
                fh.write((" ".join(map(str, row.tolist())) + "\n").encode("ascii"))


def read_matrix(path):
    """Read CSV or PGM depending on the file extension."""
    if matrix_format(path) == "pgm":
        return read_pgm(path)[0]
    return read_csv_matrix(path)


def write_matrix(path, X):
    if matrix_format(path) == "pgm":
        write_pgm(path, X)
    else:
        write_csv_matrix(path, X)

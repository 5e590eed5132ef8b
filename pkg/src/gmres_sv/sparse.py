"""Sparse CSR matrices, Matrix Market I/O, and built-in test-problem generators.

All vectors and dense matrices in this package are plain ``numpy.ndarray``
objects with float64 entries; only the sparse coefficient matrix gets a
dedicated type.
"""

import numpy as np

__all__ = [
    "CsrMatrix",
    "TripleIndexError",
    "MatrixMarketError",
    "MatrixMarketFormatError",
    "MatrixMarketParseError",
    "csr_from_coo",
    "spmv",
    "identity",
    "gen_laplacian_1d",
    "gen_bidiagonal",
    "read_matrix_market",
    "read_matrix_market_rhs",
]


class TripleIndexError(ValueError):
    """A coordinate triple lies outside the declared matrix shape."""

    def __init__(self, triple, n_rows, n_cols):
        self.triple = triple
        super().__init__(
            f"entry (row={triple[0]}, col={triple[1]}, value={triple[2]}) is outside "
            f"a {n_rows}x{n_cols} matrix"
        )


class MatrixMarketError(ValueError):
    """Base class for Matrix Market reader failures."""


class MatrixMarketFormatError(MatrixMarketError):
    """The file is valid Matrix Market but uses an unsupported qualifier."""


class MatrixMarketParseError(MatrixMarketError):
    """The file is malformed; ``line_no`` points at the offending line."""

    def __init__(self, line_no, message):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class CsrMatrix:
    """Immutable sparse matrix in compressed sparse row form.

    Parameters
    ----------
    n_rows, n_cols : int
        Matrix shape.
    row_ptr : array of int, length ``n_rows + 1``
        Nondecreasing offsets into ``col_idx``/``values``; ``row_ptr[0] == 0``
        and ``row_ptr[-1] == nnz``.
    col_idx : array of int
        Column index of each stored entry, strictly increasing within a row.
    values : array of float
        Entry values; must all be finite.

    Instances are treated as read-only after construction and are safe to
    share across threads.
    """

    __slots__ = ("n_rows", "n_cols", "row_ptr", "col_idx", "values", "_coo_rows")

    def __init__(self, n_rows, n_cols, row_ptr, col_idx, values):
        n_rows = int(n_rows)
        n_cols = int(n_cols)
        row_ptr = np.ascontiguousarray(row_ptr, dtype=np.int64)
        col_idx = np.ascontiguousarray(col_idx, dtype=np.int64)
        values = np.ascontiguousarray(values, dtype=np.float64)
        if n_rows < 0 or n_cols < 0:
            raise ValueError("matrix shape must be nonnegative")
        if row_ptr.shape != (n_rows + 1,):
            raise ValueError(f"row_ptr must have length n_rows + 1 = {n_rows + 1}")
        if col_idx.shape != values.shape or col_idx.ndim != 1:
            raise ValueError("col_idx and values must be 1-d arrays of equal length")
        if row_ptr[0] != 0 or row_ptr[-1] != values.size:
            raise ValueError("row_ptr must start at 0 and end at nnz")
        if np.any(np.diff(row_ptr) < 0):
            raise ValueError("row_ptr must be nondecreasing")
        if values.size:
            if col_idx.min() < 0 or col_idx.max() >= n_cols:
                raise ValueError("column indices out of range")
        rows = np.repeat(np.arange(n_rows, dtype=np.int64), np.diff(row_ptr))
        if values.size > 1:
            same_row = rows[1:] == rows[:-1]
            if np.any(col_idx[1:][same_row] <= col_idx[:-1][same_row]):
                raise ValueError("column indices must be strictly increasing within each row")
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix values must be finite")
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.row_ptr = row_ptr
        self.col_idx = col_idx
        self.values = values
        self._coo_rows = rows

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self):
        return self.values.size

    def to_dense(self):
        """Return the matrix as a dense (n_rows, n_cols) array."""
        dense = np.zeros((self.n_rows, self.n_cols))
        dense[self._coo_rows, self.col_idx] = self.values
        return dense

    def frobenius_norm(self):
        return float(np.sqrt(np.sum(self.values**2)))

    def __matmul__(self, x):
        return spmv(self, x)

    def __repr__(self):
        return f"CsrMatrix(shape={self.shape}, nnz={self.nnz})"


def csr_from_coo(triples, n_rows, n_cols):
    """Build a :class:`CsrMatrix` from coordinate triples.

    ``triples`` is either an iterable of ``(row, col, value)`` tuples or a
    3-tuple of parallel arrays. Duplicate coordinates are summed, rows are
    sorted, and the usual CSR invariants hold on the result.
    """
    if isinstance(triples, tuple) and len(triples) == 3 and np.ndim(triples[0]) == 1:
        rows = np.asarray(triples[0], dtype=np.int64)
        cols = np.asarray(triples[1], dtype=np.int64)
        vals = np.asarray(triples[2], dtype=np.float64)
    else:
        triples = list(triples)
        if triples:
            rows = np.array([t[0] for t in triples], dtype=np.int64)
            cols = np.array([t[1] for t in triples], dtype=np.int64)
            vals = np.array([t[2] for t in triples], dtype=np.float64)
        else:
            rows = np.zeros(0, dtype=np.int64)
            cols = np.zeros(0, dtype=np.int64)
            vals = np.zeros(0, dtype=np.float64)
    bad = (rows < 0) | (rows >= n_rows) | (cols < 0) | (cols >= n_cols)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise TripleIndexError((int(rows[i]), int(cols[i]), float(vals[i])), n_rows, n_cols)
    if rows.size:
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        first = np.ones(rows.size, dtype=bool)
        first[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        starts = np.flatnonzero(first)
        vals = np.add.reduceat(vals, starts)
        rows = rows[starts]
        cols = cols[starts]
    row_ptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.add.at(row_ptr, rows + 1, 1)
    row_ptr = np.cumsum(row_ptr)
    return CsrMatrix(n_rows, n_cols, row_ptr, cols, vals)


def spmv(A, x):
    """Sparse matrix-vector product ``A @ x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n_cols,):
        raise ValueError(f"vector length {x.shape} does not match matrix shape {A.shape}")
    products = A.values * x[A.col_idx]
    return np.bincount(A._coo_rows, weights=products, minlength=A.n_rows)


def identity(n):
    """n x n identity matrix in CSR form."""
    if n < 1:
        raise ValueError("matrix order must be at least 1")
    idx = np.arange(n, dtype=np.int64)
    return CsrMatrix(n, n, np.arange(n + 1, dtype=np.int64), idx, np.ones(n))


def gen_laplacian_1d(n):
    """Symmetric tridiagonal matrix with 2 on the diagonal and -1 off it.

    The order-n matrix has eigenvalues ``2 * (1 - cos(k*pi/(n+1)))`` for
    ``k = 1..n``.
    """
    if n < 1:
        raise ValueError("matrix order must be at least 1")
    idx = np.arange(n, dtype=np.int64)
    rows = np.concatenate([idx, idx[1:], idx[:-1]])
    cols = np.concatenate([idx, idx[:-1], idx[1:]])
    vals = np.concatenate([2.0 * np.ones(n), -np.ones(n - 1), -np.ones(n - 1)])
    return csr_from_coo((rows, cols, vals), n, n)


def gen_bidiagonal(n, superdiag):
    """Upper bidiagonal matrix with diagonal 1, 2, ..., n and a constant superdiagonal."""
    if n < 1:
        raise ValueError("matrix order must be at least 1")
    idx = np.arange(n, dtype=np.int64)
    rows = np.concatenate([idx, idx[:-1]])
    cols = np.concatenate([idx, idx[1:]])
    vals = np.concatenate([np.arange(1.0, n + 1.0), float(superdiag) * np.ones(n - 1)])
    return csr_from_coo((rows, cols, vals), n, n)


def _open_source(source):
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        return open(source, "r", encoding="ascii"), True
    return source, False


def _read_banner(stream):
    line = stream.readline()
    fields = line.strip().split()
    if not fields or fields[0].lower() != "%%matrixmarket":
        raise MatrixMarketParseError(1, "missing %%MatrixMarket banner")
    if len(fields) < 4:
        raise MatrixMarketParseError(1, "banner must name object, format and field")
    obj = fields[1].lower()
    fmt = fields[2].lower()
    field = fields[3].lower()
    symmetry = fields[4].lower() if len(fields) > 4 else "general"
    if obj != "matrix":
        raise MatrixMarketFormatError(f"unsupported object '{obj}'")
    return fmt, field, symmetry


def _data_lines(stream):
    """Yield (line_no, tokens) for non-comment, non-blank lines after the banner."""
    for line_no, line in enumerate(stream, start=2):
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        yield line_no, stripped.split()


def _parse_ints(tokens, count, line_no):
    if len(tokens) != count:
        raise MatrixMarketParseError(line_no, f"expected {count} integers, got {len(tokens)} tokens")
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise MatrixMarketParseError(line_no, f"could not parse integers from {tokens!r}") from None


def read_matrix_market(source):
    """Read a Matrix Market coordinate file into a :class:`CsrMatrix`.

    Supports ``coordinate real`` files with ``general`` or ``symmetric``
    qualifiers; symmetric storage is expanded to full storage by mirroring
    off-diagonal entries. Indices are converted from 1-based to 0-based and
    duplicate entries are summed.
    """
    stream, owned = _open_source(source)
    try:
        fmt, field, symmetry = _read_banner(stream)
        if fmt != "coordinate":
            raise MatrixMarketFormatError(f"unsupported format '{fmt}' for a sparse matrix")
        if field != "real":
            raise MatrixMarketFormatError(f"unsupported field '{field}'")
        if symmetry not in ("general", "symmetric"):
            raise MatrixMarketFormatError(f"unsupported symmetry '{symmetry}'")
        lines = _data_lines(stream)
        try:
            line_no, tokens = next(lines)
        except StopIteration:
            raise MatrixMarketParseError(2, "missing size line") from None
        n_rows, n_cols, nnz = _parse_ints(tokens, 3, line_no)
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz, dtype=np.float64)
        got = 0
        for line_no, tokens in lines:
            if got == nnz:
                raise MatrixMarketParseError(line_no, f"more than the declared {nnz} entries")
            if len(tokens) != 3:
                raise MatrixMarketParseError(line_no, f"expected 'row col value', got {len(tokens)} tokens")
            try:
                i = int(tokens[0])
                j = int(tokens[1])
                v = float(tokens[2])
            except ValueError:
                raise MatrixMarketParseError(line_no, f"could not parse entry from {tokens!r}") from None
            if not (1 <= i <= n_rows and 1 <= j <= n_cols):
                raise MatrixMarketParseError(line_no, f"entry ({i}, {j}) outside a {n_rows}x{n_cols} matrix")
            rows[got] = i - 1
            cols[got] = j - 1
            vals[got] = v
            got += 1
        if got != nnz:
            raise MatrixMarketParseError(line_no if nnz else 2, f"declared {nnz} entries but found {got}")
        if symmetry == "symmetric":
            off = rows != cols
            mirror_rows = cols[off]
            mirror_cols = rows[off]
            rows = np.concatenate([rows, mirror_rows])
            cols = np.concatenate([cols, mirror_cols])
            vals = np.concatenate([vals, vals[off]])
        return csr_from_coo((rows, cols, vals), n_rows, n_cols)
    finally:
        if owned:
            stream.close()


def read_matrix_market_rhs(source):
    """Read a Matrix Market vector (array or single-column coordinate) file.

    Returns a dense 1-d float array of the declared length.
    """
    stream, owned = _open_source(source)
    try:
        fmt, field, symmetry = _read_banner(stream)
        if field != "real":
            raise MatrixMarketFormatError(f"unsupported field '{field}'")
        if symmetry != "general":
            raise MatrixMarketFormatError(f"unsupported symmetry '{symmetry}' for a vector")
        lines = _data_lines(stream)
        try:
            line_no, tokens = next(lines)
        except StopIteration:
            raise MatrixMarketParseError(2, "missing size line") from None
        if fmt == "array":
            n, m = _parse_ints(tokens, 2, line_no)
            if m != 1:
                raise MatrixMarketFormatError(f"expected a single column, got {m}")
            data = np.empty(n, dtype=np.float64)
            got = 0
            for line_no, tokens in lines:
                for tok in tokens:
                    if got == n:
                        raise MatrixMarketParseError(line_no, f"more than the declared {n} values")
                    try:
                        data[got] = float(tok)
                    except ValueError:
                        raise MatrixMarketParseError(line_no, f"could not parse value {tok!r}") from None
                    got += 1
            if got != n:
                raise MatrixMarketParseError(line_no if n else 2, f"declared {n} values but found {got}")
        elif fmt == "coordinate":
            n, m, nnz = _parse_ints(tokens, 3, line_no)
            if m != 1:
                raise MatrixMarketFormatError(f"expected a single column, got {m}")
            data = np.zeros(n, dtype=np.float64)
            got = 0
            for line_no, tokens in lines:
                if got == nnz:
                    raise MatrixMarketParseError(line_no, f"more than the declared {nnz} entries")
                if len(tokens) != 3:
                    raise MatrixMarketParseError(line_no, f"expected 'row col value', got {len(tokens)} tokens")
                try:
                    i = int(tokens[0])
                    j = int(tokens[1])
                    v = float(tokens[2])
                except ValueError:
                    raise MatrixMarketParseError(line_no, f"could not parse entry from {tokens!r}") from None
                if not (1 <= i <= n and j == 1):
                    raise MatrixMarketParseError(line_no, f"entry ({i}, {j}) outside a {n}x1 vector")
                data[i - 1] += v
                got += 1
            if got != nnz:
                raise MatrixMarketParseError(line_no if nnz else 2, f"declared {nnz} entries but found {got}")
        else:
            raise MatrixMarketFormatError(f"unsupported format '{fmt}' for a vector")
        if not np.all(np.isfinite(data)):
            raise MatrixMarketParseError(0, "vector contains non-finite values")
        return data
    finally:
        if owned:
            stream.close()

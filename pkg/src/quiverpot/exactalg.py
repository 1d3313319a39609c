"""Exact linear algebra over the rationals and prime fields.

Substrate for every span, intersection, rank and membership computation in
the toolkit.  Scalars are `fractions.Fraction` (always in lowest terms with
positive denominator) or plain ints reduced to ``[0, p)`` for a prime field.
No floating point anywhere.

`MatrixQ` and `Subspace` are the dense public surface.  `RowReducer` is the
sparse reduced-row-echelon accumulator that the path-algebra layers feed
directly; its rows are dicts ``column -> scalar`` and are kept fully reduced
(pivot entry 1, pivot column zero in every other row), so membership tests
and coordinate extraction are single passes.
"""

from __future__ import annotations

from fractions import Fraction

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n):
    """Deterministic Miller-Rabin, valid for every n below 3.3e24."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class FieldSpec:
    """The ground field: ``FieldSpec.rationals()`` or ``FieldSpec.prime_field(p)``.

    Carries the characteristic hypotheses of the deformation theory (for the
    reconstruction step the characteristic must not divide N factorial).
    """

    __slots__ = ("p",)

    def __init__(self, p=None):
        if p is not None and not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p

    @classmethod
    def rationals(cls):
        return cls(None)

    @classmethod
    def prime_field(cls, p):
        return cls(p)

    @property
    def char(self):
        return 0 if self.p is None else self.p

    @property
    def is_rationals(self):
        return self.p is None

    @property
    def zero(self):
        return Fraction(0) if self.p is None else 0

    @property
    def one(self):
        return Fraction(1) if self.p is None else 1

    def coerce(self, x):
        """Turn an int, Fraction or another scalar into a field scalar."""
        if self.p is None:
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError(
                    f"denominator of {x} vanishes mod {self.p}")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return x % self.p

    def add(self, a, b):
        return a + b if self.p is None else (a + b) % self.p

    def sub(self, a, b):
        return a - b if self.p is None else (a - b) % self.p

    def mul(self, a, b):
        return a * b if self.p is None else (a * b) % self.p

    def neg(self, a):
        return -a if self.p is None else (-a) % self.p

    def inv(self, a):
        if not a:
            raise ZeroDivisionError("inverse of zero")
        return 1 / a if self.p is None else pow(a, -1, self.p)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def divides_char(self, n):
        """True iff the characteristic is positive and divides n."""
        return self.p is not None and n % self.p == 0

    def scalar_str(self, a):
        return str(a)

    def parse_scalar(self, text):
        """Parse ``3``, ``-2`` or ``p/q`` into a scalar."""
        text = text.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            return self.div(self.coerce(int(num)), self.coerce(int(den)))
        return self.coerce(int(text))

    def __eq__(self, other):
        return isinstance(other, FieldSpec) and self.p == other.p

    def __hash__(self):
        return hash(("FieldSpec", self.p))

    def __repr__(self):
        return "QQ" if self.p is None else f"GF({self.p})"


QQ = FieldSpec.rationals()


def _axpy(target, row, c):
    """target += c * row, in place, dropping zero entries."""
    for col, x in row.items():
        v = target.get(col)
        if v is None:
            cx = c * x
            if cx:
                target[col] = cx
        else:
            v = v + c * x
            if v:
                target[col] = v
            else:
                del target[col]


def _axpy_mod(target, row, c, p):
    for col, x in row.items():
        v = (target.get(col, 0) + c * x) % p
        if v:
            target[col] = v
        elif col in target:
            del target[col]


class RowReducer:
    """Sparse reduced-row-echelon accumulator over an exact field.

    Rows are stored by pivot column with pivot entry 1; every other stored
    row is zero at that column, so `reduce` is a single pass and the
    coordinates of a member vector can be read off at the pivot columns.
    """

    __slots__ = ("field", "rows", "_p")

    def __init__(self, field):
        self.field = field
        self.rows = {}
        self._p = field.p

    @property
    def rank(self):
        return len(self.rows)

    def pivots(self):
        return sorted(self.rows)

    def reduce(self, vec):
        """Return the residue of vec after eliminating all pivots (a new dict)."""
        out = {c: x for c, x in vec.items() if x}
        p = self._p
        for c in [c for c in out if c in self.rows]:
            coef = out.get(c)
            if coef:
                if p is None:
                    _axpy(out, self.rows[c], -coef)
                else:
                    _axpy_mod(out, self.rows[c], -coef, p)
        return out

    def add(self, vec):
        """Insert vec's residue; return the new pivot column, or None if dependent."""
        out = self.reduce(vec)
        if not out:
            return None
        piv = min(out)
        inv = self.field.inv(out[piv])
        p = self._p
        if p is None:
            row = {c: inv * x for c, x in out.items()}
        else:
            row = {c: inv * x % p for c, x in out.items()}
        for r2 in self.rows.values():
            coef = r2.get(piv)
            if coef:
                if p is None:
                    _axpy(r2, row, -coef)
                else:
                    _axpy_mod(r2, row, -coef, p)
        self.rows[piv] = row
        return piv

    def add_many(self, vecs):
        for v in vecs:
            self.add(v)

    def contains(self, vec):
        return not self.reduce(vec)

    def coordinates(self, vec):
        """Coordinates of vec in the stored basis (rows sorted by pivot), or None.

        Valid because the rows are fully reduced: the coordinate on the row
        with pivot c is simply vec[c].
        """
        if not self.contains(vec):
            return None
        return {c: vec.get(c, self.field.zero) for c in self.rows}

    def basis_rows(self):
        """The stored rows sorted by pivot column."""
        return [self.rows[c] for c in sorted(self.rows)]

    def copy(self):
        new = RowReducer(self.field)
        new.rows = {c: dict(r) for c, r in self.rows.items()}
        return new


class MatrixQ:
    """Dense row-major matrix over an exact field."""

    __slots__ = ("field", "rows", "cols", "entries")

    def __init__(self, field, rows, cols, entries):
        if len(entries) != rows * cols:
            raise ValueError("entry count does not match shape")
        self.field = field
        self.rows = rows
        self.cols = cols
        self.entries = [field.coerce(x) for x in entries]

    @classmethod
    def from_rows(cls, field, row_lists):
        rows = len(row_lists)
        cols = len(row_lists[0]) if rows else 0
        flat = [x for row in row_lists for x in row]
        return cls(field, rows, cols, flat)

    def row(self, i):
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def entry(self, i, j):
        return self.entries[i * self.cols + j]

    def sparse_rows(self):
        out = []
        for i in range(self.rows):
            r = {}
            base = i * self.cols
            for j in range(self.cols):
                x = self.entries[base + j]
                if x:
                    r[j] = x
            out.append(r)
        return out

    def __eq__(self, other):
        return (isinstance(other, MatrixQ) and self.field == other.field
                and self.rows == other.rows and self.cols == other.cols
                and self.entries == other.entries)

    def __repr__(self):
        return f"MatrixQ({self.rows}x{self.cols} over {self.field!r})"


class Subspace:
    """A subspace in canonical reduced-row-echelon coordinates.

    Canonicity makes equality of subspaces equality of basis matrices.
    """

    __slots__ = ("field", "ambient_dim", "basis", "pivot_columns")

    def __init__(self, field, ambient_dim, basis, pivot_columns):
        self.field = field
        self.ambient_dim = ambient_dim
        self.basis = basis
        self.pivot_columns = pivot_columns

    @classmethod
    def from_reducer(cls, field, ambient_dim, reducer):
        pivots = reducer.pivots()
        zero = field.zero
        basis = []
        for c in pivots:
            row = reducer.rows[c]
            basis.append([row.get(j, zero) for j in range(ambient_dim)])
        return cls(field, ambient_dim, basis, pivots)

    def to_reducer(self):
        red = RowReducer(self.field)
        for row in self.basis:
            red.add({j: x for j, x in enumerate(row) if x})
        return red

    @property
    def dim(self):
        return len(self.basis)

    def contains(self, vec):
        if len(vec) != self.ambient_dim:
            raise ValueError("vector length does not match ambient dimension")
        return self.to_reducer().contains(
            {j: self.field.coerce(x) for j, x in enumerate(vec)
             if self.field.coerce(x)})

    def __eq__(self, other):
        return (isinstance(other, Subspace) and self.field == other.field
                and self.ambient_dim == other.ambient_dim
                and self.basis == other.basis)

    def __repr__(self):
        return (f"Subspace(dim {self.dim} of ambient {self.ambient_dim} "
                f"over {self.field!r})")


def span_of_rows(field, ambient_dim, rows):
    """Canonical subspace spanned by dense rows."""
    red = RowReducer(field)
    for row in rows:
        red.add({j: field.coerce(x) for j, x in enumerate(row)
                 if field.coerce(x)})
    return Subspace.from_reducer(field, ambient_dim, red)


def span_of_sparse(field, ambient_dim, sparse_rows):
    red = RowReducer(field)
    red.add_many(sparse_rows)
    return Subspace.from_reducer(field, ambient_dim, red)


def rref(m):
    """Rank and canonical row space of a matrix."""
    red = RowReducer(m.field)
    red.add_many(m.sparse_rows())
    return red.rank, Subspace.from_reducer(m.field, m.cols, red)


def subspace_sum(a, b):
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    red = a.to_reducer()
    for row in b.basis:
        red.add({j: x for j, x in enumerate(row) if x})
    return Subspace.from_reducer(a.field, a.ambient_dim, red)


def intersect(a, b):
    """Canonical basis of the intersection of two subspaces.

    Zassenhaus: reduce rows [x|x] for x in a and [y|0] for y in b; rows of
    the reduced span whose left half vanishes have right halves spanning
    the intersection.
    """
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    n = a.ambient_dim
    red = RowReducer(a.field)
    for row in a.basis:
        v = {}
        for j, x in enumerate(row):
            if x:
                v[j] = x
                v[j + n] = x
        red.add(v)
    for row in b.basis:
        red.add({j: x for j, x in enumerate(row) if x})
    out = RowReducer(a.field)
    for piv in red.pivots():
        if piv >= n:
            row = red.rows[piv]
            out.add({c - n: x for c, x in row.items()})
    return Subspace.from_reducer(a.field, n, out)


def kernel(m):
    """Canonical basis of the right kernel of a matrix."""
    field = m.field
    red = RowReducer(field)
    red.add_many(m.sparse_rows())
    pivots = red.pivots()
    pivot_set = set(pivots)
    free_cols = [j for j in range(m.cols) if j not in pivot_set]
    out = RowReducer(field)
    one = field.one
    for f in free_cols:
        vec = {f: one}
        for c in pivots:
            x = red.rows[c].get(f)
            if x:
                vec[c] = field.neg(x)
        out.add(vec)
    return Subspace.from_reducer(field, m.cols, out)


def solve_affine(m, rhs):
    """One solution of m x = rhs plus the kernel, or None if inconsistent."""
    if len(rhs) != m.rows:
        raise ValueError("rhs length does not match row count")
    field = m.field
    n = m.cols
    red = RowReducer(field)
    aug_col = n
    sparse = m.sparse_rows()
    for i, row in enumerate(sparse):
        v = dict(row)
        r = field.coerce(rhs[i])
        if r:
            v[aug_col] = r
        red.add(v)
    # a pivot in the augmented column certifies inconsistency
    if aug_col in red.rows:
        return None
    particular = [field.zero] * n
    for c in red.pivots():
        x = red.rows[c].get(aug_col)
        if x:
            particular[c] = x
    return particular, kernel(m)


def contains(space, v):
    """Membership of a dense vector in a subspace."""
    return space.contains(v)

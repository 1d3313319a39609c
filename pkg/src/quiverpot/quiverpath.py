"""Quivers, paths and the path algebra.

Composition convention, fixed once for the whole toolkit: a path stores its
arrows first-applied-first (``arrows[0]`` acts first), while printing and
parsing read right to left, so the displayed word ``x y`` means "apply y,
then x".  Term order is (length, displayed word, source vertex), which makes
element equality syntactic.
"""

from __future__ import annotations

from .exactalg import FieldSpec, RowReducer, Subspace


class Path:
    """A composable arrow sequence, or a trivial path at a vertex."""

    __slots__ = ("arrows", "source", "target")

    def __init__(self, arrows, source, target):
        self.arrows = tuple(arrows)
        self.source = source
        self.target = target

    @property
    def length(self):
        return len(self.arrows)

    @property
    def is_trivial(self):
        return not self.arrows

    @property
    def is_cycle(self):
        return self.source == self.target

    def display_word(self):
        """Arrow ids in display (right-to-left, last-applied-first) order."""
        return tuple(reversed(self.arrows))

    def sort_key(self):
        return (len(self.arrows), self.display_word(), self.source)

    def __eq__(self, other):
        return (isinstance(other, Path) and self.arrows == other.arrows
                and self.source == other.source)

    def __hash__(self):
        return hash((self.arrows, self.source))

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __repr__(self):
        if not self.arrows:
            return f"e({self.source})"
        return " ".join(self.display_word())


class Quiver:
    """A finite quiver: vertex ids plus arrows (id, source, target).

    Vertex and arrow ids are strings and must be distinct; endpoints must be
    declared vertices.  Connectedness is reported, not required.
    """

    def __init__(self, vertices, arrows):
        if not vertices:
            raise ValueError("a quiver needs at least one vertex")
        if not arrows:
            raise ValueError("a quiver needs at least one arrow")
        if len(set(vertices)) != len(vertices):
            raise ValueError("duplicate vertex id")
        self.vertices = list(vertices)
        self._vset = set(vertices)
        self.arrow_ids = []
        self._src = {}
        self._tgt = {}
        self._from = {v: [] for v in vertices}
        self._into = {v: [] for v in vertices}
        for aid, s, t in arrows:
            if aid in self._src or aid in self._vset:
                raise ValueError(f"duplicate id {aid!r}")
            if s not in self._vset or t not in self._vset:
                raise ValueError(f"arrow {aid!r} has undeclared endpoint")
            self.arrow_ids.append(aid)
            self._src[aid] = s
            self._tgt[aid] = t
        self._sorted_arrows = sorted(self.arrow_ids)
        for a in self._sorted_arrows:
            self._from[self._src[a]].append(a)
            self._into[self._tgt[a]].append(a)
        self._path_cache = {}

    def source(self, aid):
        return self._src[aid]

    def target(self, aid):
        return self._tgt[aid]

    def arrows_from(self, v):
        """Arrows with source v."""
        return list(self._from[v])

    def arrows_into(self, v):
        """Arrows with target v."""
        return list(self._into[v])

    def trivial_path(self, v):
        if v not in self._vset:
            raise ValueError(f"unknown vertex {v!r}")
        return Path((), v, v)

    def arrow_path(self, aid):
        return Path((aid,), self._src[aid], self._tgt[aid])

    def path_from_arrows(self, arrow_seq):
        """Build a path from arrow ids in application (storage) order."""
        arrow_seq = list(arrow_seq)
        if not arrow_seq:
            raise ValueError("use trivial_path for length-0 paths")
        for a, b in zip(arrow_seq, arrow_seq[1:]):
            if self._tgt[a] != self._src[b]:
                raise ValueError(
                    f"arrows {a!r} and {b!r} do not compose "
                    f"({self._tgt[a]!r} != {self._src[b]!r})")
        return Path(arrow_seq, self._src[arrow_seq[0]],
                    self._tgt[arrow_seq[-1]])

    def path_from_display(self, tokens):
        """Build a path from arrow ids written right-to-left."""
        return self.path_from_arrows(list(reversed(list(tokens))))

    def is_connected(self):
        """Connectedness of the underlying undirected graph."""
        adj = {v: set() for v in self.vertices}
        for a in self.arrow_ids:
            adj[self._src[a]].add(self._tgt[a])
            adj[self._tgt[a]].add(self._src[a])
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def paths_of_length(self, j):
        """All paths of length exactly j, in canonical (display-lex) order."""
        if j < 0:
            raise ValueError("path length must be nonnegative")
        cached = self._path_cache.get(j)
        if cached is not None:
            return cached
        if j == 0:
            result = [Path((), v, v) for v in sorted(self.vertices)]
        else:
            shorter = self.paths_of_length(j - 1)
            by_target = {}
            for p in shorter:
                by_target.setdefault(p.target, []).append(p)
            result = []
            # prepending the last-applied arrow in id order yields the list
            # already sorted by displayed word
            for a in self._sorted_arrows:
                for p in by_target.get(self._src[a], ()):
                    result.append(Path(p.arrows + (a,), p.source,
                                       self._tgt[a]))
        self._path_cache[j] = result
        return result

    def path_index(self, j):
        """dict Path -> position in paths_of_length(j)."""
        key = ("idx", j)
        cached = self._path_cache.get(key)
        if cached is None:
            cached = {p: i for i, p in enumerate(self.paths_of_length(j))}
            self._path_cache[key] = cached
        return cached


def compose(later, earlier):
    """Concatenate two paths, or None when the endpoints do not meet.

    ``compose(b, a)`` is the product "b after a": a acts first.
    """
    if earlier.target != later.source:
        return None
    if not earlier.arrows:
        return later
    if not later.arrows:
        return earlier
    return Path(earlier.arrows + later.arrows, earlier.source, later.target)


def enumerate_paths(q, j, source=None, target=None):
    """Paths of length exactly j, optionally filtered by endpoints."""
    paths = q.paths_of_length(j)
    if source is not None:
        paths = [p for p in paths if p.source == source]
    if target is not None:
        paths = [p for p in paths if p.target == target]
    return list(paths)


def strip_right(q, p, b):
    """Remove arrow b from the first-applied (displayed rightmost) end.

    Returns None when the end does not match; raises on length-0 paths.
    """
    if not p.arrows:
        raise ValueError("cannot strip an arrow from a trivial path")
    if p.arrows[0] != b:
        return None
    if len(p.arrows) == 1:
        return Path((), p.target, p.target)
    return Path(p.arrows[1:], q.target(b), p.target)


def strip_left(q, p, a):
    """Remove arrow a from the last-applied (displayed leftmost) end."""
    if not p.arrows:
        raise ValueError("cannot strip an arrow from a trivial path")
    if p.arrows[-1] != a:
        return None
    if len(p.arrows) == 1:
        return Path((), p.source, p.source)
    return Path(p.arrows[:-1], p.source, q.source(a))


class Element:
    """A finite field-linear combination of paths (a member of kQ).

    Zero coefficients are never stored; equality is syntactic.
    """

    __slots__ = ("field", "quiver", "terms")

    def __init__(self, field, quiver, terms=None):
        self.field = field
        self.quiver = quiver
        self.terms = {p: c for p, c in (terms or {}).items() if c}

    @classmethod
    def zero(cls, field, quiver):
        return cls(field, quiver, {})

    @classmethod
    def from_path(cls, field, quiver, path, coeff=1):
        return cls(field, quiver, {path: field.coerce(coeff)})

    @classmethod
    def from_terms(cls, field, quiver, pairs):
        terms = {}
        for path, coeff in pairs:
            c = field.coerce(coeff)
            if not c:
                continue
            prev = terms.get(path)
            c = field.add(prev, c) if prev is not None else c
            if c:
                terms[path] = c
            elif path in terms:
                del terms[path]
        return cls(field, quiver, terms)

    @property
    def is_zero(self):
        return not self.terms

    def _check(self, other):
        if self.field != other.field:
            raise ValueError("field mismatch")
        if self.quiver is not other.quiver:
            raise ValueError("quiver mismatch")

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        f = self.field
        for p, c in other.terms.items():
            v = terms.get(p)
            v = f.add(v, c) if v is not None else c
            if v:
                terms[p] = v
            elif p in terms:
                del terms[p]
        return Element(self.field, self.quiver, terms)

    def __neg__(self):
        f = self.field
        return Element(self.field, self.quiver,
                       {p: f.neg(c) for p, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = self.field.coerce(c)
        if not c:
            return Element.zero(self.field, self.quiver)
        f = self.field
        return Element(self.field, self.quiver,
                       {p: f.mul(c, x) for p, x in self.terms.items()})

    def __mul__(self, other):
        """Bilinear extension of composition; incomposable products vanish.

        ``x * y`` applies y first, matching the displayed order "x y".
        """
        self._check(other)
        f = self.field
        terms = {}
        for p, cp in self.terms.items():
            for q, cq in other.terms.items():
                pq = compose(p, q)
                if pq is None:
                    continue
                c = f.mul(cp, cq)
                v = terms.get(pq)
                v = f.add(v, c) if v is not None else c
                if v:
                    terms[pq] = v
                elif pq in terms:
                    del terms[pq]
        return Element(self.field, self.quiver, terms)

    def graded_component(self, j):
        return Element(self.field, self.quiver,
                       {p: c for p, c in self.terms.items()
                        if p.length == j})

    def degrees(self):
        return sorted({p.length for p in self.terms})

    @property
    def max_degree(self):
        return max((p.length for p in self.terms), default=0)

    def is_homogeneous(self, j=None):
        degs = self.degrees()
        if j is None:
            return len(degs) <= 1
        return degs in ([], [j])

    def left_vertex_truncate(self, v):
        """e_v . x : keep the terms with target v."""
        return Element(self.field, self.quiver,
                       {p: c for p, c in self.terms.items() if p.target == v})

    def right_vertex_truncate(self, v):
        """x . e_v : keep the terms with source v."""
        return Element(self.field, self.quiver,
                       {p: c for p, c in self.terms.items() if p.source == v})

    def endpoints(self):
        """The set of (source, target) pairs in the support."""
        return {(p.source, p.target) for p in self.terms}

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda pc: pc[0].sort_key())

    def as_vector(self, index):
        """Coordinates over a path index dict (must cover the support)."""
        return {index[p]: c for p, c in self.terms.items()}

    def __eq__(self, other):
        return (isinstance(other, Element) and self.field == other.field
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.field,
                     tuple(sorted(((p, c) for p, c in self.terms.items()),
                                  key=lambda pc: pc[0].sort_key()))))

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for p, c in self.sorted_terms():
            bits.append(f"{self.field.scalar_str(c)} * {p!r}")
        return " + ".join(bits)


def unit_element(field, quiver):
    """Sum of the vertex idempotents: the two-sided unit of kQ."""
    return Element(field, quiver,
                   {quiver.trivial_path(v): field.one
                    for v in quiver.vertices})


def vertex_idempotent(field, quiver, v):
    return Element.from_path(field, quiver, quiver.trivial_path(v))


def arrow_element(field, quiver, aid):
    return Element.from_path(field, quiver, quiver.arrow_path(aid))


def element_from_vector(field, quiver, paths, vec):
    """Inverse of Element.as_vector for a path list and sparse coordinates."""
    return Element(field, quiver, {paths[i]: c for i, c in vec.items() if c})


def strip_right_element(x, b):
    """Linear extension of strip_right to elements (length-0 terms rejected)."""
    out = {}
    f = x.field
    for p, c in x.terms.items():
        r = strip_right(x.quiver, p, b)
        if r is None:
            continue
        v = out.get(r)
        v = f.add(v, c) if v is not None else c
        if v:
            out[r] = v
        elif r in out:
            del out[r]
    return Element(x.field, x.quiver, out)


def strip_left_element(x, a):
    out = {}
    f = x.field
    for p, c in x.terms.items():
        r = strip_left(x.quiver, p, a)
        if r is None:
            continue
        v = out.get(r)
        v = f.add(v, c) if v is not None else c
        if v:
            out[r] = v
        elif r in out:
            del out[r]
    return Element(x.field, x.quiver, out)


class BimoduleSpan:
    """A kQ0-sub-bimodule of kQ_d, stored as a canonical subspace.

    Construction splits every generator into endpoint-homogeneous pieces
    (e.x.f for all vertex pairs), so closure under the vertex idempotents
    holds unconditionally.
    """

    __slots__ = ("quiver", "field", "degree", "reducer", "generators")

    def __init__(self, field, quiver, degree, generators):
        self.quiver = quiver
        self.field = field
        self.degree = degree
        self.generators = list(generators)
        index = quiver.path_index(degree)
        self.reducer = RowReducer(field)
        for g in self.generators:
            if g.is_zero:
                continue
            if not g.is_homogeneous(degree):
                raise ValueError("generator is not homogeneous of the span degree")
            pieces = {}
            for p, c in g.terms.items():
                pieces.setdefault((p.source, p.target), {})[index[p]] = c
            for piece in pieces.values():
                self.reducer.add(piece)

    @property
    def dim(self):
        return self.reducer.rank

    def contains_element(self, x):
        if x.is_zero:
            return True
        if not x.is_homogeneous(self.degree):
            return False
        index = self.quiver.path_index(self.degree)
        return self.reducer.contains(x.as_vector(index))

    def subspace(self):
        return Subspace.from_reducer(
            self.field, len(self.quiver.paths_of_length(self.degree)),
            self.reducer)

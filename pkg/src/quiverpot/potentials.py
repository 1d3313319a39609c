"""The cyclic calculus on a quiver.

A potential is a finite linear combination of cycle classes (cycles modulo
rotation).  The maps implemented here move between that quotient and the
path algebra:

  * cyclic_symmetrize sends a class of length j to the sum of its j
    rotations (counted with multiplicity when the cycle is periodic);
  * cyclic_derivative strips an arrow from the rotation sum, concretely
    ``d_a(class of p) = sum of v.u over displayed factorisations p = u a v``;
  * cyclic_symmetrize_prime is the power-aware variant: on the class of
    t^m (m maximal) it sums the m-th powers of the rotations of t, so it
    has j/m terms instead of j;
  * double_derivative records both sides of each occurrence,
    ``dd_a(p) = sum of u (x) v over p = u a v``, with swap exchanging the
    factors.

All maps are linear and exact.
"""

from __future__ import annotations

from .quiverpath import Element, Path, enumerate_paths


class CycleClass:
    """A cycle modulo rotation, stored by its minimal rotation.

    The representative is the rotation whose displayed word is
    lexicographically least; ties between distinct rotations cannot occur
    because equal words force periodicity and periodic rotations coincide
    as paths.
    """

    __slots__ = ("rep",)

    def __init__(self, rep):
        self.rep = rep

    @property
    def length(self):
        return self.rep.length

    @property
    def base_vertex(self):
        return self.rep.source

    def sort_key(self):
        return self.rep.sort_key()

    def __eq__(self, other):
        return isinstance(other, CycleClass) and self.rep == other.rep

    def __hash__(self):
        return hash(("CycleClass", self.rep))

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __repr__(self):
        return f"[{self.rep!r}]"


def distinct_rotations(q, cl):
    """The distinct rotations of a class, as paths (j/m of them)."""
    out = []
    seen = set()
    s = cl.rep.arrows
    for k in range(len(s)):
        arrows = s[k:] + s[:k]
        if arrows not in seen:
            seen.add(arrows)
            out.append(Path(arrows, q.source(arrows[0]),
                            q.target(arrows[-1])))
    return out


def class_of(q, p):
    """The rotation class of a cycle."""
    if p.length < 1:
        raise ValueError("cycle classes need length at least 1")
    if p.source != p.target:
        raise ValueError(f"{p!r} is not a cycle")
    best = None
    n = len(p.arrows)
    for k in range(n):
        arrows = p.arrows[k:] + p.arrows[:k]
        word = tuple(reversed(arrows))
        if best is None or word < best[0]:
            best = (word, arrows)
    arrows = best[1]
    rep = Path(arrows, q.source(arrows[0]), q.target(arrows[-1]))
    return CycleClass(rep)


class Potential:
    """A finite linear combination of cycle classes: a member of Pot(Q)."""

    __slots__ = ("field", "quiver", "terms")

    def __init__(self, field, quiver, terms=None):
        self.field = field
        self.quiver = quiver
        self.terms = {s: c for s, c in (terms or {}).items() if c}

    @classmethod
    def zero(cls, field, quiver):
        return cls(field, quiver, {})

    @classmethod
    def from_classes(cls, field, quiver, pairs):
        terms = {}
        for cl, coeff in pairs:
            c = field.coerce(coeff)
            if not c:
                continue
            prev = terms.get(cl)
            c = field.add(prev, c) if prev is not None else c
            if c:
                terms[cl] = c
            elif cl in terms:
                del terms[cl]
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
        for s, c in other.terms.items():
            v = terms.get(s)
            v = f.add(v, c) if v is not None else c
            if v:
                terms[s] = v
            elif s in terms:
                del terms[s]
        return Potential(self.field, self.quiver, terms)

    def __neg__(self):
        f = self.field
        return Potential(self.field, self.quiver,
                         {s: f.neg(c) for s, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = self.field.coerce(c)
        if not c:
            return Potential.zero(self.field, self.quiver)
        f = self.field
        return Potential(self.field, self.quiver,
                         {s: f.mul(c, x) for s, x in self.terms.items()})

    def degrees(self):
        return sorted({s.length for s in self.terms})

    @property
    def max_degree(self):
        return max((s.length for s in self.terms), default=0)

    def homogeneous_part(self, j):
        return Potential(self.field, self.quiver,
                         {s: c for s, c in self.terms.items()
                          if s.length == j})

    def is_homogeneous(self, j=None):
        degs = self.degrees()
        if j is None:
            return len(degs) <= 1
        return degs in ([], [j])

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda sc: sc[0].sort_key())

    def __eq__(self, other):
        return (isinstance(other, Potential) and self.field == other.field
                and self.terms == other.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{self.field.scalar_str(c)} * {s!r}"
                          for s, c in self.sorted_terms())


def cyclic_symmetrize(w):
    """The rotation sum of a potential, as an element of kQ.

    A class of length j contributes exactly j path terms counted with
    multiplicity: a class with primitive part of length j/m yields j/m
    distinct rotations, each with coefficient m.
    """
    q = w.quiver
    f = w.field
    terms = {}
    for cl, c in w.terms.items():
        p = cl.rep
        for k in range(p.length):
            arrows = p.arrows[k:] + p.arrows[:k]
            rot = Path(arrows, q.source(arrows[0]), q.target(arrows[-1]))
            v = terms.get(rot)
            v = f.add(v, c) if v is not None else c
            if v:
                terms[rot] = v
            elif rot in terms:
                del terms[rot]
    return Element(f, q, terms)


def _derivative_of_class(q, cl, a):
    """d_a of a single class: sum of v.u over displayed rep = u a v.

    In storage order, removing position k of s and rotating gives
    (s[k+1:], s[:k]).
    """
    out = {}
    s = cl.rep.arrows
    n = len(s)
    for k in range(n):
        if s[k] != a:
            continue
        arrows = s[k + 1:] + s[:k]
        if arrows:
            res = Path(arrows, q.source(arrows[0]), q.target(arrows[-1]))
        else:
            res = Path((), q.target(a), q.target(a))
        out[res] = out.get(res, 0) + 1
    return out


def cyclic_derivative(w, a):
    """The cyclic derivative of a potential with respect to an arrow.

    The result is a combination of paths from target(a) to source(a); it
    equals the rotation sum with a stripped from either end.
    """
    q = w.quiver
    f = w.field
    terms = {}
    for cl, c in w.terms.items():
        for res, mult in _derivative_of_class(q, cl, a).items():
            add = f.mul(c, f.coerce(mult))
            v = terms.get(res)
            v = f.add(v, add) if v is not None else add
            if v:
                terms[res] = v
            elif res in terms:
                del terms[res]
    return Element(f, q, terms)


def primitive_decomposition(cl):
    """Write the class as (primitive cycle t, m) with the power m maximal."""
    s = cl.rep.arrows
    n = len(s)
    for ell in range(1, n + 1):
        if n % ell:
            continue
        tile = s[:ell]
        if tile * (n // ell) == s:
            rep = cl.rep
            tau = Path(tile, rep.source, rep.source)
            return tau, n // ell
    raise AssertionError("unreachable: every word has a period")


def cyclic_symmetrize_prime(cl_or_potential, quiver=None, field=None):
    """Power-aware rotation sum: on the class of t^m it sums the m-th
    powers of the rotations of t (j/m distinct terms, coefficient 1).

    Accepts a CycleClass (with quiver and field supplied) or a Potential
    (extended linearly).
    """
    if isinstance(cl_or_potential, Potential):
        w = cl_or_potential
        out = Element.zero(w.field, w.quiver)
        for cl, c in w.terms.items():
            out = out + _prime_of_class(w.quiver, w.field, cl).scale(c)
        return out
    if quiver is None or field is None:
        raise ValueError("quiver and field are required for a bare class")
    return _prime_of_class(quiver, field, cl_or_potential)


def _prime_of_class(q, f, cl):
    tau, m = primitive_decomposition(cl)
    terms = {}
    seen = set()
    s = tau.arrows
    for k in range(len(s)):
        arrows = s[k:] + s[:k]
        if arrows in seen:
            continue
        seen.add(arrows)
        tiled = arrows * m
        terms[Path(tiled, q.source(tiled[0]), q.target(tiled[-1]))] = f.one
    return Element(f, q, terms)


class TensorElement:
    """A finite linear combination of path pairs u (x) v."""

    __slots__ = ("field", "quiver", "terms")

    def __init__(self, field, quiver, terms=None):
        self.field = field
        self.quiver = quiver
        self.terms = {uv: c for uv, c in (terms or {}).items() if c}

    @classmethod
    def zero(cls, field, quiver):
        return cls(field, quiver, {})

    @property
    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        if self.field != other.field:
            raise ValueError("field mismatch")
        terms = dict(self.terms)
        f = self.field
        for uv, c in other.terms.items():
            v = terms.get(uv)
            v = f.add(v, c) if v is not None else c
            if v:
                terms[uv] = v
            elif uv in terms:
                del terms[uv]
        return TensorElement(self.field, self.quiver, terms)

    def __neg__(self):
        f = self.field
        return TensorElement(self.field, self.quiver,
                             {uv: f.neg(c) for uv, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = self.field.coerce(c)
        f = self.field
        return TensorElement(self.field, self.quiver,
                             {uv: f.mul(c, x) for uv, x in self.terms.items()}
                             if c else {})

    def sorted_terms(self):
        return sorted(self.terms.items(),
                      key=lambda t: (t[0][0].sort_key(), t[0][1].sort_key()))

    def __eq__(self, other):
        return (isinstance(other, TensorElement)
                and self.field == other.field and self.terms == other.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(
            f"{self.field.scalar_str(c)} * ({u!r}) (x) ({v!r})"
            for (u, v), c in self.sorted_terms())


def double_derivative(x, a):
    """dd_a on an element of kQ: sum of u (x) v over occurrences p = u a v.

    u is the part applied after a, v the part applied before; both may be
    trivial paths at the matching endpoint.
    """
    q = x.quiver
    f = x.field
    terms = {}
    for p, c in x.terms.items():
        s = p.arrows
        for k, arr in enumerate(s):
            if arr != a:
                continue
            ua = s[k + 1:]
            va = s[:k]
            u = (Path(ua, q.source(ua[0]), p.target) if ua
                 else Path((), p.target, p.target))
            v = (Path(va, p.source, q.target(va[-1])) if va
                 else Path((), p.source, p.source))
            key = (u, v)
            prev = terms.get(key)
            val = f.add(prev, c) if prev is not None else c
            if val:
                terms[key] = val
            elif key in terms:
                del terms[key]
    return TensorElement(f, q, terms)


def swap(t):
    """The flip u (x) v -> v (x) u; an involution."""
    return TensorElement(t.field, t.quiver,
                         {(v, u): c for (u, v), c in t.terms.items()})


def potential_dim(q, j):
    """dim Pot(Q)_j: the number of cycle classes of length j."""
    if j < 1:
        raise ValueError("potential degrees start at 1")
    classes = set()
    for v in q.vertices:
        for p in enumerate_paths(q, j, source=v, target=v):
            classes.add(class_of(q, p))
    return len(classes)


def cycle_classes(q, j):
    """All cycle classes of length j, in canonical order."""
    classes = set()
    for v in q.vertices:
        for p in enumerate_paths(q, j, source=v, target=v):
            classes.add(class_of(q, p))
    return sorted(classes)


def project_to_potential(x):
    """The image of a cycle-supported element under kQ -> Pot(Q).

    Terms that are not cycles are rejected: they vanish in the quotient
    only modulo commutators, which this toolkit does not model.
    """
    q = x.quiver
    pairs = []
    for p, c in x.terms.items():
        if p.source != p.target or p.length == 0:
            raise ValueError(f"term {p!r} is not a cycle of positive length")
        pairs.append((class_of(q, p), c))
    return Potential.from_classes(x.field, q, pairs)

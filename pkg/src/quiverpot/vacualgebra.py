"""Graded quotients of a path algebra by derivative relations.

Everything here is computed degree by degree in exact arithmetic: the
homogeneous ideal spans I_d, normal forms for the quotient algebra, the
canonical generators e . (rotation sum of W) of the intersection
(R (x) kQ1) meet (kQ1 (x) R), and the four-term complex of free bimodules

    A (x) G (x) A -> A (x) R (x) A -> A (x) kQ1 (x) A -> A (x) kQ0 (x) A -> A

whose exactness in every degree characterises the Calabi-Yau-3 property of
the quotient.  Truncated exactness is evidence, never a certificate, and
every report says so.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exactalg import RowReducer, Subspace
from .potentials import cyclic_derivative, cyclic_symmetrize
from .quiverpath import BimoduleSpan, Element, Path, compose


class RelationSet:
    """Homogeneous degree-N relations with uniform endpoints.

    When built from a potential the relations are indexed by arrows
    (relation of arrow a = cyclic derivative of the top part with respect
    to a) and the potential itself is kept for the maps that need it.
    """

    def __init__(self, quiver, field, degree, relations, by_arrow=None,
                 potential=None):
        if degree < 2:
            raise ValueError("relation degree must be at least 2")
        self.quiver = quiver
        self.field = field
        self.degree = degree
        self.relations = list(relations)
        self.by_arrow = dict(by_arrow) if by_arrow is not None else None
        self.potential = potential
        for r in self.relations:
            if not r.is_homogeneous(degree):
                raise ValueError("relation is not homogeneous of the stated degree")
            if len(r.endpoints()) > 1:
                raise ValueError("relation mixes endpoint pairs")
        self._span = None

    @classmethod
    def from_potential(cls, w):
        """Arrow-indexed relations of a homogeneous potential."""
        if w.is_zero or not w.is_homogeneous():
            raise ValueError("a homogeneous nonzero potential is required")
        top = w.max_degree
        if top < 3:
            raise ValueError("potential degree must be at least 3")
        by_arrow = {a: cyclic_derivative(w, a)
                    for a in w.quiver._sorted_arrows}
        return cls(w.quiver, w.field, top - 1,
                   [by_arrow[a] for a in w.quiver._sorted_arrows],
                   by_arrow=by_arrow, potential=w)

    @property
    def span(self):
        if self._span is None:
            self._span = BimoduleSpan(self.field, self.quiver, self.degree,
                                      [r for r in self.relations
                                       if not r.is_zero])
        return self._span

    @property
    def dim(self):
        return self.span.dim

    def arrow_order(self):
        return list(self.quiver._sorted_arrows)

    def reduce_to_span(self, x):
        """Residue of a homogeneous degree-N element modulo the span."""
        index = self.quiver.path_index(self.degree)
        red = self.span.reducer
        residue = red.reduce(x.as_vector(index))
        paths = self.quiver.paths_of_length(self.degree)
        return Element(self.field, self.quiver,
                       {paths[i]: c for i, c in residue.items()})

    def coordinates_in_relations(self, x):
        """Write x as a combination of the arrow-indexed relations.

        Requires the relations to be linearly independent; returns a dict
        arrow -> coefficient, or None when x is outside the span.
        """
        if self.by_arrow is None:
            raise ValueError("relations are not arrow-indexed")
        order = [a for a in self.arrow_order()
                 if not self.by_arrow[a].is_zero]
        if self.dim != len(order):
            raise ValueError("arrow-indexed relations are not independent")
        index = self.quiver.path_index(self.degree)
        ncols = len(self.quiver.paths_of_length(self.degree))
        red = RowReducer(self.field)
        tag = {}
        for k, a in enumerate(order):
            vec = self.by_arrow[a].as_vector(index)
            vec[ncols + k] = self.field.one
            red.add(vec)
            tag[ncols + k] = a
        residue = red.reduce(x.as_vector(index))
        if any(c < ncols for c in residue):
            return None
        coords = {a: self.field.zero for a in order}
        for c, v in residue.items():
            coords[tag[c]] = self.field.neg(v)
        return coords


def build_graded(quiver, rels, truncation):
    """Exact degreewise ideal spans and quotient dimensions up to a bound."""
    return TruncatedAlgebra(quiver, rels, truncation)


class TruncatedAlgebra:
    """The graded quotient kQ / (relations), truncated at a stated degree.

    Stores the reduced span of the ideal in every degree <= D, hence exact
    dimensions and a canonical normal-form projector per degree.
    """

    def __init__(self, quiver, rels, truncation):
        if truncation < rels.degree:
            raise ValueError("truncation below the relation degree")
        self.quiver = quiver
        self.field = rels.field
        self.relations = rels
        self.D = truncation
        n = rels.degree
        self._ideal = []
        self._nf_paths = []
        self._nf_index = []
        self._path_nf_cache = [dict() for _ in range(truncation + 1)]
        self.dims = []
        f = self.field
        for d in range(truncation + 1):
            paths = quiver.paths_of_length(d)
            index = quiver.path_index(d)
            red = RowReducer(f)
            if d == n:
                for r in rels.relations:
                    if not r.is_zero:
                        red.add(r.as_vector(index))
            elif d > n:
                prev_red = self._ideal[d - 1]
                prev_paths = quiver.paths_of_length(d - 1)
                rows = [[(prev_paths[i], c) for i, c in row.items()]
                        for row in prev_red.basis_rows()]
                for row in rows:
                    for a in quiver._sorted_arrows:
                        s_a, t_a = quiver.source(a), quiver.target(a)
                        left = {}
                        right = {}
                        for p, c in row:
                            if p.target == s_a:
                                left[index[Path(p.arrows + (a,), p.source,
                                                t_a)]] = c
                            if p.source == t_a:
                                right[index[Path((a,) + p.arrows, s_a,
                                                 p.target)]] = c
                        if left:
                            red.add(left)
                        if right:
                            red.add(right)
            self._ideal.append(red)
            pivots = set(red.rows)
            nf = [p for i, p in enumerate(paths) if i not in pivots]
            self._nf_paths.append(nf)
            self._nf_index.append({p: i for i, p in enumerate(nf)})
            self.dims.append(len(nf))

    def dim(self, d):
        return self.dims[d]

    def ideal_dim(self, d):
        return self._ideal[d].rank

    def ideal_reducer(self, d):
        return self._ideal[d]

    def nf_paths(self, d):
        return self._nf_paths[d]

    def nf_index(self, d):
        return self._nf_index[d]

    def reduce_path(self, p):
        """Normal form of a single path, as a dict path -> scalar."""
        d = p.length
        cache = self._path_nf_cache[d]
        hit = cache.get(p)
        if hit is None:
            index = self.quiver.path_index(d)
            paths = self.quiver.paths_of_length(d)
            residue = self._ideal[d].reduce({index[p]: self.field.one})
            hit = {paths[i]: c for i, c in residue.items()}
            cache[p] = hit
        return hit

    def reduce_terms(self, terms, d):
        """Normal form of a homogeneous path dict of degree d."""
        index = self.quiver.path_index(d)
        paths = self.quiver.paths_of_length(d)
        vec = {index[p]: c for p, c in terms.items() if c}
        residue = self._ideal[d].reduce(vec)
        return {paths[i]: c for i, c in residue.items()}

    def multiply(self, x, y):
        """Product of two reduced homogeneous path dicts, reduced again."""
        f = self.field
        out = {}
        for p, cp in x.items():
            for q, cq in y.items():
                pq = compose(p, q)
                if pq is None:
                    continue
                c = f.mul(cp, cq)
                for r, cr in self.reduce_path(pq).items():
                    v = out.get(r)
                    v = f.add(v, f.mul(c, cr)) if v is not None else f.mul(c, cr)
                    if v:
                        out[r] = v
                    elif r in out:
                        del out[r]
        return out

    def reduce_element(self, el):
        """Normal form of a homogeneous Element."""
        if el.is_zero:
            return {}
        degs = el.degrees()
        if len(degs) != 1:
            raise ValueError("graded reduction needs a homogeneous element")
        return self.reduce_terms(dict(el.terms), degs[0])


def vertex_cycle_sums(quiver, w):
    """The canonical per-vertex generators e . (rotation sum of W).

    Each value lies in both span{relation(a) . b} and span{a . relation(b)}
    inside kQ_{N+1}; together they generate the intersection of the two
    spans whenever the quotient is Calabi-Yau.  The two one-sided
    expressions are recomputed and compared, and linear independence of the
    nonzero values is reported.
    """
    if not w.is_homogeneous():
        raise ValueError("a homogeneous potential is required")
    f, q = w.field, w.quiver
    csum = cyclic_symmetrize(w)
    by_vertex = {}
    for v in sorted(q.vertices):
        value = csum.left_vertex_truncate(v)
        left = Element.zero(f, q)
        for a in q.arrows_into(v):
            left = left + Element.from_path(f, q, q.arrow_path(a)) * \
                cyclic_derivative(w, a)
        right = Element.zero(f, q)
        for b in q.arrows_from(v):
            right = right + cyclic_derivative(w, b) * \
                Element.from_path(f, q, q.arrow_path(b))
        if not (left == value and right == value):
            raise AssertionError(
                "two-sided identity for the vertex cycle sums failed")
        by_vertex[v] = value
    nonzero = [x for x in by_vertex.values() if not x.is_zero]
    injective = len(nonzero) == len(by_vertex)
    # distinct vertices have disjoint cycle supports, so independence is
    # exactly "all nonzero"
    return VertexCycleSums(by_vertex=by_vertex, injective=injective,
                           independent=injective)


@dataclass
class VertexCycleSums:
    by_vertex: dict
    injective: bool
    independent: bool


@dataclass
class IntersectionData:
    """The intersection span{r_a . b} meet span{a . r_c} in kQ_{N+1}.

    `rb_coords` / `ar_coords` give, for every basis element, its unique
    coordinates over the composable pairs (relation arrow, free arrow);
    they exist only when the arrow-indexed relations are independent and
    are what the deformation maps are applied through.
    """
    field: object
    quiver: object
    degree: int
    subspace: Subspace
    basis_elements: list
    rb_pairs: list
    ar_pairs: list
    rb_coords: list
    ar_coords: list
    coords_available: bool

    @property
    def dim(self):
        return self.subspace.dim


def relation_intersection(rels):
    """Intersection of span{r_a . b} and span{a . r_c} with dual coordinates."""
    q = rels.quiver
    f = rels.field
    n1 = rels.degree + 1
    paths = q.paths_of_length(n1)
    index = q.path_index(n1)
    ncols = len(paths)
    if rels.by_arrow is None:
        raise ValueError("relation_intersection needs arrow-indexed relations")
    order = [a for a in rels.arrow_order() if not rels.by_arrow[a].is_zero]

    def pair_rows(side):
        rows = []
        pairs = []
        for a in order:
            ra = rels.by_arrow[a]
            for b in q._sorted_arrows:
                if side == "rb":
                    if q.target(b) != q.target(a):
                        continue
                    prod = ra * Element.from_path(f, q, q.arrow_path(b))
                else:
                    if q.source(b) != q.source(a):
                        continue
                    prod = Element.from_path(f, q, q.arrow_path(b)) * ra
                if prod.is_zero:
                    continue
                rows.append(prod.as_vector(index))
                pairs.append((a, b))
        return rows, pairs

    rb_rows, rb_pairs = pair_rows("rb")
    ar_rows, ar_pairs = pair_rows("ar")

    # Zassenhaus over the sparse rows: [x|x] from the first span, [y|0]
    # from the second; reduced rows supported on the shifted copy span the
    # intersection.
    zred = RowReducer(f)
    for row in rb_rows:
        v = dict(row)
        for c, x in row.items():
            v[c + ncols] = x
        zred.add(v)
    for row in ar_rows:
        zred.add(dict(row))
    inter = RowReducer(f)
    for piv in zred.pivots():
        if piv >= ncols:
            inter.add({c - ncols: x for c, x in zred.rows[piv].items()})
    subspace = Subspace.from_reducer(f, ncols, inter)
    basis_elements = [
        Element(f, q, {paths[i]: c for i, c in row.items()})
        for row in inter.basis_rows()]

    coords_available = (rels.dim == len(order))
    rb_coords = ar_coords = None
    if coords_available:
        rb_coords = _express_in_pairs(f, ncols, rb_rows, rb_pairs,
                                      inter.basis_rows())
        ar_coords = _express_in_pairs(f, ncols, ar_rows, ar_pairs,
                                      inter.basis_rows())
    return IntersectionData(field=f, quiver=q, degree=n1, subspace=subspace,
                            basis_elements=basis_elements,
                            rb_pairs=rb_pairs, ar_pairs=ar_pairs,
                            rb_coords=rb_coords, ar_coords=ar_coords,
                            coords_available=coords_available)


def _express_in_pairs(f, ncols, rows, pairs, targets):
    """Coordinates of each target over the given independent rows.

    Rows are augmented with unit tags; the reduction of a target then
    leaves minus its coordinates on the tag columns.
    """
    red = RowReducer(f)
    tag_of = {}
    for k, row in enumerate(rows):
        v = dict(row)
        v[ncols + k] = f.one
        red.add(v)
        tag_of[ncols + k] = pairs[k]
    out = []
    for t in targets:
        residue = red.reduce(dict(t))
        if any(c < ncols for c in residue):
            raise AssertionError("intersection vector escaped its own span")
        coords = {}
        for c, x in residue.items():
            coords[tag_of[c]] = f.neg(x)
        out.append(coords)
    return out


class ComplexData:
    """Degreewise matrices of the four-term bimodule complex.

    Generator conventions: the kQ0 slot is indexed by vertices, the kQ1
    slot by arrows, the relation slot by arrows with nonzero relation, the
    top slot by vertices with nonzero cycle sum.  Columns are produced
    lazily; `check_composites` streams through every degree without
    storing matrices.
    """

    POSITIONS = ("mu", "d1", "d2", "d3")

    def __init__(self, algebra, w):
        rels = algebra.relations
        if rels.by_arrow is None:
            raise ValueError("the complex needs arrow-indexed relations")
        self.algebra = algebra
        self.quiver = algebra.quiver
        self.field = algebra.field
        self.w = w
        self.N = rels.degree
        if algebra.D < self.N + 1:
            raise ValueError("truncation too small: need degree N+1")
        self.max_degree = algebra.D
        self.sums = vertex_cycle_sums(self.quiver, w)
        self.r_gens = [a for a in rels.arrow_order()
                       if not rels.by_arrow[a].is_zero]
        self.t_gens = [v for v in sorted(self.quiver.vertices)
                       if not self.sums.by_vertex[v].is_zero]
        self._gen_data = {
            "E": [(v, 0, v, v) for v in sorted(self.quiver.vertices)],
            "V": [(a, 1, self.quiver.source(a), self.quiver.target(a))
                  for a in self.quiver._sorted_arrows],
            "R": [(a, self.N, self.quiver.target(a), self.quiver.source(a))
                  for a in self.r_gens],
            "T": [(v, self.N + 1, v, v) for v in self.t_gens],
        }
        self._basis_cache = {}
        self._delta2_cache = {}

    def basis(self, slot, d):
        """Basis tuples (left path, generator key, right path) at degree d."""
        key = (slot, d)
        hit = self._basis_cache.get(key)
        if hit is not None:
            return hit
        out = []
        alg = self.algebra
        for gen, gdeg, gsrc, gtgt in self._gen_data[slot]:
            for i in range(0, d - gdeg + 1):
                j = d - gdeg - i
                for p in alg.nf_paths(i):
                    if p.source != gtgt:
                        continue
                    for r in alg.nf_paths(j):
                        if r.target != gsrc:
                            continue
                        out.append((p, gen, r))
        index = {t: k for k, t in enumerate(out)}
        self._basis_cache[key] = (out, index)
        return (out, index)

    def slot_dim(self, slot, d):
        return len(self.basis(slot, d)[0])

    def _delta2_image_of_generator(self, a):
        """The image of 1 (x) relation(a) (x) 1, as triples of reduced dicts."""
        hit = self._delta2_cache.get(a)
        if hit is not None:
            return hit
        alg = self.algebra
        q = self.quiver
        f = self.field
        rel = self.algebra.relations.by_arrow[a]
        out = []
        for m, c in rel.terms.items():
            s = m.arrows
            for k, mid in enumerate(s):
                later = s[k + 1:]
                earlier = s[:k]
                lp = (Path(later, q.source(later[0]), m.target) if later
                      else Path((), m.target, m.target))
                ep = (Path(earlier, m.source, q.target(earlier[-1]))
                      if earlier else Path((), m.source, m.source))
                out.append((c, alg.reduce_path(lp), mid,
                            alg.reduce_path(ep)))
        self._delta2_cache[a] = out
        return out

    def column(self, position, d, key):
        """The image of one domain basis tuple, as a dict over codomain tuples."""
        alg = self.algebra
        q = self.quiver
        f = self.field
        p, gen, r = key
        out = {}

        def accumulate(c, lterms, mid_gen, rterms, cod_index):
            for lp, lc in lterms.items():
                clc = f.mul(c, lc)
                for rp, rc in rterms.items():
                    v = f.mul(clc, rc)
                    t = (lp, mid_gen, rp)
                    k2 = cod_index[t]
                    prev = out.get(k2)
                    nv = f.add(prev, v) if prev is not None else v
                    if nv:
                        out[k2] = nv
                    elif k2 in out:
                        del out[k2]

        if position == "mu":
            prod = alg.multiply({p: f.one}, {r: f.one})
            # codomain is A_d itself, indexed by nf paths
            idx = alg.nf_index(d)
            return {idx[t]: c for t, c in prod.items()}
        if position == "d1":
            cod_index = self.basis("E", d)[1]
            a = gen
            left = alg.multiply({p: f.one},
                                alg.reduce_path(q.arrow_path(a)))
            accumulate(f.one, left, q.source(a), {r: f.one}, cod_index)
            right = alg.multiply(alg.reduce_path(q.arrow_path(a)),
                                 {r: f.one})
            accumulate(f.neg(f.one), {p: f.one}, q.target(a), right,
                       cod_index)
            return out
        if position == "d2":
            cod_index = self.basis("V", d)[1]
            for c, lterms, mid, eterms in self._delta2_image_of_generator(gen):
                lprod = alg.multiply({p: f.one}, lterms)
                rprod = alg.multiply(eterms, {r: f.one})
                accumulate(c, lprod, mid, rprod, cod_index)
            return out
        if position == "d3":
            cod_index = self.basis("R", d)[1]
            e = gen
            one = f.one
            rgens = set(self.r_gens)
            for a in q.arrows_into(e):
                if a not in rgens:
                    continue
                left = alg.multiply({p: one},
                                    alg.reduce_path(q.arrow_path(a)))
                accumulate(one, left, a, {r: one}, cod_index)
            for b in q.arrows_from(e):
                if b not in rgens:
                    continue
                right = alg.multiply(alg.reduce_path(q.arrow_path(b)),
                                     {r: one})
                accumulate(f.neg(one), {p: one}, b, right, cod_index)
            return out
        raise ValueError(f"unknown position {position!r}")

    def domain_slot(self, position):
        return {"mu": "E", "d1": "V", "d2": "R", "d3": "T"}[position]

    def matrix_columns(self, position, d):
        """All columns of one map at one degree (list of sparse dicts)."""
        dom = self.basis(self.domain_slot(position), d)[0]
        return [self.column(position, d, key) for key in dom]

    def rank(self, position, d):
        red = RowReducer(self.field)
        for col in self.matrix_columns(position, d):
            red.add(col)
        return red.rank

    def check_composites(self, up_to=None):
        """Verify mu.d1 = d1.d2 = d2.d3 = 0 in every degree, streaming."""
        top = self.max_degree if up_to is None else min(up_to,
                                                        self.max_degree)
        f = self.field
        report = {}
        for d in range(top + 1):
            ok = []
            for outer, inner in (("mu", "d1"), ("d1", "d2"), ("d2", "d3")):
                dom = self.basis(self.domain_slot(inner), d)[0]
                mid_basis = self.basis(self.domain_slot(outer), d)[0]
                good = True
                for key in dom:
                    col = self.column(inner, d, key)
                    acc = {}
                    for k2, c in col.items():
                        img = self.column(outer, d, mid_basis[k2])
                        for k3, x in img.items():
                            v = acc.get(k3)
                            nv = f.add(v, f.mul(c, x)) if v is not None \
                                else f.mul(c, x)
                            if nv:
                                acc[k3] = nv
                            elif k3 in acc:
                                del acc[k3]
                    if acc:
                        good = False
                        break
                ok.append(good)
            report[d] = tuple(ok)
        return report


def build_complex(algebra, w):
    """The four-term complex over the graded quotient; composites verified."""
    return ComplexData(algebra, w)


@dataclass
class ExactnessReport:
    checked_degrees: list
    table: dict
    exact: bool
    first_failure: tuple
    note: str


def check_exactness(cx, bound):
    """Homology dimensions of the complex for internal degrees <= bound-(N+1).

    The window keeps the checked degrees well inside the truncation; the
    verdict is evidence up to that window, nothing more.
    """
    window = min(bound - (cx.N + 1), cx.max_degree)
    table = {}
    exact = True
    first_failure = None
    for d in range(max(window, -1) + 1):
        dims = {s: cx.slot_dim(s, d) for s in ("E", "V", "R", "T")}
        a_d = cx.algebra.dim(d)
        ranks = {pos: cx.rank(pos, d) for pos in ComplexData.POSITIONS}
        hom = {
            "augmentation": a_d - ranks["mu"],
            "vertices": dims["E"] - ranks["mu"] - ranks["d1"],
            "arrows": dims["V"] - ranks["d1"] - ranks["d2"],
            "relations": dims["R"] - ranks["d2"] - ranks["d3"],
            "top": dims["T"] - ranks["d3"],
        }
        table[d] = {"dims": dims, "algebra_dim": a_d, "ranks": ranks,
                    "homology": hom}
        for pos in ("augmentation", "vertices", "arrows", "relations",
                    "top"):
            if hom[pos]:
                exact = False
                if first_failure is None:
                    first_failure = (d, pos)
                break
    note = (f"exactness checked for internal degrees <= {window}; "
            "truncated evidence, not a certificate")
    return ExactnessReport(checked_degrees=sorted(table), table=table,
                           exact=exact, first_failure=first_failure,
                           note=note)


@dataclass
class CyVerdict:
    degree_bound: int
    relation_degree: int
    relations_independent: bool
    relation_dim: int
    arrow_count: int
    sums_injective: bool
    intersection_dim: int
    vertex_count: int
    intersection_matches: bool
    sums_span_intersection: bool
    composites_ok: bool
    exactness: ExactnessReport
    consistent: bool
    note: str


def cy_check(quiver, w, bound):
    """All truncated Calabi-Yau-3 indicators for a homogeneous potential.

    Checks, in order: the arrow-indexed relations are independent; the
    per-vertex cycle sums are nonzero (injectivity); the intersection of
    the one-sided spans has dimension #Q0 with the cycle sums as a basis;
    the complex has vanishing composites and is exact on the truncated
    window.  The overall verdict is "consistent with CY up to the bound",
    never an unconditional certificate.
    """
    if not w.is_homogeneous() or w.is_zero:
        raise ValueError("cy_check needs a nonzero homogeneous potential")
    rels = RelationSet.from_potential(w)
    n = rels.degree
    if bound < n + 1:
        raise ValueError("degree bound below relation degree + 1")
    n_arrows = len(quiver.arrow_ids)
    independent = rels.dim == n_arrows
    sums = vertex_cycle_sums(quiver, w)
    inter = relation_intersection(rels)
    n_vertices = len(quiver.vertices)
    matches = inter.dim == n_vertices
    spans = sums.independent and matches and all(
        inter.subspace.contains(
            [x.terms.get(p, rels.field.zero)
             for p in quiver.paths_of_length(n + 1)])
        for x in sums.by_vertex.values())
    depth = max(n + 1, bound - (n + 1))
    algebra = build_graded(quiver, rels, depth)
    cx = build_complex(algebra, w)
    composites = cx.check_composites()
    composites_ok = all(all(flags) for flags in composites.values())
    ex = check_exactness(cx, bound)
    consistent = (independent and sums.injective and matches and spans
                  and composites_ok and ex.exact)
    note = (f"consistent with CY of dimension 3 up to degree {bound}"
            if consistent else "not consistent with CY of dimension 3")
    return CyVerdict(
        degree_bound=bound, relation_degree=n,
        relations_independent=independent, relation_dim=rels.dim,
        arrow_count=n_arrows, sums_injective=sums.injective,
        intersection_dim=inter.dim, vertex_count=n_vertices,
        intersection_matches=matches, sums_span_intersection=spans,
        composites_ok=composites_ok, exactness=ex, consistent=consistent,
        note=note + "; truncated evidence, not a certificate")

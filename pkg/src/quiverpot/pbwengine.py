"""Filtered deformations of a graded derivative quotient.

A deformation replaces each degree-N relation r_a by r_a - phi(a) with
phi(a) of filtration degree at most N-1 and the same endpoints.  This
module evaluates the classical PBW conditions on the intersection
(R (x) kQ1) meet (kQ1 (x) R), the stronger per-vertex vanishing condition
that characterises deformations coming from a potential, the rotation
tables lambda that drive the reconstruction, the reconstruction itself,
and a one-sided dimension oracle for the PBW property.

Caveat carried by every report: the four classical conditions characterise
PBW deformations only when the base graded quotient is N-Koszul, which for
these algebras is guaranteed by the (truncated) Calabi-Yau checks; reports
record the CY status they were given rather than resolving it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exactalg import RowReducer
from .potentials import (Potential, class_of, cyclic_derivative,
                         distinct_rotations, primitive_decomposition)
from .quiverpath import Element, Path, compose
from .vacualgebra import (RelationSet, build_graded, relation_intersection,
                          vertex_cycle_sums)


class ReconstructionError(ValueError):
    """Reconstruction cannot proceed; `reason` is a stable machine tag."""

    def __init__(self, reason, message, witness=None):
        super().__init__(message)
        self.reason = reason
        self.witness = witness


class Deformation:
    """Deformation data keyed by arrow: phi(a) deforms the relation of a.

    phi(a) must lie in filtration degree <= N-1 and be a combination of
    paths from target(a) to source(a); missing arrows mean zero.
    """

    def __init__(self, base, phi):
        if base.by_arrow is None:
            raise ValueError("deformations need an arrow-indexed base")
        self.base = base
        self.quiver = base.quiver
        self.field = base.field
        self.N = base.degree
        q = self.quiver
        complete = {}
        for a in q._sorted_arrows:
            x = phi.get(a)
            if x is None:
                complete[a] = Element.zero(self.field, q)
                continue
            if x.field != self.field:
                raise ValueError("field mismatch in deformation data")
            if x.max_degree > self.N - 1:
                raise ValueError(
                    f"phi({a}) exceeds filtration degree {self.N - 1}")
            bad = x.endpoints() - {(q.target(a), q.source(a))}
            if bad:
                raise ValueError(
                    f"phi({a}) has terms not running from target({a}) "
                    f"to source({a})")
            complete[a] = x
        self.phi = complete

    def phi_of(self, a):
        return self.phi[a]

    def phi_component(self, a, j):
        """The degree-j part of phi(a) (j between 0 and N-1)."""
        return self.phi[a].graded_component(j)

    def deformed_relation(self, a):
        return self.base.by_arrow[a] - self.phi[a]

    def is_zero(self):
        return all(x.is_zero for x in self.phi.values())

    def __eq__(self, other):
        return (isinstance(other, Deformation) and self.base is other.base
                and self.phi == other.phi)


def deformation_from_potential(base, wprime):
    """The deformation defined by adding a lower-degree potential.

    phi(a) is minus the cyclic derivative of the added part, so the
    deformed relation equals the derivative of the full potential.
    """
    if wprime.max_degree > base.degree:
        raise ValueError(
            f"added potential has degree {wprime.max_degree} > {base.degree}")
    phi = {a: -cyclic_derivative(wprime, a)
           for a in base.quiver._sorted_arrows}
    return Deformation(base, phi)


def _apply_phi_pairs(d, coords, j, side):
    """phi_j applied through one tensor factor, via pair coordinates.

    side "rb": sum c * phi_j(a) . b over pairs (a, b);
    side "ar": sum c * b . phi_j(a).
    """
    f, q = d.field, d.quiver
    out = Element.zero(f, q)
    for (a, b), c in coords.items():
        comp = d.phi_component(a, j)
        if comp.is_zero:
            continue
        arrow = Element.from_path(f, q, q.arrow_path(b))
        prod = comp * arrow if side == "rb" else arrow * comp
        out = out + prod.scale(c)
    return out


@dataclass
class ConditionResult:
    holds: bool
    witness: object
    note: str = ""


@dataclass
class PBWReport:
    pbw1: ConditionResult
    pbw2: ConditionResult
    pbw3: dict
    pbw4: ConditionResult
    pbw2prime: ConditionResult
    overall: bool
    base_cy: object
    caveat: str


def check_pbw2prime(d):
    """Per-vertex residues of the potential-derived condition.

    residue(e) = sum over arrows b out of e of phi_{N-1}(b).b minus the sum
    over arrows a into e of a.phi_{N-1}(a); all residues vanish exactly
    when the top deformation layer matches some potential layer.
    """
    f, q, n = d.field, d.quiver, d.N
    out = {}
    for e in sorted(q.vertices):
        acc = Element.zero(f, q)
        for b in q.arrows_from(e):
            comp = d.phi_component(b, n - 1)
            if not comp.is_zero:
                acc = acc + comp * Element.from_path(f, q, q.arrow_path(b))
        for a in q.arrows_into(e):
            comp = d.phi_component(a, n - 1)
            if not comp.is_zero:
                acc = acc - Element.from_path(f, q, q.arrow_path(a)) * comp
        out[e] = acc
    return out


def check_conditions(d, base_cy=None):
    """Evaluate the four classical PBW conditions and the per-vertex one.

    Conditions 2-4 are evaluated on a basis of the intersection through its
    dual pair coordinates; condition 1 reduces to independence of the
    arrow-indexed relations, which the construction enforces unless some
    relations vanish or collide.  When condition 2 fails, conditions 3 and
    4 are not evaluable (applying phi needs membership in the relation
    span) and are reported as failed with a note.
    """
    base = d.base
    f = d.field
    n = d.N
    inter = relation_intersection(base)
    if not inter.coords_available:
        raise ValueError("PBW conditions need independent arrow-indexed "
                         "relations")

    # condition 1: the deformed relations meet the lower filtration in 0;
    # with independent top parts the only combination with zero top is 0.
    pbw1 = ConditionResult(True, None,
                           "independent relation tops force it")

    residues = []
    rel_coords = []
    pbw2_holds, pbw2_witness = True, None
    for k in range(len(inter.basis_elements)):
        top = (_apply_phi_pairs(d, inter.rb_coords[k], n - 1, "rb")
               - _apply_phi_pairs(d, inter.ar_coords[k], n - 1, "ar"))
        residues.append(top)
        left = base.reduce_to_span(top.graded_component(n)) if not \
            top.is_zero else Element.zero(f, d.quiver)
        if not left.is_zero:
            pbw2_holds = False
            if pbw2_witness is None:
                pbw2_witness = left
            rel_coords.append(None)
        else:
            rel_coords.append(base.coordinates_in_relations(
                top.graded_component(n)))
    pbw2 = ConditionResult(pbw2_holds, pbw2_witness)

    pbw3 = {}
    pbw4_holds, pbw4_witness = True, None
    evaluable = pbw2_holds
    for j in range(1, n):
        holds, witness = True, None
        if not evaluable:
            pbw3[j] = ConditionResult(False, None,
                                      "not evaluable: condition 2 failed")
            continue
        for k in range(len(inter.basis_elements)):
            coords = rel_coords[k]
            term1 = Element.zero(f, d.quiver)
            for a, c in coords.items():
                if c:
                    term1 = term1 + d.phi_component(a, j).scale(c)
            term2 = (_apply_phi_pairs(d, inter.rb_coords[k], j - 1, "rb")
                     - _apply_phi_pairs(d, inter.ar_coords[k], j - 1, "ar"))
            total = term1 + term2
            if not total.is_zero:
                holds = False
                if witness is None:
                    witness = total
                break
        pbw3[j] = ConditionResult(holds, witness)
    if not evaluable:
        pbw4 = ConditionResult(False, None,
                               "not evaluable: condition 2 failed")
    else:
        for k in range(len(inter.basis_elements)):
            coords = rel_coords[k]
            acc = Element.zero(f, d.quiver)
            for a, c in coords.items():
                if c:
                    acc = acc + d.phi_component(a, 0).scale(c)
            if not acc.is_zero:
                pbw4_holds = False
                if pbw4_witness is None:
                    pbw4_witness = acc
                break
        pbw4 = ConditionResult(pbw4_holds, pbw4_witness)

    prime_residues = check_pbw2prime(d)
    prime_holds = all(x.is_zero for x in prime_residues.values())
    prime_witness = None
    if not prime_holds:
        prime_witness = next(x for x in prime_residues.values()
                             if not x.is_zero)
    pbw2prime = ConditionResult(prime_holds, prime_witness)

    overall = (pbw1.holds and pbw2.holds
               and all(c.holds for c in pbw3.values()) and pbw4.holds)
    caveat = ("conditions 1-4 characterise PBW deformations only for an "
              "N-Koszul base; base CY status: "
              + ("not checked" if base_cy is None else str(base_cy)))
    return PBWReport(pbw1=pbw1, pbw2=pbw2, pbw3=pbw3, pbw4=pbw4,
                     pbw2prime=pbw2prime, overall=overall, base_cy=base_cy,
                     caveat=caveat)


@dataclass
class LambdaTable:
    j: int
    entries: dict
    consistent: bool = True


@dataclass
class LambdaInconsistency:
    j: int
    cycle: object
    first: tuple
    second: tuple
    consistent: bool = False


def lambda_table(d, j):
    """The rotation-invariant coefficient table at layer j.

    phi_{j-1}(a) = sum of lambda[a, q] q over paths q of length j-1; the
    coefficient may only depend on the rotation class of the cycle a.q.
    Returns the class table, or the first violated rotation pair.
    """
    if not 1 <= j <= d.N:
        raise ValueError("lambda tables exist for 1 <= j <= N")
    f, q = d.field, d.quiver
    lam = {}
    for a in q._sorted_arrows:
        comp = d.phi_component(a, j - 1)
        for path, c in comp.terms.items():
            lam[(a, path)] = c
    entries = {}
    seen = set()
    for (a, path), c in lam.items():
        cyc = compose(q.arrow_path(a), path)
        cl = class_of(q, cyc)
        if cl in seen:
            continue
        seen.add(cl)
        value = None
        first = None
        for rot in distinct_rotations(q, cl):
            a2 = rot.arrows[-1]
            rest = rot.arrows[:-1]
            if rest:
                q2 = Path(rest, rot.source, q.source(a2))
            else:
                q2 = Path((), rot.source, rot.source)
            c2 = lam.get((a2, q2), f.zero)
            if value is None:
                value = c2
                first = (a2, q2, c2)
            elif c2 != value:
                return LambdaInconsistency(j=j, cycle=cl, first=first,
                                           second=(a2, q2, c2))
        if value:
            entries[cl] = value
    return LambdaTable(j=j, entries=entries)


def reconstruct_potential(d):
    """The unique lower potential matching the deformation, or an error.

    Wants: the per-vertex residues vanish; the characteristic does not
    divide N factorial; every rotation table is consistent.  The class of
    t^m receives coefficient -lambda/m, and the result is round-tripped
    through deformation_from_potential before it is returned.
    """
    f = d.field
    n = d.N
    if f.char and math.factorial(n) % f.char == 0:
        raise ReconstructionError(
            "characteristic",
            f"characteristic {f.char} divides N! = {n}!; "
            "division by the layer degrees is impossible")
    residues = check_pbw2prime(d)
    for v, x in residues.items():
        if not x.is_zero:
            raise ReconstructionError(
                "pbw2prime",
                f"per-vertex residue at {v} is nonzero; the deformation "
                "does not come from a potential", witness=x)
    total = Potential.zero(f, d.quiver)
    for j in range(1, n + 1):
        table = lambda_table(d, j)
        if not table.consistent:
            raise ReconstructionError(
                "lambda",
                f"rotation table at layer {j} is inconsistent on "
                f"{table.cycle!r}", witness=table)
        pairs = []
        for cl, lam in table.entries.items():
            _, m = primitive_decomposition(cl)
            pairs.append((cl, f.neg(f.div(lam, f.coerce(m)))))
        total = total + Potential.from_classes(f, d.quiver, pairs)
    back = deformation_from_potential(d.base, total)
    if back.phi != d.phi:
        raise ReconstructionError(
            "roundtrip",
            "internal error: reconstructed potential does not reproduce "
            "the deformation", witness=total)
    return total


@dataclass
class OracleVerdict:
    bound: int
    slack: int
    rows: list
    violation_degree: object
    verdict: str

    @property
    def certified_violation(self):
        return self.violation_degree is not None


def gr_oracle(d, bound, slack=None):
    """One-sided dimension test of the PBW property.

    For each degree up to the bound, spans the deformed relations with
    cofactors of total degree <= degree + slack and compares the resulting
    upper bound for the filtered dimension against the cumulative graded
    dimensions.  A drop below the graded count certifies a PBW violation
    (the true ideal only grows with more cofactors); agreement is evidence
    only, reported as such.
    """
    base = d.base
    n = d.N
    if slack is None:
        slack = n
    if bound < n or slack < 0:
        raise ValueError("need bound >= N and slack >= 0")
    q, f = d.quiver, d.field
    algebra = build_graded(q, base, bound)
    graded_cum = []
    acc = 0
    for deg in range(bound + 1):
        acc += algebra.dim(deg)
        graded_cum.append(acc)

    e_max = bound + slack
    offsets = [0]
    for deg in range(e_max + 1):
        offsets.append(offsets[-1] + len(q.paths_of_length(deg)))

    def flat(path):
        return offsets[path.length] + q.path_index(path.length)[path]

    deformed = {a: d.deformed_relation(a) for a in q._sorted_arrows
                if not d.deformed_relation(a).is_zero}

    # generator rows grouped by total cofactor degree |u| + |v|
    by_extra = {}
    for a, rel in deformed.items():
        sa, ta = q.source(a), q.target(a)
        for iu in range(0, e_max - n + 1):
            us = [u for u in q.paths_of_length(iu) if u.source == sa]
            if not us:
                continue
            for iv in range(0, e_max - n - iu + 1):
                vs = [v for v in q.paths_of_length(iv) if v.target == ta]
                if not vs:
                    continue
                by_extra.setdefault(iu + iv, []).append((rel, us, vs))

    red = RowReducer(f)
    added_extra = -1
    rows = []
    violation_degree = None
    for deg in range(n, bound + 1):
        target_extra = deg + slack - n
        while added_extra < target_extra:
            added_extra += 1
            for rel, us, vs in by_extra.get(added_extra, ()):
                for u in us:
                    if u.length > added_extra:
                        continue
                    for v in vs:
                        if u.length + v.length != added_extra:
                            continue
                        row = {}
                        for p, c in rel.terms.items():
                            w = compose(u, compose(p, v))
                            row[flat(w)] = c
                        red.add(row)
        # dim(J meet F^deg) = rank J - rank of the projection beyond F^deg
        cut = offsets[deg + 1]
        proj = RowReducer(f)
        for r in red.rows.values():
            tail = {c: x for c, x in r.items() if c >= cut}
            if tail:
                proj.add(tail)
        meet = red.rank - proj.rank
        upper = offsets[deg + 1] - meet
        ok = upper >= graded_cum[deg]
        rows.append({"degree": deg, "upper_bound": upper,
                     "graded_cumulative": graded_cum[deg],
                     "violation": not ok})
        if not ok and violation_degree is None:
            violation_degree = deg
    if violation_degree is not None:
        verdict = f"PBW-violation certified at degree {violation_degree}"
    else:
        verdict = (f"consistent up to degree {bound} at slack {slack} "
                   "(one-sided evidence, not a proof of PBW)")
    return OracleVerdict(bound=bound, slack=slack, rows=rows,
                         violation_degree=violation_degree, verdict=verdict)


@dataclass
class FilteredComplexReport:
    slack: int
    mu_d1_zero: bool
    d1_d2_zero: bool
    d2_d3_zero: bool
    note: str

    @property
    def all_zero(self):
        return self.mu_d1_zero and self.d1_d2_zero and self.d2_d3_zero


def filtered_composite_check(d, slack=None):
    """Composite vanishing for the filtered complex, in a truncated quotient.

    Works in F^{N+1} modulo the bounded span of the deformed relations
    (cofactors up to N+1+slack) and checks the three composite maps vanish
    on the canonical generators.  A failure indicates the slack was too
    small to see the ideal, not a mathematical surprise; the graded story
    is covered by the exactness checker.
    """
    n = d.N
    if slack is None:
        slack = n
    q, f = d.quiver, d.field
    e_max = n + 1 + slack
    offsets = [0]
    for deg in range(e_max + 1):
        offsets.append(offsets[-1] + len(q.paths_of_length(deg)))

    def flat(path):
        return offsets[path.length] + q.path_index(path.length)[path]

    red = RowReducer(f)
    for a in q._sorted_arrows:
        rel = d.deformed_relation(a)
        if rel.is_zero:
            continue
        sa, ta = q.source(a), q.target(a)
        for iu in range(0, e_max - n + 1):
            for u in q.paths_of_length(iu):
                if u.source != sa:
                    continue
                for iv in range(0, e_max - n - iu + 1):
                    for v in q.paths_of_length(iv):
                        if v.target != ta:
                            continue
                        row = {}
                        for p, c in rel.terms.items():
                            row[flat(compose(u, compose(p, v)))] = c
                        red.add(row)

    def nf(element):
        """J-reduced coordinates of an element of F^{e_max}."""
        vec = {flat(p): c for p, c in element.terms.items()}
        return red.reduce(vec)

    def nf_element(element):
        out = {}
        for col, c in nf(element).items():
            deg = 0
            while offsets[deg + 1] <= col:
                deg += 1
            out[q.paths_of_length(deg)[col - offsets[deg]]] = c
        return Element(f, q, out)

    def tensor_is_zero(terms):
        """terms: list of (coeff, left Element, mid key, right Element)."""
        acc = {}
        for c, left, mid, right in terms:
            lred = nf(left)
            rred = nf(right)
            if not lred or not rred:
                continue
            for lc_col, lc in lred.items():
                for rc_col, rc in rred.items():
                    key = (lc_col, mid, rc_col)
                    v = acc.get(key, f.zero)
                    v = f.add(v, f.mul(c, f.mul(lc, rc)))
                    if v:
                        acc[key] = v
                    elif key in acc:
                        del acc[key]
        return not acc

    # mu . d1 on u (x) a (x) w for single-arrow cofactors: reduction must
    # commute with multiplication at these degrees
    mu_d1 = True
    for a in q._sorted_arrows:
        ae = Element.from_path(f, q, q.arrow_path(a))
        for u in q.arrows_into(q.target(a)):
            ue = Element.from_path(f, q, q.arrow_path(u))
            for w in q.arrows_from(q.source(a)):
                we = Element.from_path(f, q, q.arrow_path(w))
                lhs = nf_element(ue * ae) * we
                rhs = ue * nf_element(ae * we)
                if max(lhs.max_degree, rhs.max_degree) > e_max:
                    # reduced representatives grew past the truncation;
                    # nothing to conclude at this slack
                    continue
                if nf(lhs) != nf(rhs):
                    mu_d1 = False

    # d1 . d2 on 1 (x) deformed relation (x) 1
    d1_d2 = True
    for a in q._sorted_arrows:
        rel = d.deformed_relation(a)
        if rel.is_zero:
            continue
        terms = []
        for c, le, mid, ee in _deconcatenation(f, q, rel):
            mid_arrow = Element.from_path(f, q, q.arrow_path(mid))
            terms.append((c, le * mid_arrow, q.source(mid), ee))
            terms.append((f.neg(c), le, q.target(mid), mid_arrow * ee))
        if not tensor_is_zero(terms):
            d1_d2 = False

    # d2 . d3 on 1 (x) deformed vertex sum (x) 1
    d2_d3 = True
    for e in sorted(q.vertices):
        terms = []
        for a in q.arrows_into(e):
            rel = d.deformed_relation(a)
            if rel.is_zero:
                continue
            ae = Element.from_path(f, q, q.arrow_path(a))
            for c, le, mid, ee in _deconcatenation(f, q, rel):
                terms.append((c, ae * le, mid, ee))
        for b in q.arrows_from(e):
            rel = d.deformed_relation(b)
            if rel.is_zero:
                continue
            be = Element.from_path(f, q, q.arrow_path(b))
            for c, le, mid, ee in _deconcatenation(f, q, rel):
                terms.append((f.neg(c), le, mid, ee * be))
        if not tensor_is_zero(terms):
            d2_d3 = False

    note = (f"composites evaluated in F^{n + 1} modulo the bounded "
            f"deformed span at slack {slack}")
    return FilteredComplexReport(slack=slack, mu_d1_zero=mu_d1,
                                 d1_d2_zero=d1_d2, d2_d3_zero=d2_d3,
                                 note=note)


def _deconcatenation(f, q, rel):
    """Triples (coeff, later part, middle arrow, earlier part) of a relation."""
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
            out.append((c, Element.from_path(f, q, lp), mid,
                        Element.from_path(f, q, ep)))
    return out

"""Counting integral forms: intersect a group's branch with the subfield
tree inside the twisted form and count vertices.

For an absolutely irreducible representation the count over E is the number
of vertices of the E-subtree whose maximal orders contain the group image.
Everything runs in an ambient model field large enough to split the algebra
and host the trivialization; windows grow adaptively until the branch sits
strictly inside.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .errors import (FieldTooSmall, NotAbsolutelyIrreducible,
                     WindowInsufficient, WindowTooLarge)
from .padic import LocalField, make_field
from .bttree import Vertex, Window, vertex_cap
from .branch import branch_member
from .quatalg import (HAMILTON, QuaternionAlgebra, find_trivialization,
                      maxorder_generators, q8_trivialization, standard_groups)
from .twisted import (TwistedTree, standard_cocycle, subfield_vertex_test)


@dataclass
class IFReport:
    group: str
    subfield_args: tuple
    ambient_args: tuple
    e: int
    f: int
    count: int
    vertices: list
    vertex_ids: list = dc_field(default_factory=list)

    def __post_init__(self):
        if not self.vertex_ids:
            self.vertex_ids = [v.key() for v in self.vertices]
        assert self.count == len(self.vertices)


class CountingContext:
    """Ambient field, trivialization, cocycle-twisted tree, and the matrix
    images of the group generators."""

    def __init__(self, group_name: str, ambient: LocalField, triv, gens):
        self.group = group_name
        self.ambient = ambient
        self.triv = triv
        self.gen_quats = list(gens)
        self.images = [triv.image(g) for g in gens]
        self.tree = TwistedTree(
            ambient, standard_cocycle(ambient, triv.flip_d,
                                      triv.cocycle_witness
                                      if hasattr(triv, "cocycle_witness")
                                      else triv.I))
        self._check_irreducible()

    def _check_irreducible(self):
        """The generated algebra must be all of the 2x2 matrices."""
        one = self.ambient.one
        zero = self.ambient.zero
        from .bttree import MoebiusMap
        elems = [MoebiusMap(one, zero, zero, one)] + list(self.images)
        rank = _rank4(self.ambient, [[m.a, m.b, m.c, m.d] for m in elems])
        while rank < 4:
            new_elems = [x * y for x in elems for y in self.images]
            cand = elems + new_elems
            new_rank = _rank4(self.ambient, [[m.a, m.b, m.c, m.d] for m in cand])
            if new_rank == rank:
                break
            elems, rank = cand, new_rank
        if rank < 4:
            raise NotAbsolutelyIrreducible(
                f"generated algebra has rank {rank} < 4")


def _rank4(field, vecs):
    work = [list(v) for v in vecs]
    rank = 0
    for col in range(4):
        piv = None
        for r in range(rank, len(work)):
            if not work[r][col].is_zero():
                piv = r
                break
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        inv = work[rank][col].inv()
        work[rank] = [x * inv for x in work[rank]]
        for r in range(len(work)):
            if r != rank and not work[r][col].is_zero():
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[rank])]
        rank += 1
        if rank == 4:
            break
    return rank


_TRIV_EXTENSIONS = [-3, -1, 2, -2, 3, 6, -6]


def _ambient_for(alg: QuaternionAlgebra, p: int, e_args: tuple):
    """A model containing E and admitting a trivialization of the algebra."""
    candidates = [tuple(e_args)]
    for extra in _TRIV_EXTENSIONS:
        candidates.append(tuple(e_args) + (extra,))
    last_err = None
    for args in candidates:
        try:
            amb = make_field(p, args)
        except Exception as exc:
            last_err = exc
            continue
        try:
            if alg == HAMILTON and p == 2:
                return amb, q8_trivialization(amb)
            return amb, find_trivialization(alg, amb)
        except (FieldTooSmall, ValueError) as exc:
            last_err = exc
    raise FieldTooSmall(
        f"no trivialization of {alg} over extensions of Q_{p}{e_args}: {last_err}")


def make_context(group: str, p: int, e_args: tuple,
                 maxorder_params=None) -> CountingContext:
    e_args = tuple(e_args)
    if group == "maxorder":
        pi, delta = maxorder_params if maxorder_params else (p, _unram_unit(p))
        alg, gens = maxorder_generators(pi, delta)
    else:
        alg, gens = standard_groups()[group]
    ambient, triv = _ambient_for(alg, p, e_args)
    return CountingContext(group, ambient, triv, gens)


def _unram_unit(p: int) -> int:
    """A small squarefree integer generating the unramified quadratic."""
    from .padic import quad_ext_type
    for d in (-3, -1, 2, -2, 3, 5, -5, 6, -6, 7):
        if quad_ext_type(d, p) == "unramified":
            return d
    raise AssertionError("no unramified unit found")


def _subfield_of(ambient: LocalField, e_args: tuple):
    """The registered subfield for the given generators."""
    return ambient.find_subfield(tuple(e_args))


def count_integral_forms(ctx: CountingContext, e_args: tuple,
                         initial_radius=Fraction(3, 4)) -> IFReport:
    """Count the group's integral forms over the subfield given by e_args.

    The window starts at the given radius around the standard center and
    doubles (up to the vertex cap) until the branch is strictly inside.
    """
    amb = ctx.ambient
    e_args = tuple(e_args)
    span_args = {amb.span_class[m][0] for m in range(1, amb.degree)}
    from .padic import squarefree_part
    wanted = {squarefree_part(int(d))[0] for d in e_args}
    if wanted and not wanted.issubset(span_args):
        raise ValueError(f"{e_args} does not embed in the ambient {amb}")
    whole = wanted and _span_of(amb, wanted) == span_args
    sub = None if whole else _subfield_of(amb, e_args)
    center_level = Fraction(-1, 2) if amb.e % 2 == 0 else Fraction(0)
    center = Vertex(amb.zero, center_level)
    radius = Fraction(initial_radius)
    cap = vertex_cap()
    while True:
        try:
            win = Window(center, radius, cap)
        except WindowTooLarge as exc:
            raise WindowInsufficient(str(exc))
        d_max = max(win.distances)
        picked = [(v, d) for v, d in zip(win.vertices, win.distances)
                  if all(branch_member(m, v) for m in ctx.images)]
        members = [v for v, _ in picked]
        if members and d_max > 0 and max(d for _, d in picked) < d_max:
            break
        if len(win) >= cap:
            raise WindowInsufficient(
                f"branch not strictly inside any window up to cap {cap}")
        radius *= 2
    if sub is None:
        vertices = [v for v in members
                    if (v.level * amb.e).denominator == 1]
        e_s, f_s = amb.e, amb.f
    else:
        vertices = [v for v in members
                    if subfield_vertex_test(ctx.tree, ctx.triv, v, sub)]
        e_s, f_s = sub.field.e, sub.field.f
    return IFReport(ctx.group, e_args, amb.sqrt_args, e_s, f_s,
                    len(vertices), vertices)


def _span_of(field: LocalField, gens):
    span = {1}
    from .padic import squarefree_part
    for d in gens:
        span = span | {squarefree_part(d * x)[0] for x in span}
    return span - {1}


def maximal_order_forms(p: int, e_args: tuple, pi=None, delta=None) -> IFReport:
    """Conjugacy classes of integral representations of the maximal order of
    the division algebra (pi, delta) over the field given by e_args."""
    params = (pi if pi is not None else p,
              delta if delta is not None else _unram_unit(p))
    ctx = make_context("maxorder", p, e_args, maxorder_params=params)
    return count_integral_forms(ctx, e_args)


def hurwitz_counts(p: int, e_args: tuple) -> IFReport:
    ctx = make_context("hurwitz", p, e_args)
    return count_integral_forms(ctx, e_args)


def dicyclic_counts(p: int, e_args: tuple) -> IFReport:
    ctx = make_context("dicyclic", p, e_args)
    return count_integral_forms(ctx, e_args)


def q8_counts(p: int, e_args: tuple) -> IFReport:
    ctx = make_context("q8", p, e_args)
    return count_integral_forms(ctx, e_args)


# ---------------------------------------------------------------------------
# the 14-subfield table over the full dyadic tower


OMEGA_ARGS = (-1, -3, 2)
SYMBOL_A = (2, -2, 6, -6)
SYMBOL_B = (3, -1)


def table1() -> dict:
    """Counts of dyadic integral forms of Q8 over every proper subfield of
    the full tower, with per-vertex fields of definition and the singleton
    cross-intersections between ramified-pair classes."""
    ctx = make_context("q8", 2, OMEGA_ARGS)
    amb = ctx.ambient
    center = Vertex(amb.zero, Fraction(-1, 2))
    win = Window(center, Fraction(3, 4))
    members = [v for v in win
               if all(branch_member(m, v) for m in ctx.images)]
    assert len(members) == 26, f"expected the 26-element branch, got {len(members)}"
    subs = [s for s in amb.subfields() if s.field.degree > 1]
    defined_over = {i: [] for i in range(len(members))}
    rows = []
    for s in subs:
        hit = []
        for i, v in enumerate(members):
            if subfield_vertex_test(ctx.tree, ctx.triv, v, s):
                hit.append(i)
                defined_over[i].append(s.field.sqrt_args)
        rows.append({
            "field": s.field.sqrt_args,
            "e": s.field.e,
            "f": s.field.f,
            "count": len(hit),
            "vertex_ids": sorted(str(members[i].key()) for i in hit),
            "members": hit,
        })
    cross = {}
    for a in SYMBOL_A:
        for b in SYMBOL_B:
            sa = next(r["members"] for r in rows if r["field"] == (a,))
            sb = next(r["members"] for r in rows if r["field"] == (b,))
            cross[(a, b)] = len(set(sa) & set(sb))
    quad_counts = sorted(r["count"] for r in rows if len(r["field"]) == 1)
    quart_counts = sorted(r["count"] for r in rows if len(r["field"]) == 2)
    return {
        "group": "q8",
        "base_field": f"Q_2",
        "ambient": amb.sqrt_args,
        "total": len(members),
        "rows": rows,
        "cross_table": cross,
        "defined_over": defined_over,
        "summary": {
            "quadratic_counts": quad_counts,
            "quartic_counts": quart_counts,
        },
    }

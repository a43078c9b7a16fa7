"""Exhaustive pruned tree search for stable patterns and signed-patterns.

Partitions are grown depth-first, one whole class at a time; the class added
at each node is the one containing the smallest uncovered index, which makes
the generation canonical and duplicate-free.  Candidate classes come either
from the divisor-stratified coset structure (every class of a stable subject
has that shape) or from all subsets.  Sound prunes:

* class-count: the number of Fourier equivalence classes of the partial
  collection only grows, and must end equal to the number of colors;
* unit-multiplication: for any unit a the image aE of a chosen class must be
  a chosen class (up to the plus/minus swap) or still fully uncovered;
* convenience (product searches only): every convolution monomial of the
  chosen spanning vectors must be constant, respecting signs, on each chosen
  class -- decided exactly through the meet of the Fourier value partitions;
* product searches over unsigned patterns additionally force {0} to be a
  singleton class and the class containing 1 to be a subgroup H of the units
  together with H-invariant coset pieces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from .cyclotomic import divisors
from .patterns import (
    AllEqualPattern,
    GenericallySingular,
    Pattern,
    PatternError,
    SignedPattern,
    StabilityClass,
    StabilityReport,
    classify,
    mask_of,
    parse_bracket,
    stratum_components,
    subset_hat,
    subgroups_of_units,
    _sign_normalize,
    _tuple_neg,
    _zero_coord,
)


class BudgetExhausted(RuntimeError):
    """Raised internally when the node budget runs out."""


def _vals_add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return tuple(tuple(x + y for x, y in zip(ta, tb)) for ta, tb in zip(a, b))


def _vals_sub(a, b):
    if b is None:
        return a
    return tuple(tuple(x - y for x, y in zip(ta, tb)) for ta, tb in zip(a, b))


@dataclass
class SearchConfig:
    q: int
    signed: bool = False
    mode: str = "product"  # "product" | "inverse"
    atom_source: str = "admissible"  # "admissible" | "all"
    max_nodes: int = 200_000_000
    # "full": every sound prune; "counts": class-count monotonicity only;
    # "none": bare canonical generation (the no-pruning validation oracle).
    prunes: str = "full"

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("q must be >= 2")
        if self.mode not in ("product", "inverse"):
            raise ValueError(f"bad mode {self.mode!r}")
        if self.atom_source not in ("admissible", "all"):
            raise ValueError(f"bad atom source {self.atom_source!r}")
        if self.max_nodes <= 0:
            raise ValueError("max_nodes must be positive")
        if self.prunes not in ("full", "counts", "none"):
            raise ValueError(f"bad prune level {self.prunes!r}")


@dataclass
class EnumerationResult:
    config: SearchConfig
    stable: list[StabilityReport]
    counts: dict[str, int]
    nodes_visited: int
    atoms_tested: int
    complete: bool

    def brackets(self) -> list[str]:
        return [rep.subject.bracket() for rep in self.stable]


def _mask_elems(mask: int) -> list[int]:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return out


class _Search:
    def __init__(self, cfg: SearchConfig):
        self.cfg = cfg
        q = cfg.q
        self.q = q
        self.full_prunes = cfg.prunes == "full"
        self.count_prunes = cfg.prunes in ("full", "counts")
        self.full = (1 << q) - 1
        self.zero = _zero_coord(q)
        self.units = [a for a in range(2, q) if gcd(a, q) == 1]
        self.bit_img = {
            a: [1 << ((a * k) % q) for k in range(q)] for a in self.units
        }
        self.nodes = 0
        self.atoms = 0
        self.reports: list[StabilityReport] = []
        self.divs = divisors(q)
        comps = stratum_components(q)
        self.comp_masks = {
            d: [mask_of(c) for c in comps[d]] for d in self.divs
        }
        # image of each stratum component under each unit, for subtree pruning
        self.comp_img = {a: {} for a in self.units}
        for d in self.divs:
            for c in comps[d]:
                cmask = mask_of(c)
                for a in self.units:
                    self.comp_img[a][cmask] = mask_of((a * k) % q for k in c)
        if cfg.mode == "product" and not cfg.signed:
            # subgroup piece of each stratum component, for the class-of-1 filter
            self.comp_subgroup = {}
            for d in self.divs:
                n = q // d
                table = {}
                for c in comps[d]:
                    elems = sorted(k // d for k in c)
                    if n == 1:
                        table[mask_of(c)] = frozenset({0})
                    else:
                        inv = pow(elems[0], -1, n)
                        table[mask_of(c)] = frozenset((inv * x) % n for x in elems)
                self.comp_subgroup[d] = table

    # -- candidate classes --------------------------------------------------

    def _comp_vals(self, mask: int):
        return subset_hat(self.q, mask)

    def _cross_product(self, bases, option_lists, covered=0, supports=(), base_imgs=None):
        """Unions of one base with at most one component per option list,
        with the Fourier values accumulated incrementally.

        When covered is given, subtrees are cut as soon as some unit image of
        the partial union collides with the cover without a chosen class
        support containing it (the final class must map onto a chosen class
        exactly, so a colliding partial image must stay inside one)."""
        units = self.units
        comp_img = self.comp_img
        out: list[tuple[int, tuple]] = []
        check = covered != 0 and self.full_prunes

        def rec(i: int, acc: int, vals, imgs):
            if i == len(option_lists):
                out.append((acc, vals))
                return
            rec(i + 1, acc, vals, imgs)
            for c, cv in option_lists[i]:
                if check:
                    new_imgs = []
                    ok = True
                    for j, a in enumerate(units):
                        img = imgs[j] | comp_img[a][c]
                        if img & covered and not any(
                            img & ~s == 0 for s in supports
                        ):
                            ok = False
                            break
                        new_imgs.append(img)
                    if not ok:
                        continue
                else:
                    new_imgs = imgs
                rec(i + 1, acc | c, _vals_add(vals, cv), new_imgs)

        for b, bv in bases:
            if check:
                imgs0 = []
                viable = True
                for a in units:
                    img = (base_imgs[a] if base_imgs else 0) | (
                        comp_img[a][b] if b else 0
                    )
                    if img & covered and not any(img & ~s == 0 for s in supports):
                        viable = False
                        break
                    imgs0.append(img)
                if not viable:
                    continue
            else:
                imgs0 = [0] * len(units)
            rec(0, b, bv, imgs0)
        return out

    def _admissible_in(self, avail: int, anchor: int | None, covered=0, supports=(), base_imgs=None):
        """All admissible (mask, values) inside avail; when anchor is given
        the mask must contain it (it is then automatically the minimum)."""
        q = self.q
        if anchor is None:
            strata = self.divs
            bases = [(0, None)]
        else:
            d0 = gcd(anchor, q)
            strata = [d for d in self.divs if d != d0]
            abit = 1 << anchor
            bases = [
                (c, self._comp_vals(c))
                for c in self.comp_masks[d0]
                if c & abit and not (c & ~avail)
            ]
            if not bases:
                return []
        option_lists = []
        for d in strata:
            opts = [
                (c, self._comp_vals(c))
                for c in self.comp_masks[d]
                if not (c & ~avail)
            ]
            if opts:
                option_lists.append(opts)
        out = self._cross_product(bases, option_lists, covered, supports, base_imgs)
        if anchor is None:
            out = [(m, v) for m, v in out if m]
        return out

    def _unit_class_candidates(self, avail: int, covered=0, supports=()):
        """Product-unsigned candidates for the class containing 1: a subgroup H
        of the units plus H-invariant coset pieces from other strata."""
        q = self.q
        out = []
        for c in self.comp_masks[1]:
            if not (c & 2) or (c & ~avail):
                continue  # must contain index 1
            h = self.comp_subgroup[1][c]
            option_lists = []
            for d in self.divs[1:]:
                n = q // d
                hbar = frozenset(x % n for x in h) if n > 1 else frozenset({0})
                opts = [
                    (m, self._comp_vals(m))
                    for m in self.comp_masks[d]
                    if not (m & ~avail) and hbar <= self.comp_subgroup[d][m]
                ]
                if opts:
                    option_lists.append(opts)
            out.extend(
                self._cross_product(
                    [(c, self._comp_vals(c))], option_lists, covered, supports
                )
            )
        return out

    def _subset_candidates(self, avail: int, anchor: int | None):
        q = self.q
        if anchor is None:
            rest = avail
            base = 0
        else:
            rest = avail & ~(1 << anchor)
            base = 1 << anchor
        bits = _mask_elems(rest)
        out = []
        for sel in range(1 << len(bits)):
            m = base
            s = sel
            i = 0
            while s:
                if s & 1:
                    m |= 1 << bits[i]
                s >>= 1
                i += 1
            out.append((m, subset_hat(q, m) if m else None))
        return out  # anchor None: includes the empty set (used for minus parts)

    def _mask_img(self, a: int, mask: int) -> int:
        img = 0
        table = self.bit_img[a]
        while mask:
            low = mask & -mask
            img |= table[low.bit_length() - 1]
            mask ^= low
        return img

    def class_candidates(self, k: int, avail: int, covered=0, supports=()):
        """Candidate (plus, minus, Fourier values) classes whose support contains k."""
        cfg = self.cfg
        product_unsigned = (
            cfg.mode == "product" and not cfg.signed and self.full_prunes
        )
        if cfg.atom_source == "admissible":
            if product_unsigned and k == 0:
                plus_list = [(1, subset_hat(self.q, 1))]
            elif product_unsigned and k == 1:
                plus_list = self._unit_class_candidates(avail, covered, supports)
            else:
                plus_list = self._admissible_in(avail, k, covered, supports)
        else:
            if product_unsigned and k == 0:
                plus_list = [(1, subset_hat(self.q, 1))]
            else:
                plus_list = self._subset_candidates(avail, k)
        if not cfg.signed:
            return [(p, 0, v) for p, v in plus_list]
        cands = []
        for p, pv in plus_list:
            rest = avail & ~p
            if cfg.atom_source == "admissible":
                base_imgs = (
                    {a: self._mask_img(a, p) for a in self.units}
                    if self.full_prunes
                    else None
                )
                minus_list = [(0, None)] + self._admissible_in(
                    rest, None, covered, supports, base_imgs
                )
            else:
                minus_list = self._subset_candidates(rest, None)
            cands.extend((p, m, _vals_sub(pv, mv)) for m, mv in minus_list)
        return cands

    # -- prunes ---------------------------------------------------------------

    def _mult_prune(self, chosen: dict[int, tuple[int, int]], covered: int) -> bool:
        """True when some unit image of a chosen class collides with the cover
        without being a chosen class itself (with coherent signs)."""
        for a in self.units:
            img = self.bit_img[a]
            for support, (p, m) in chosen.items():
                ip = 0
                for k in _mask_elems(p):
                    ip |= img[k]
                im = 0
                for k in _mask_elems(m):
                    im |= img[k]
                sup = ip | im
                if not (sup & covered):
                    continue
                have = chosen.get(sup)
                if have is None or have not in ((ip, im), (im, ip)):
                    return True
        return False

    def _convenience_prune(self, ulab, chosen) -> bool:
        """True when the chosen collection violates the convolution-monomial
        constancy condition (product searches only)."""
        q = self.q
        meet: dict[int, int] = {}
        for m in range(q):
            meet[ulab[m]] = meet.get(ulab[m], 0) | (1 << m)
        for amask in meet.values():
            ha = subset_hat(q, amask)
            for p, mi in chosen.values():
                ref = None
                ok = True
                for i in _mask_elems(p):
                    v = ha[(-i) % q]
                    if ref is None:
                        ref = v
                    elif v != ref:
                        ok = False
                        break
                if ok and mi:
                    for i in _mask_elems(mi):
                        v = ha[(-i) % q]
                        nv = _tuple_neg(v)
                        if ref is None:
                            ref = nv
                        elif nv != ref:
                            ok = False
                            break
                if not ok:
                    return True
        return False

    # -- search ----------------------------------------------------------------

    def run(self) -> EnumerationResult:
        q = self.q
        init_ulab = [0] * q
        init_slab = [0] * q
        init_sign = [1] * q
        complete = True
        try:
            self._rec(0, {}, init_ulab, 1, init_slab, init_sign, [True], 1)
        except BudgetExhausted:
            complete = False
        self.reports.sort(key=lambda rep: (rep.subject.r, rep.subject.bracket()))
        counts = self._tally()
        return EnumerationResult(
            self.cfg, self.reports, counts, self.nodes, self.atoms, complete
        )

    def _tally(self) -> dict[str, int]:
        counts = {"p_pattern": 0, "p_signed": 0, "ip_pattern": 0, "ip_signed": 0}
        for rep in self.reports:
            signed = isinstance(rep.subject, SignedPattern)
            if rep.klass is StabilityClass.PRODUCT_STABLE:
                counts["p_signed" if signed else "p_pattern"] += 1
            else:
                counts["ip_signed" if signed else "ip_pattern"] += 1
        counts["total"] = len(self.reports)
        return counts

    def _finalize(self, chosen: dict[int, tuple[int, int]], su: int, ss: int):
        cfg = self.cfg
        r = len(chosen)
        if cfg.mode == "product" and su != r:
            return
        if ss != r and su != r:
            return
        if cfg.signed:
            if not any(m for _, m in chosen.values()):
                return  # plain pattern; counted by the unsigned search
            subject: Pattern | SignedPattern = SignedPattern.make(
                self.q,
                [
                    (frozenset(_mask_elems(p)), frozenset(_mask_elems(m)))
                    for p, m in chosen.values()
                ],
            )
        else:
            subject = Pattern.make(
                self.q, [frozenset(_mask_elems(p)) for p, _ in chosen.values()]
            )
        try:
            rep = classify(subject)
        except (AllEqualPattern, GenericallySingular):
            return
        if rep.klass is StabilityClass.UNSTABLE:
            return
        if cfg.mode == "product" and rep.klass is not StabilityClass.PRODUCT_STABLE:
            return
        self.reports.append(rep)

    def _rec(self, covered, chosen, ulab, su, slab, ssign, zflags, ss):
        self.nodes += 1
        if self.nodes > self.cfg.max_nodes:
            raise BudgetExhausted
        q = self.q
        if covered == self.full:
            self._finalize(chosen, su, ss)
            return
        avail = self.full & ~covered
        k = (avail & -avail).bit_length() - 1
        product_mode = self.cfg.mode == "product"
        supports = tuple(chosen)
        for pmask, mmask, vals in self.class_candidates(k, avail, covered, supports):
            self.atoms += 1
            support = pmask | mmask
            new_covered = covered | support
            remaining = q - new_covered.bit_count()
            t = len(chosen) + 1
            # class-count labels
            umap: dict[tuple, int] = {}
            nu = [0] * q
            for m in range(q):
                key = (ulab[m], vals[m])
                idx = umap.get(key)
                if idx is None:
                    idx = len(umap)
                    umap[key] = idx
                nu[m] = idx
            nsu = len(umap)
            if product_mode and self.count_prunes and nsu > t + remaining:
                continue
            smap: dict[tuple, int] = {}
            ns = [0] * q
            nsign = [1] * q
            nz: list[bool] = []
            for m in range(q):
                if zflags[slab[m]]:
                    adj, sg = _sign_normalize(vals[m])
                else:
                    adj = vals[m] if ssign[m] > 0 else _tuple_neg(vals[m])
                    sg = ssign[m]
                key = (slab[m], adj)
                idx = smap.get(key)
                if idx is None:
                    idx = len(smap)
                    smap[key] = idx
                    nz.append(zflags[slab[m]] and adj == self.zero)
                ns[m] = idx
                nsign[m] = sg
            nss = len(smap)
            if self.count_prunes and nss > t + remaining:
                continue
            new_chosen = dict(chosen)
            new_chosen[support] = (pmask, mmask)
            if self.full_prunes and self._mult_prune(new_chosen, new_covered):
                continue
            if product_mode and self.full_prunes and self._convenience_prune(nu, new_chosen):
                continue
            self._rec(new_covered, new_chosen, nu, nsu, ns, nsign, nz, nss)


def enumerate_stable(cfg: SearchConfig) -> EnumerationResult:
    """Run the pruned search; see SearchConfig for the knobs."""
    return _Search(cfg).run()


def count_product_stable(q: int, max_nodes: int = 200_000_000) -> int:
    """Number of product-stable unsigned patterns, via admissible-atom search."""
    result = enumerate_stable(
        SearchConfig(q=q, signed=False, mode="product", max_nodes=max_nodes)
    )
    if not result.complete:
        raise BudgetExhausted(f"node budget exhausted at q={q}")
    return result.counts["p_pattern"]


def classify_all(q: int, atom_source: str = "admissible", max_nodes: int = 200_000_000):
    """All stable subjects at modulus q, bucketed the way the count tables are.

    Returns (result dict with the five counts, list of all StabilityReports).
    """
    unsigned = enumerate_stable(
        SearchConfig(q=q, signed=False, mode="inverse", atom_source=atom_source, max_nodes=max_nodes)
    )
    signed = enumerate_stable(
        SearchConfig(q=q, signed=True, mode="inverse", atom_source=atom_source, max_nodes=max_nodes)
    )
    counts = {
        "p_pattern": unsigned.counts["p_pattern"],
        "p_signed": signed.counts["p_signed"],
        "ip_pattern": unsigned.counts["ip_pattern"],
        "ip_signed": signed.counts["ip_signed"],
        "total": unsigned.counts["total"] + signed.counts["total"],
        "complete": unsigned.complete and signed.complete,
        "nodes_visited": unsigned.nodes_visited + signed.nodes_visited,
    }
    return counts, unsigned.stable + signed.stable


# ---------------------------------------------------------------------------
# golden-file comparison


@dataclass
class GoldenDiff:
    missing: list[str] = field(default_factory=list)  # in golden, not produced
    extra: list[str] = field(default_factory=list)  # produced, not in golden
    dual_mismatch: list[tuple[str, str, str]] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not (self.missing or self.extra or self.dual_mismatch)

    def summary(self) -> str:
        if self.empty:
            return "empty diff"
        parts = []
        if self.missing:
            parts.append(f"missing={self.missing}")
        if self.extra:
            parts.append(f"extra={self.extra}")
        if self.dual_mismatch:
            parts.append(f"dual_mismatch={self.dual_mismatch}")
        return "; ".join(parts)


def load_golden(path) -> dict[str, str]:
    """Parse a golden listing: `bracket -> dual_bracket` per line (the dual is
    optional), '#' comments.  Brackets are canonicalized on parse, so fixture
    lettering is free; entries without a dual map to the empty string.
    """
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if "->" in fields:
                arrow = fields.index("->")
                bracket = parse_bracket(fields[arrow - 1]).bracket()
                entries[bracket] = parse_bracket(fields[arrow + 1]).bracket()
            else:
                entries[parse_bracket(fields[-1]).bracket()] = ""
    return entries


def golden_diff(produced: dict[str, str], golden: dict[str, str]) -> GoldenDiff:
    """Set difference between produced {bracket: dual} and the golden listing."""
    diff = GoldenDiff()
    for b in sorted(golden):
        if b not in produced:
            diff.missing.append(b)
    for b in sorted(produced):
        if b not in golden:
            diff.extra.append(b)
        elif produced[b] != golden[b]:
            diff.dual_mismatch.append((b, produced[b], golden[b]))
    return diff

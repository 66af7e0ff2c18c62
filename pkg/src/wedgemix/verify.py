"""Exact-rational checks of invariant segments and orbit Jacobians.

Points live on the torus with :class:`fractions.Fraction` coordinates
reduced into ``[0, 1)``. A map word is a sequence of ``(direction, omega,
tau)`` applications in the order they act, so ``V_0^2 o H_0^2`` is
``[(H, 0, 2), (V, 0, 2)]``.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .advection import Direction

H = Direction.HORIZONTAL
V = Direction.VERTICAL


class NonDifferentiable(ValueError):
    """An orbit point sits on a kink of a wedge profile."""


@dataclass(frozen=True)
class ExactPoint:
    x1: Fraction
    x2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x1", Fraction(self.x1) % 1)
        object.__setattr__(self, "x2", Fraction(self.x2) % 1)

    def __str__(self):
        return f"({self.x1}, {self.x2})"


def torus_distance(x, y):
    d = (Fraction(x) - Fraction(y)) % 1
    return min(d, 1 - d)


def word(*steps):
    """Normalize ``(direction, omega, tau)`` triples into a map word."""
    if not steps:
        raise ValueError("a map word needs at least one application")
    return [(Direction.parse(d) if not isinstance(d, Direction) else d, Fraction(w), int(t))
            for d, w, t in steps]


def exact_flow_map(p, direction, omega, tau):
    if direction is H:
        return ExactPoint(p.x1 + tau * torus_distance(p.x2, omega), p.x2)
    return ExactPoint(p.x1, p.x2 + tau * torus_distance(p.x1, omega))


def apply_word(p, steps):
    for d, w, t in steps:
        p = exact_flow_map(p, d, w, t)
    return p


def branch_sign(coord, omega):
    """+1 / -1 on the rising / falling side of the wedge profile."""
    u = (Fraction(coord) - Fraction(omega)) % 1
    if u == 0 or u == Fraction(1, 2):
        raise NonDifferentiable(f"coordinate {coord} is on a kink of the profile at {omega}")
    return 1 if u < Fraction(1, 2) else -1


def _matmul(a, b):
    return ((a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
            (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]))


IDENTITY = ((1, 0), (0, 1))


def orbit_jacobian(p, steps):
    """Integer Jacobian of the word at ``p`` (chain rule along the orbit)."""
    jac = IDENTITY
    for d, w, t in steps:
        if d is H:
            step = ((1, t * branch_sign(p.x2, w)), (0, 1))
        else:
            step = ((1, 0), (t * branch_sign(p.x1, w), 1))
        jac = _matmul(step, jac)
        p = exact_flow_map(p, d, w, t)
    return jac


@dataclass(frozen=True)
class ExactSegment:
    """Open segment ``{base + t * direction : lo < t < hi}`` on the torus."""

    base: ExactPoint
    direction: tuple
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "direction", tuple(Fraction(c) for c in self.direction))
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.direction == (0, 0):
            raise ValueError("segment direction must be nonzero")
        if not self.lo < self.hi:
            raise ValueError("empty parameter range")

    def point(self, t):
        return ExactPoint(self.base.x1 + t * self.direction[0], self.base.x2 + t * self.direction[1])

    def samples(self, count):
        """``count`` equispaced parameters strictly inside ``(lo, hi)``."""
        step = (self.hi - self.lo) / (count + 1)
        return [self.lo + (k + 1) * step for k in range(count)]

    def contains(self, p):
        d1, d2 = self.direction
        # solve along the coordinate with a nonzero direction component
        if d1 != 0:
            a, b, dd, other_d, other_b, other_p = p.x1, self.base.x1, d1, d2, self.base.x2, p.x2
        else:
            a, b, dd, other_d, other_b, other_p = p.x2, self.base.x2, d2, d1, self.base.x1, p.x1
        # t = (a - b + m) / dd for integers m with lo < t < hi
        ends = sorted(((self.lo * dd - (a - b)), (self.hi * dd - (a - b))))
        m = -((-ends[0]) // 1)
        while m <= ends[1]:
            t = (a - b + m) / dd
            if self.lo < t < self.hi and (other_b + t * other_d - other_p) % 1 == 0:
                return True
            m += 1
        return False

    def __str__(self):
        d1, d2 = self.direction
        return f"{{{self.base} + t*({d1}, {d2}) : {self.lo} < t < {self.hi}}}"


def segment(p1, p2, d1, d2, lo, hi):
    return ExactSegment(ExactPoint(p1, p2), (d1, d2), lo, hi)


@dataclass
class CycleReport:
    word: list
    segments: list
    samples: int
    failures: list = field(default_factory=list)
    branch_patterns: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures


def _branch_pattern(p, steps):
    pattern = []
    for d, w, t in steps:
        coord = p.x2 if d is H else p.x1
        try:
            pattern.append(branch_sign(coord, w))
        except NonDifferentiable:
            pattern.append(0)
        p = exact_flow_map(p, d, w, t)
    return tuple(pattern)


def verify_segment_cycle(segments, steps, samples=16):
    """Check that ``steps`` maps segment m into segment m+1 (cyclically).

    Every sampled point must land in the next segment after one word, and
    on its exact starting point after ``len(segments)`` words. The report
    also records which wedge branch each application used per segment
    (0 marks a kink), as a consistency diagnostic.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    report = CycleReport(steps, segments, samples)
    n = len(segments)
    for m, seg in enumerate(segments):
        patterns = set()
        for t in seg.samples(samples):
            start = seg.point(t)
            p = start
            patterns.add(_branch_pattern(start, steps))
            for step in range(n):
                p = apply_word(p, steps)
                target = segments[(m + step + 1) % n]
                if not target.contains(p):
                    report.failures.append(
                        f"segment {m}, t={t}: {start} -> {p} after {step + 1} word(s), "
                        f"not on segment {(m + step + 1) % n}")
                    break
            else:
                if p != start:
                    report.failures.append(f"segment {m}, t={t}: {start} returned to {p}")
        report.branch_patterns.append(sorted(patterns))
    return report


@dataclass
class JordanReport:
    matrix: tuple
    det: int
    trace: int
    identity: bool
    fixes_diagonal: bool

    @property
    def unipotent_jordan(self):
        """Similar to ``[[1, 1], [0, 1]]``: det 1, trace 2, not the identity."""
        return self.det == 1 and self.trace == 2 and not self.identity


def jordan_check(m):
    (a, b), (c, d) = m
    return JordanReport(
        matrix=((a, b), (c, d)),
        det=a * d - b * c,
        trace=a + d,
        identity=(a, b, c, d) == (1, 0, 0, 1),
        fixes_diagonal=(a + b, c + d) == (1, 1),
    )


# -- the default checks ----------------------------------------------------

F = Fraction
TAU2_WORD = word((H, 0, 2), (V, 0, 2))
TAU1_WORD = word((H, 0, 1), (V, 0, 1))

TAU2_PAIR_A = [segment(0, F(3, 4), 1, 1, 0, F(1, 4)),
               segment(0, F(1, 4), 1, 1, F(1, 4), F(1, 2))]
TAU2_PAIR_B = [segment(0, F(3, 4), 1, -1, F(1, 2), F(3, 4)),
               segment(0, F(5, 4), 1, -1, F(3, 4), 1)]
TAU1_TRIPLE = [segment(0, F(1, 2), 1, 1, 0, F(1, 2)),
               segment(F(1, 2), 0, 0, 1, 0, F(1, 2)),
               segment(0, F(1, 2), 1, 0, F(1, 2), 1)]


@dataclass
class SuiteResult:
    name: str
    ok: bool
    lines: list


def default_suite(samples=16):
    """The invariant-structure checks for flow times 2 and 1."""
    results = []

    p = TAU2_PAIR_A[0].point(F(1, 8))
    jac = orbit_jacobian(p, TAU2_WORD * 2)
    rep = jordan_check(jac)
    ok = jac == ((-3, 4), (-4, 5)) and rep.unipotent_jordan and rep.fixes_diagonal
    results.append(SuiteResult(
        "tau=2 Jacobian of (V_0^2 H_0^2)^2 on {(s, s+3/4)}", ok,
        [f"point {p}", f"matrix {list(map(list, jac))}",
         f"det {rep.det}, trace {rep.trace}, identity {rep.identity}, (1,1) fixed {rep.fixes_diagonal}"]))

    for name, segs, w in (("tau=2 pair {(s,s+3/4)}, {(s,s+1/4)}", TAU2_PAIR_A, TAU2_WORD),
                          ("tau=2 pair {(s,3/4-s)}, {(s,5/4-s)}", TAU2_PAIR_B, TAU2_WORD),
                          ("tau=1 triple under V_0^1 H_0^1", TAU1_TRIPLE, TAU1_WORD)):
        rep = verify_segment_cycle(segs, w, samples)
        lines = [f"segment {k}: {s}" for k, s in enumerate(segs)]
        lines.append(f"{samples} samples per segment, {len(rep.failures)} failure(s)")
        lines += rep.failures[:10]
        results.append(SuiteResult(f"{name}: {len(segs)}-cycle", rep.ok, lines))

    s, eps = F(1, 8), F(1, 64)
    lines = []
    ok = True
    for side_name, offset, expected in (("above", eps, ((3, -2), (2, -1))),
                                        ("below", -eps, ((-1, 2), (-2, 3)))):
        p = ExactPoint(s, s + F(1, 2) + offset)
        jac = orbit_jacobian(p, TAU1_WORD * 3)
        rep = jordan_check(jac)
        good = jac == expected and rep.unipotent_jordan and rep.fixes_diagonal
        ok = ok and good
        lines.append(f"{side_name} {p}: matrix {list(map(list, jac))}, det {rep.det}, "
                     f"trace {rep.trace}, (1,1) fixed {rep.fixes_diagonal}")
    results.append(SuiteResult("tau=1 Jacobians of (V_0^1 H_0^1)^3 beside {(s, s+1/2)}", ok, lines))
    return results

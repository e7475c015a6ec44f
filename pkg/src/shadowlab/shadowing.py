"""Pseudo-orbit generation, trace construction, and tracing verification.

Everything here works on truncated data: a pseudo-orbit is a family of
configurations indexed by a Cayley ball, one per group element, and every
metric statement is made with the dyadic ball metric and its explicit
truncation marker.  The generator never fabricates a field and hopes: it
builds one from a genuine orbit segment, perturbs only layers that the
step condition provably tolerates, and then re-verifies the step condition
before handing the field out.

Radius bookkeeping, fixed once and used throughout:

  * step tolerance delta = 2^-(m+1) certified through agreement on ball(m+2)
    after one generator shift, so entries must agree with a common orbit on
    ball(m+3); the generator therefore preserves layers up to min(m+3, R_in)
    and only touches deeper layers,
  * tracing tolerance epsilon is checked at comparison radius
    min(R - |g|, R_in); a definite mismatch at or above epsilon refutes,
    a truncation marker never does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Optional

from .errors import CapacityError, GenerationError
from .groups import GroupElement
from .shifts import (
    NODE_BUDGET,
    Configuration,
    DyadicDistance,
    SftSpec,
    ShiftSpace,
    allowed_blocks,
    distance,
    enumerate_admissible,
    locally_admissible,
    random_admissible,
    refutes,
    shift,
    sft_from_forbidden,
)


@dataclass(frozen=True)
class TracingPlan:
    """Tolerances for one tracing experiment.

    ``modulus`` is the least m with 2^-m below epsilon and m above the SFT
    window radius; ``delta`` is the step tolerance 2^-(m+1).
    """

    window_radius: int
    epsilon: Fraction
    modulus: int
    delta: Fraction


def potp_modulus(window_radius: int, epsilon: Fraction) -> TracingPlan:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    m = window_radius + 1
    while Fraction(1, 2 ** m) >= epsilon:
        m += 1
    return TracingPlan(window_radius, Fraction(epsilon), m, Fraction(1, 2 ** (m + 1)))


@dataclass(frozen=True)
class PseudoOrbit:
    """A delta step field: one inner configuration per element of ball(radius)."""

    space: ShiftSpace
    sft: SftSpec
    radius: int
    inner_radius: int
    delta: Fraction
    entries: tuple[Configuration, ...]
    mode: str
    perturbed_cells: tuple[tuple[int, int], ...]

    @property
    def perturbation_count(self) -> int:
        return len(self.perturbed_cells)

    def entry(self, g: GroupElement) -> Configuration:
        return self.entries[self.space.geometry.position(g, self.radius)]

    def entry_at(self, index: int) -> Configuration:
        return self.entries[index]


def _preserved_radius(modulus: int, inner_radius: int) -> int:
    return min(modulus + 3, inner_radius)


def delta_profile(orbit: PseudoOrbit) -> tuple[bool, Fraction, int]:
    """Check the step condition over every generator and indexed element.

    Returns (holds, worst definite face value, definite comparison count).
    A marker face always sits strictly below delta here because the inner
    radius is at least m+2.
    """
    geo = orbit.space.geometry
    ballR = geo.ball(orbit.radius)
    worst = Fraction(0)
    definite = 0
    holds = True
    gens = orbit.space.spec.generators
    for gi, g in enumerate(ballR):
        for a in gens:
            ag = a * g
            pos = None
            if geo.word_length(ag, orbit.radius) is not None:
                pos = geo.position(ag, orbit.radius)
            if pos is None:
                continue
            stepped = shift(a, orbit.entries[gi])
            target = orbit.entries[pos].restrict(orbit.inner_radius - 1)
            d = distance(stepped, target)
            if not d.marker:
                definite += 1
                if d.value > worst:
                    worst = d.value
            if d.value >= orbit.delta:
                holds = False
    return holds, worst, definite


def generate_pseudo_orbit(sft: SftSpec, radius: int, plan: TracingPlan,
                          rng: Random, mode: str = "perturbed_orbit",
                          inner_radius: Optional[int] = None,
                          flip_attempts: int = 16,
                          node_budget: int = NODE_BUDGET) -> PseudoOrbit:
    """Build a delta step field around a random admissible orbit segment.

    Modes: ``exact_orbit`` uses untouched orbit restrictions; ``perturbed_orbit``
    resamples every entry below the preserved layers; ``random_flip`` applies
    admissibility-preserving single-cell flips below the preserved layers.
    Deep layers are the only legal place to deviate, so when the inner radius
    does not exceed m+3 the perturbing modes degrade to the exact field.
    """
    if mode not in ("exact_orbit", "perturbed_orbit", "random_flip"):
        raise ValueError(f"unknown pseudo-orbit mode {mode!r}")
    space = sft.space
    geo = space.geometry
    r_in = inner_radius if inner_radius is not None else plan.modulus + 3
    if r_in < plan.modulus + 2:
        raise ValueError("inner radius must be at least m+2 to keep the step "
                         "condition certifiable")
    preserved = _preserved_radius(plan.modulus, r_in)
    base = random_admissible(space, sft, radius + r_in, rng, node_budget=node_budget)
    seeds = [rng.getrandbits(64) for _ in range(geo.ball_size(radius))]
    kept = geo.ball_size(preserved)
    inner_size = geo.ball_size(r_in)
    entries = []
    perturbed = []
    for gi, g in enumerate(geo.ball(radius)):
        exact = shift(g, base).restrict(r_in)
        sub = Random(seeds[gi])
        if mode == "exact_orbit" or kept == inner_size:
            entries.append(exact)
            continue
        if mode == "perturbed_orbit":
            entry = random_admissible(space, sft, r_in, sub,
                                      prefix=exact.cells[:kept],
                                      node_budget=node_budget)
        else:
            cells = list(exact.cells)
            for _ in range(flip_attempts):
                pos = sub.randrange(kept, inner_size)
                old = cells[pos]
                cells[pos] = sub.randrange(space.alphabet.size)
                candidate = Configuration(space, r_in, tuple(cells))
                if not locally_admissible(candidate, sft):
                    cells[pos] = old
            entry = Configuration(space, r_in, tuple(cells))
        for pos in range(kept, inner_size):
            if entry.cells[pos] != exact.cells[pos]:
                perturbed.append((gi, pos))
        entries.append(entry)
    orbit = PseudoOrbit(space, sft, radius, r_in, plan.delta, tuple(entries),
                        mode, tuple(perturbed))
    holds, _, _ = delta_profile(orbit)
    if not holds:
        raise GenerationError("generated field violates its own step condition; "
                              "this indicates a radius bookkeeping bug")
    return orbit


@dataclass(frozen=True)
class TraceCheck:
    frame_index: int
    word_length: int
    comparison_radius: int
    dist: DyadicDistance
    passed: bool


@dataclass(frozen=True)
class TraceResult:
    trace: Configuration
    scan_radius: int
    checks: tuple[TraceCheck, ...]
    admissible: bool
    passed: bool

    @property
    def worst_definite(self) -> Fraction:
        faces = [c.dist.value for c in self.checks if not c.dist.marker]
        return max(faces) if faces else Fraction(0)


def construct_trace(orbit: PseudoOrbit) -> Configuration:
    """Read the tracing candidate off the field: cell g takes the value the
    entry at g assigns to the identity."""
    cells = tuple(entry.cells[0] for entry in orbit.entries)
    return Configuration(orbit.space, orbit.radius, cells)


def verify_trace(orbit: PseudoOrbit, trace: Configuration, plan: TracingPlan,
                 scan_radius: Optional[int] = None) -> TraceResult:
    """Check d(g . trace, entry(g)) against epsilon over a scan ball.

    The default scan radius is R - m, the largest ball on which the shifted
    trace still exposes agreement down to the tolerance scale.
    """
    geo = orbit.space.geometry
    if scan_radius is None:
        scan_radius = max(orbit.radius - plan.modulus, 0)
    if scan_radius > orbit.radius:
        raise ValueError("scan radius cannot exceed the field radius")
    checks = []
    all_pass = True
    for gi, g in enumerate(geo.ball(scan_radius)):
        length = geo.word_length(g, scan_radius)
        c = min(orbit.radius - length, orbit.inner_radius)
        d = distance(shift(g, trace).restrict(c), orbit.entries[gi].restrict(c))
        ok = not refutes(d, plan.epsilon)
        all_pass = all_pass and ok
        checks.append(TraceCheck(gi, length, c, d, ok))
    admissible = locally_admissible(trace, orbit.sft)
    return TraceResult(trace, scan_radius, tuple(checks), admissible,
                       all_pass and admissible)


@dataclass(frozen=True)
class UniquenessReport:
    applicable: bool
    expansivity_constant: Fraction
    scan_radius: int
    comparison_cap: int
    candidates_scanned: int
    multiplicity: int
    multiplicity_within_core: int
    passer_samples: tuple[str, ...]


def uniqueness_scan(orbit: PseudoOrbit, plan: TracingPlan, eta: Fraction,
                    scan_radius: Optional[int] = None,
                    comparison_cap: Optional[int] = None,
                    node_budget: int = NODE_BUDGET,
                    sample_limit: int = 8) -> UniquenessReport:
    """Count locally admissible configurations that survive the tracing test.

    Only meaningful when 2*epsilon is below the separation constant eta;
    otherwise the report is marked not applicable and nothing is scanned.
    Comparison radii are capped (default: at m) so the scan asks exactly the
    question the tolerance can answer; passers are counted both outright and
    by their restriction to ball(min(m, R)).
    """
    eta = Fraction(eta)
    if not 2 * plan.epsilon < eta:
        return UniquenessReport(False, eta, 0, 0, 0, 0, 0, ())
    space = orbit.space
    geo = space.geometry
    if scan_radius is None:
        scan_radius = max(orbit.radius - plan.modulus, 0)
    cap = comparison_cap if comparison_cap is not None else plan.modulus
    frames = []
    for gi, g in enumerate(geo.ball(scan_radius)):
        length = geo.word_length(g, scan_radius)
        c = min(orbit.radius - length, orbit.inner_radius, cap)
        frames.append((gi, g, c))
    core_size = geo.ball_size(min(plan.modulus, orbit.radius))
    passers = []
    scanned = 0
    for cells in enumerate_admissible(space, orbit.sft, orbit.radius,
                                      node_budget=node_budget):
        scanned += 1
        y = Configuration(space, orbit.radius, cells)
        ok = True
        for gi, g, c in frames:
            d = distance(shift(g, y).restrict(c), orbit.entries[gi].restrict(c))
            if refutes(d, plan.epsilon):
                ok = False
                break
        if ok:
            passers.append(y)
    cores = {y.cells[:core_size] for y in passers}
    samples = tuple(y.serialize() for y in passers[:sample_limit])
    return UniquenessReport(True, eta, scan_radius, cap, scanned,
                            len(passers), len(cores), samples)


@dataclass(frozen=True)
class WindowScanResult:
    """Outcome of a separation-window search.

    ``window`` is the least k such that agreement within eta over ball(k)
    forces distance below epsilon, or None if no k up to the limit works.
    """

    constant: Fraction
    epsilon: Fraction
    test_radius: int
    method: str
    window: Optional[int]
    scanned: int
    witness: str


def _flip_conclusion_fails(layer: int, epsilon: Fraction) -> bool:
    return Fraction(1, 2 ** max(layer - 1, 0)) >= epsilon


def separation_window_flip_scan(space: ShiftSpace, eta: Fraction,
                                epsilon: Fraction, test_radius: int,
                                max_window: int) -> WindowScanResult:
    """Exact window search on an unconstrained space via single flips.

    On a full shift both the hypothesis and the failure of the conclusion
    decompose over disagreement positions, so a minimal counterexample pair
    differs in exactly one cell; scanning flip positions is then complete.
    """
    eta = Fraction(eta)
    epsilon = Fraction(epsilon)
    geo = space.geometry
    ball = geo.ball(test_radius)
    needed = 0
    witness = "all flip positions covered"
    for p in ball:
        lp = geo.word_length(p, test_radius)
        if not _flip_conclusion_fails(lp, epsilon):
            continue
        cover = None
        for g in geo.ball(min(max_window, test_radius)):
            lg = geo.word_length(g, test_radius)
            moved = p * ~g
            lm = geo.word_length(moved, test_radius + max_window)
            if lm is None or lm > test_radius - lg:
                continue
            if Fraction(1, 2 ** max(lm - 1, 0)) > eta:
                cover = lg
                break
        if cover is None:
            return WindowScanResult(eta, epsilon, test_radius, "flip-scan",
                                    None, len(ball),
                                    f"uncovered flip at layer {lp}")
        if cover > needed:
            needed = cover
            witness = f"binding flip at layer {lp}, covered at layer {cover}"
    return WindowScanResult(eta, epsilon, test_radius, "flip-scan", needed,
                            len(ball), witness)


def _pair_first_violation(x: Configuration, y: Configuration, eta: Fraction,
                          max_window: int) -> Optional[int]:
    geo = x.space.geometry
    limit = min(max_window, x.radius)
    for g in geo.ball(limit):
        d = distance(shift(g, x), shift(g, y))
        if (not d.marker) and d.value > eta:
            return geo.word_length(g, limit)
    return None


def separation_window_pair_scan(space: ShiftSpace, sft: SftSpec, eta: Fraction,
                                epsilon: Fraction, test_radius: int,
                                max_window: int,
                                node_budget: int = NODE_BUDGET) -> WindowScanResult:
    """Literal all-pairs window search; exact but exponential in the ball size."""
    eta = Fraction(eta)
    epsilon = Fraction(epsilon)
    configs = [Configuration(space, test_radius, cells)
               for cells in enumerate_admissible(space, sft, test_radius,
                                                 node_budget=node_budget)]
    needed = 0
    pairs = 0
    witness = "no separating pair needed more"
    for i in range(len(configs)):
        for j in range(i + 1, len(configs)):
            pairs += 1
            d = distance(configs[i], configs[j])
            if not refutes(d, epsilon):
                continue
            first = _pair_first_violation(configs[i], configs[j], eta, max_window)
            if first is None:
                return WindowScanResult(eta, epsilon, test_radius, "pair-scan",
                                        None, pairs,
                                        f"pair {i},{j} agrees within eta "
                                        f"through ball({max_window})")
            if first > needed:
                needed = first
                witness = f"binding pair {i},{j} separated at layer {first}"
    return WindowScanResult(eta, epsilon, test_radius, "pair-scan", needed,
                            pairs, witness)


@dataclass(frozen=True)
class WindowCheckResult:
    """Outcome of verifying one proposed separation window exhaustively."""

    constant: Fraction
    epsilon: Fraction
    window: int
    test_radius: int
    subsets_checked: int
    ok: bool
    witness: str


def separation_window_exhaustive_check(space: ShiftSpace, eta: Fraction,
                                       epsilon: Fraction, window: int,
                                       test_radius: int) -> WindowCheckResult:
    """Verify a separation window against every configuration pair at once.

    Every distance between two configurations, shifted or not, depends only
    on the set of positions where they disagree, never on the symbols or on
    the cells they share.  Enumerating all nonempty disagreement subsets of
    ball(test_radius) therefore checks every pair on an unconstrained space
    while staying exponential in one ball size instead of two.  A subset
    whose induced distance reaches epsilon must be pushed past eta by some
    frame in ball(window); the first subset that is not refutes the window.
    """
    eta = Fraction(eta)
    epsilon = Fraction(epsilon)
    geo = space.geometry
    geo.ensure_radius(test_radius + window)
    n = geo.ball_size(test_radius)
    if n > 22:
        raise CapacityError(f"{n} positions means {2 ** n - 1} disagreement "
                            "subsets; refusing beyond 22")
    positions = list(geo.ball(test_radius))
    layers = [geo.word_length(p, test_radius) for p in positions]
    # per frame, the shifted per-position distance value (None if the
    # position falls outside the shifted configuration)
    tables = []
    for g in geo.ball(window):
        lg = geo.word_length(g, window)
        row = []
        for p in positions:
            lm = geo.word_length(p * ~g, test_radius + window)
            if lm is None or lm > test_radius - lg:
                row.append(None)
            else:
                row.append(Fraction(1, 2 ** max(lm - 1, 0)))
        tables.append(row)
    checked = 0
    for mask in range(1, 1 << n):
        checked += 1
        # ball order is sorted by layer, so the lowest set bit is nearest
        first = (mask & -mask).bit_length() - 1
        if Fraction(1, 2 ** max(layers[first] - 1, 0)) < epsilon:
            continue    # conclusion holds, nothing to cover
        covered = False
        for row in tables:
            m = mask
            while m:
                idx = (m & -m).bit_length() - 1
                val = row[idx]
                if val is not None and val > eta:
                    covered = True
                    break
                m &= m - 1
            if covered:
                break
        if not covered:
            bits = [i for i in range(n) if mask >> i & 1]
            return WindowCheckResult(eta, epsilon, window, test_radius, checked,
                                     False, "uncovered disagreement set at "
                                     f"positions {bits}")
    return WindowCheckResult(eta, epsilon, window, test_radius, checked, True,
                             "every epsilon-separated pair is pushed past eta "
                             f"inside ball({window})")


def separation_window_sampled(space: ShiftSpace, sft: SftSpec, eta: Fraction,
                              epsilon: Fraction, test_radius: int,
                              max_window: int, samples: int, rng: Random,
                              node_budget: int = NODE_BUDGET) -> WindowScanResult:
    """Randomized evidence for constrained spaces: samples admissible pairs.

    The result is a lower bound on the window, never a proof.
    """
    eta = Fraction(eta)
    epsilon = Fraction(epsilon)
    needed = 0
    scanned = 0
    witness = "no sampled pair forced a larger window"
    for _ in range(samples):
        x = random_admissible(space, sft, test_radius, rng, node_budget=node_budget)
        y = random_admissible(space, sft, test_radius, rng, node_budget=node_budget)
        d = distance(x, y)
        if not refutes(d, epsilon):
            continue
        scanned += 1
        first = _pair_first_violation(x, y, eta, max_window)
        if first is None:
            return WindowScanResult(eta, epsilon, test_radius, "sampled-pairs",
                                    None, scanned, "sampled pair stayed within "
                                    f"eta through ball({max_window})")
        if first > needed:
            needed = first
            witness = f"sampled pair separated at layer {first}"
    return WindowScanResult(eta, epsilon, test_radius, "sampled-pairs", needed,
                            scanned, witness)


def synthesize_window_spec(sft: SftSpec, modulus: int, slack: int,
                           node_budget: int = NODE_BUDGET) -> SftSpec:
    """Re-present an SFT by windows on ball(modulus + 1).

    The allowed set is the slack approximation of the block set at radius
    m+1; everything else on that ball is declared forbidden.
    """
    blocks = allowed_blocks(sft, modulus + 1, slack, node_budget=node_budget)
    allowed = frozenset(p.cells for p in blocks)
    return SftSpec(sft.space, modulus + 1, allowed)


def admissible_sets_agree(a: SftSpec, b: SftSpec, radius: int,
                          node_budget: int = NODE_BUDGET) -> bool:
    """Do two window presentations admit the same configurations on ball(radius)?"""
    if a.space != b.space:
        raise ValueError("window presentations live on different spaces")
    left = frozenset(enumerate_admissible(a.space, a, radius, node_budget=node_budget))
    right = frozenset(enumerate_admissible(b.space, b, radius, node_budget=node_budget))
    return left == right

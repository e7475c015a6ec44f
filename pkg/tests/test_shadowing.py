"""Pseudo-orbit fields, tracing, uniqueness, separation windows."""

from fractions import Fraction
from random import Random

import pytest

from shadowlab.groups import GroupGeometry, free_rank2_spec, integer_line_spec
from shadowlab.shifts import (
    Configuration,
    ShiftSpace,
    full_shift,
    golden_mean_sft,
    locally_admissible,
    one_forbidden_window_sft,
)
from shadowlab.shadowing import (
    PseudoOrbit,
    TracingPlan,
    admissible_sets_agree,
    construct_trace,
    delta_profile,
    generate_pseudo_orbit,
    potp_modulus,
    separation_window_exhaustive_check,
    separation_window_flip_scan,
    separation_window_pair_scan,
    separation_window_sampled,
    synthesize_window_spec,
    uniqueness_scan,
    verify_trace,
)


@pytest.fixture(scope="module")
def line_space():
    return ShiftSpace(GroupGeometry(integer_line_spec()))


@pytest.fixture(scope="module")
def golden(line_space):
    return golden_mean_sft(line_space)


def test_modulus_recipe_pins(line_space):
    plan = potp_modulus(1, Fraction(1, 8))
    assert (plan.modulus, plan.delta) == (4, Fraction(1, 32))
    plan = potp_modulus(1, Fraction(1, 4))
    assert (plan.modulus, plan.delta) == (3, Fraction(1, 16))
    plan = potp_modulus(0, Fraction(1, 2))
    assert (plan.modulus, plan.delta) == (2, Fraction(1, 8))


def test_modulus_recipe_properties():
    for window in range(4):
        for j in range(1, 8):
            plan = potp_modulus(window, Fraction(1, 2 ** j))
            assert plan.modulus > window
            assert Fraction(1, 2 ** plan.modulus) < plan.epsilon
            assert 2 * plan.delta < plan.epsilon


def test_exact_orbit_fields_have_no_perturbation(golden):
    plan = potp_modulus(1, Fraction(1, 8))
    orb = generate_pseudo_orbit(golden, 8, plan, Random(0), mode="exact_orbit")
    assert orb.perturbation_count == 0
    holds, worst, definite = delta_profile(orb)
    # slices of one orbit agree wherever both are defined
    assert holds and definite == 0 and worst == 0
    res = verify_trace(orb, construct_trace(orb), plan)
    assert res.passed and res.admissible
    assert res.worst_definite == 0


def test_perturbed_fields_keep_the_step_condition(golden):
    plan = potp_modulus(1, Fraction(1, 8))
    orb = generate_pseudo_orbit(golden, 8, plan, Random(1), inner_radius=8)
    assert orb.perturbation_count > 0
    holds, worst, _ = delta_profile(orb)
    assert holds
    assert worst <= Fraction(1, 2 ** (plan.modulus + 2))
    for entry in orb.entries:
        assert locally_admissible(entry, golden)
    res = verify_trace(orb, construct_trace(orb), plan)
    assert res.passed and res.admissible


def test_flip_mode_preserves_admissibility(golden):
    plan = potp_modulus(1, Fraction(1, 8))
    orb = generate_pseudo_orbit(golden, 6, plan, Random(2), mode="random_flip",
                                inner_radius=8, flip_attempts=32)
    holds, _, _ = delta_profile(orb)
    assert holds
    for entry in orb.entries:
        assert locally_admissible(entry, golden)


def test_small_inner_radius_is_rejected(golden):
    plan = potp_modulus(1, Fraction(1, 8))
    with pytest.raises(ValueError):
        generate_pseudo_orbit(golden, 6, plan, Random(0), inner_radius=5)
    with pytest.raises(ValueError):
        generate_pseudo_orbit(golden, 6, plan, Random(0), mode="sideways")


def test_corrupted_field_is_caught(line_space, golden):
    plan = potp_modulus(1, Fraction(1, 8))
    orb = generate_pseudo_orbit(golden, 6, plan, Random(3), mode="exact_orbit")
    entries = list(orb.entries)
    victim = 1  # a layer-one entry; flip its center cell
    cells = list(entries[victim].cells)
    cells[0] = 1 - cells[0]
    entries[victim] = Configuration(line_space, orb.inner_radius, tuple(cells))
    broken = PseudoOrbit(orb.space, orb.sft, orb.radius, orb.inner_radius,
                         orb.delta, tuple(entries), orb.mode, ())
    holds, _, _ = delta_profile(broken)
    assert not holds
    res = verify_trace(broken, construct_trace(broken), plan)
    assert not res.passed


def test_uniqueness_gate_requires_margin(line_space):
    fs = full_shift(line_space)
    plan = potp_modulus(0, Fraction(1, 4))
    orb = generate_pseudo_orbit(fs, 4, plan, Random(0), mode="exact_orbit")
    rep = uniqueness_scan(orb, plan, Fraction(1, 2))
    assert not rep.applicable  # 2 eps equals eta, no strict margin


def test_uniqueness_scan_finds_exactly_one(line_space):
    fs = full_shift(line_space)
    plan = TracingPlan(0, Fraction(1, 8), 2, Fraction(1, 8))
    orb = generate_pseudo_orbit(fs, 4, plan, Random(5), inner_radius=5)
    rep = uniqueness_scan(orb, plan, Fraction(1, 2))
    assert rep.applicable
    assert rep.candidates_scanned == 512
    assert rep.multiplicity == 1
    assert rep.multiplicity_within_core == 1


def test_window_scans_agree_at_small_radius(line_space):
    eta, eps = Fraction(1, 2), Fraction(1, 4)
    flip = separation_window_flip_scan(line_space, eta, eps, 4, 4)
    pairs = separation_window_pair_scan(line_space, full_shift(line_space),
                                        eta, eps, 4, 4)
    assert flip.window == pairs.window == 2
    sampled = separation_window_sampled(line_space, full_shift(line_space),
                                        eta, eps, 4, 4, 200, Random(0))
    assert sampled.window is not None and sampled.window <= 2


def test_exhaustive_window_check_confirms_and_refutes(line_space):
    eta, eps = Fraction(1, 2), Fraction(1, 8)
    scan = separation_window_flip_scan(line_space, eta, eps, 5, 5)
    assert scan.window == 3
    good = separation_window_exhaustive_check(line_space, eta, eps, 3, 5)
    assert good.ok
    assert good.subsets_checked == 2 ** 11 - 1
    bad = separation_window_exhaustive_check(line_space, eta, eps, 2, 5)
    assert not bad.ok and "uncovered" in bad.witness


def test_synthesized_windows_present_the_same_shift(line_space, golden):
    synth = synthesize_window_spec(golden, 2, 2)
    assert synth.window_radius == 3
    assert admissible_sets_agree(golden, synth, 6)


def test_free_group_field_traces(line_space):
    space = ShiftSpace(GroupGeometry(free_rank2_spec()))
    sft = one_forbidden_window_sft(space)
    plan = potp_modulus(1, Fraction(1, 4))
    orb = generate_pseudo_orbit(sft, 3, plan, Random(4), inner_radius=5)
    res = verify_trace(orb, construct_trace(orb), plan)
    assert res.passed and res.admissible


def test_trace_checks_record_comparison_radii(golden):
    plan = potp_modulus(1, Fraction(1, 8))
    orb = generate_pseudo_orbit(golden, 8, plan, Random(6), inner_radius=8)
    res = verify_trace(orb, construct_trace(orb), plan)
    assert res.scan_radius == 4
    for chk in res.checks:
        assert chk.comparison_radius == min(8 - chk.word_length,
                                            orb.inner_radius)
        assert chk.passed

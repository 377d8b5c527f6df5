import numpy as np
import pytest

from ultradiff.distributions import AbsValue, Delta, Gaussian, Heaviside, \
    apply_operator, combine
from ultradiff.errors import SymbolParseError, TrajectoryBlowup
from ultradiff.fbi import PlateauWindow, classical
from ultradiff.symbols import (
    BicharacteristicCurve, CharSample, Polynomial, PolySymbol,
    VectorFieldSystem, admissible_on_characteristics, bicharacteristic,
    char_set, direction_grid, elliptic_inclusion_check,
    from_operator_coefficients, finite_type, hamiltonian_field, lie_bracket,
    noncharacteristic_surface, parse_symbol, poisson_bracket, principal_part,
    save_curve)
from ultradiff.wavefront import estimate_wavefront
from ultradiff.weights import gevrey

RT2I = np.sqrt(0.5)


def _cubics(count):
    """Seeded random integer cubics over (x1, x2, xi1, xi2)."""
    rng = np.random.default_rng(20260823)
    mons = [(a, b, c, d)
            for a in range(4) for b in range(4)
            for c in range(4) for d in range(4) if a + b + c + d <= 3]
    return [Polynomial(4, {m: int(rng.integers(-5, 6)) for m in mons})
            for _ in range(count)]


# ---------------------------------------------------------------------------
# polynomials

def test_polynomial_drops_zero_coefficients():
    p = Polynomial(2, {(1, 0): 1.0, (0, 1): 0.0})
    assert p.terms == {(1, 0): 1.0 + 0j}
    assert not p.is_zero
    assert Polynomial(2).is_zero


def test_polynomial_arithmetic_is_exact_on_integers():
    x = Polynomial.variable(2, 0)
    y = Polynomial.variable(2, 1)
    p = (x + y) * (x - y)
    assert p == x * x - y * y
    assert (p - p).is_zero


def test_polynomial_partial():
    p = parse_symbol("2*x1^2*xi2 - xi1^3").scalar
    assert p.partial(0).terms == {(1, 0, 0, 1): 4.0 + 0j}
    assert p.partial(2).terms == {(0, 0, 2, 0): -3.0 + 0j}
    assert p.partial(1).is_zero


def test_polynomial_evaluate():
    p = parse_symbol("2*x1^2*xi2 - xi1^3").scalar
    assert p((1.0, 0.0, 2.0, 3.0)) == 2 * 3 - 8
    with pytest.raises(ValueError):
        p((1.0, 2.0))


def test_polynomial_scalar_multiples_and_constants():
    x = Polynomial.variable(2, 0)
    assert (3 * x).terms == {(1, 0): 3.0 + 0j}
    assert (x + 1).terms == {(1, 0): 1.0 + 0j, (0, 0): 1.0 + 0j}
    assert Polynomial.constant(2, 0.0).is_zero


def test_polynomial_degree_by_block():
    p = parse_symbol("2*x1^2*xi2 - xi1^3").scalar
    assert p.degree() == 3
    assert p.degree([2, 3]) == 3      # xi block
    assert p.degree([0, 1]) == 2      # x block
    assert Polynomial(4).degree() == -1


def test_polynomial_text_parse_round_trip():
    rng = np.random.default_rng(7)
    mons = [(a, b, c, d)
            for a in range(3) for b in range(3)
            for c in range(3) for d in range(3) if a + b + c + d <= 3]
    for _ in range(5):
        p = Polynomial(4, {m: int(rng.integers(-4, 5)) for m in mons})
        assert parse_symbol(p.to_text(), n=2).scalar == p


def test_polynomial_is_immutable():
    p = Polynomial.variable(2, 0)
    with pytest.raises(AttributeError):
        p.nvars = 3


# ---------------------------------------------------------------------------
# parsing

def test_parse_example_symbol():
    s = parse_symbol("2*x1^2*xi2 - xi1^3")
    assert s.n == 2 and s.size == 1 and s.order == 3


def test_parse_example_symbol_exact_terms():
    p = parse_symbol("2*x1^2*xi2 - xi1^3").scalar
    assert p.terms == {(2, 0, 0, 1): 2.0 + 0j, (0, 0, 3, 0): -1.0 + 0j}


def test_parse_rational_and_imaginary_coefficients():
    assert parse_symbol("3/2*xi1").scalar.terms == {(0, 1): 1.5 + 0j}
    assert parse_symbol("i*xi2 + xi1^2").scalar.terms == {
        (0, 0, 0, 1): 1j, (0, 0, 2, 0): 1.0 + 0j}
    assert parse_symbol("2*i*x1").scalar.terms == {(1, 0): 2j}


def test_parse_matrix_rows_and_entries():
    m = parse_symbol("xi1; 0 | 1; xi2")
    assert m.size == 2 and m.order == 1
    assert m.entries[0][1].is_zero
    assert m.entries[1][0].terms == {(0, 0, 0, 0): 1.0 + 0j}


def test_parse_explicit_dimension():
    p = parse_symbol("xi1", n=2).scalar
    assert p.nvars == 4
    assert p.terms == {(0, 0, 1, 0): 1.0 + 0j}


def test_parse_repeated_variables_merge():
    p = parse_symbol("x1*x1*xi1 + x1^2*xi1").scalar
    assert p.terms == {(2, 1): 2.0 + 0j}


@pytest.mark.parametrize("text, position", [
    ("2**x1", 2),
    ("xi1^", 4),
    ("x0", 0),
    ("2*x1 @ 3", 5),
    ("xi1^3/2", 4),
    ("xi1 +", 5),
])
def test_parse_errors_carry_positions(text, position):
    with pytest.raises(SymbolParseError) as err:
        parse_symbol(text)
    assert err.value.position == position
    assert f"position {position}" in str(err.value)


def test_parse_rejects_ragged_and_nonsquare():
    with pytest.raises(SymbolParseError, match="different numbers"):
        parse_symbol("xi1; xi2 | xi1")
    with pytest.raises(SymbolParseError, match="square"):
        parse_symbol("xi1; xi2")


def test_parse_rejects_index_beyond_declared_dimension():
    with pytest.raises(SymbolParseError) as err:
        parse_symbol("xi3", n=2)
    assert err.value.position == 0


def test_parse_empty_entry():
    with pytest.raises(SymbolParseError, match="empty"):
        parse_symbol("xi1; | xi2; xi1")


def test_operator_coefficient_convention():
    # the same list [1, 0, 1] drives apply_operator (1 - d^2/dx^2) and
    # the symbol 1 + xi^2; both sides of the convention in one place
    sym = from_operator_coefficients([1.0, 0.0, 1.0])
    assert sym.scalar.terms == {(0, 0): 1.0 + 0j, (0, 2): 1.0 + 0j}
    pu = apply_operator([1.0, 0.0, 1.0], combine((1.0, AbsValue())))
    kinds = sorted((type(a).__name__, c) for c, a in pu.terms)
    assert kinds == [("AbsValue", 1.0 + 0j), ("Delta", -2.0 + 0j)]


# ---------------------------------------------------------------------------
# principal parts

def test_principal_part_of_heat_symbol():
    heat = parse_symbol("i*xi2 + xi1^2")
    assert principal_part(heat).scalar.terms == {(0, 0, 2, 0): 1.0 + 0j}


def test_principal_part_drops_lower_order_terms():
    p = parse_symbol("xi1^2 + xi2^2 + x1*xi1 + 1")
    top = principal_part(p).scalar
    assert top.terms == {(0, 0, 2, 0): 1.0 + 0j, (0, 0, 0, 2): 1.0 + 0j}
    assert principal_part(principal_part(p)) == principal_part(p)


def test_principal_part_matrix_uses_common_order():
    m = parse_symbol("xi1; 1 | 0; xi2")
    top = principal_part(m)
    assert top.entries[0][1].is_zero
    assert top.entries[0][0].terms == {(0, 0, 1, 0): 1.0 + 0j}


# ---------------------------------------------------------------------------
# characteristic sets

def test_char_set_laplacian_is_empty():
    cs = char_set(parse_symbol("xi1^2 + xi2^2"), [(0.0, 0.0)])
    assert cs.characteristic_pairs() == ()
    assert cs.mask.shape == (1, 64)


def test_char_set_of_xi1_is_exactly_the_vertical_axis():
    cs = char_set(parse_symbol("xi1", n=2), [(0.0, 0.0)])
    assert cs.characteristic_pairs() == (
        ((0.0, 0.0), (0.0, 1.0)), ((0.0, 0.0), (0.0, -1.0)))


def test_char_set_of_wave_symbol_is_exactly_the_diagonals():
    cs = char_set(parse_symbol("xi1^2 - xi2^2"), [(0.0, 0.0)])
    dirs = tuple(d for _, d in cs.characteristic_pairs())
    assert dirs == ((RT2I, RT2I), (-RT2I, RT2I), (-RT2I, -RT2I),
                    (RT2I, -RT2I))
    # snapped diagonals share one float, so the cancellation is exact
    assert cs.detvals[0, list(cs.directions).index((RT2I, RT2I))] == 0.0


def test_char_mask_is_scale_invariant():
    sym = parse_symbol("xi1^2 - xi2^2")
    base = direction_grid(2)
    cs1 = char_set(sym, [(0.3, -0.2)], base)
    cs2 = char_set(sym, [(0.3, -0.2)], [(2 * a, 2 * b) for a, b in base])
    assert np.array_equal(cs1.mask, cs2.mask)


def test_char_set_reduces_to_principal_part():
    # the lower-order i*xi2 must not disturb the characteristic set
    full = parse_symbol("i*xi2 + xi1^2")
    cs = char_set(full, [(0.0, 0.0)])
    dirs = tuple(d for _, d in cs.characteristic_pairs())
    assert dirs == ((0.0, 1.0), (0.0, -1.0))


def test_char_set_matrix_symbol():
    m = parse_symbol("xi1; 0 | 0; xi2")
    cs = char_set(m, [(0.0, 0.0)])
    dirs = tuple(d for _, d in cs.characteristic_pairs())
    assert dirs == ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))


def test_char_set_one_dimensional_grid():
    cs = char_set(from_operator_coefficients([0.0, 0.0, 1.0]), [0.0, 1.0])
    assert cs.directions == ((1.0,), (-1.0,))
    assert cs.characteristic_pairs() == ()


def test_char_sample_lookup():
    cs = char_set(parse_symbol("xi1", n=2), [(0.0, 0.0)])
    assert cs.is_characteristic((0.0, 0.0), (0.0, 1.0))
    assert not cs.is_characteristic((0.0, 0.0), (1.0, 0.0))
    with pytest.raises(ValueError):
        cs.is_characteristic((5.0, 0.0), (0.0, 1.0))


def test_direction_grid_needs_explicit_directions_beyond_2d():
    with pytest.raises(ValueError):
        direction_grid(3)


def test_matrix_symbols_stop_at_size_three():
    zero = Polynomial(2)
    entries = tuple(tuple(zero for _ in range(4)) for _ in range(4))
    with pytest.raises(ValueError):
        PolySymbol(1, entries)


# ---------------------------------------------------------------------------
# surfaces

def test_laplacian_surfaces_are_never_characteristic():
    lap = parse_symbol("xi1^2 + xi2^2")
    rep = noncharacteristic_surface(lap, lambda x: (1.0, 0.0), (0.0, 0.0))
    assert rep.noncharacteristic
    assert rep.det_value == 1.0
    assert "uniqueness across the surface" in rep.statement


def test_wave_diagonal_surface_is_characteristic():
    wave = parse_symbol("xi1^2 - xi2^2")
    rep = noncharacteristic_surface(wave, lambda x: (1.0, -1.0), (0.0, 0.0))
    assert not rep.noncharacteristic
    assert "does not apply" in rep.statement


def test_surface_verdict_ignores_rescaling_of_phi():
    wave = parse_symbol("xi1^2 - xi2^2")
    for grad in [(1.0, 0.5), (1.0, -1.0)]:
        plain = noncharacteristic_surface(wave, lambda x: grad, (0.0, 0.0))
        scaled = noncharacteristic_surface(
            wave, lambda x: tuple(7.0 * g for g in grad), (0.0, 0.0))
        assert plain.noncharacteristic == scaled.noncharacteristic


def test_surface_requires_a_nonvanishing_gradient():
    lap = parse_symbol("xi1^2 + xi2^2")
    with pytest.raises(ValueError, match="vanishes"):
        noncharacteristic_surface(lap, lambda x: (0.0, 0.0), (0.0, 0.0))


# ---------------------------------------------------------------------------
# brackets

def test_canonical_poisson_bracket():
    x1 = Polynomial.variable(2, 0)
    xi1 = Polynomial.variable(2, 1)
    assert poisson_bracket(xi1, x1).terms == {(0, 0): 1.0 + 0j}
    assert poisson_bracket(x1, xi1).terms == {(0, 0): -1.0 + 0j}


def test_poisson_bracket_hand_example():
    x1 = Polynomial.variable(4, 0)
    xi1 = Polynomial.variable(4, 2)
    xi2 = Polynomial.variable(4, 3)
    br = poisson_bracket(x1 * x1 * xi1, x1 * xi2)
    assert br.terms == {(2, 0, 0, 1): 1.0 + 0j}


def test_poisson_bracket_matches_symbolic_expansion():
    # frozen from an independent computer-algebra expansion of the same
    # seeded integer cubics
    p, q = _cubics(2)
    br = poisson_bracket(p, q)
    assert br.terms[(2, 0, 0, 1)] == 38.0 + 0j
    assert len(br.terms) == 70


def test_poisson_antisymmetry_exact():
    p, q = _cubics(2)
    assert (poisson_bracket(p, q) + poisson_bracket(q, p)).is_zero
    assert poisson_bracket(p, p).is_zero


def test_poisson_jacobi_identity_on_random_cubics():
    polys = _cubics(60)
    for k in range(0, 60, 3):
        p, q, r = polys[k:k + 3]
        jac = poisson_bracket(poisson_bracket(p, q), r) \
            + poisson_bracket(poisson_bracket(q, r), p) \
            + poisson_bracket(poisson_bracket(r, p), q)
        assert jac.is_zero


def test_poisson_rejects_odd_variable_counts():
    with pytest.raises(ValueError):
        poisson_bracket(Polynomial.variable(3, 0), Polynomial.variable(3, 1))


def test_lie_bracket_grushin_generator():
    one = Polynomial.constant(2, 1)
    zero = Polynomial(2)
    x = Polynomial.variable(2, 0)
    dx = (one, zero)
    xdy = (zero, x)
    assert lie_bracket(dx, xdy) == (zero, one)
    assert lie_bracket(xdy, dx) == (zero, -1 * one)
    assert all(c.is_zero for c in lie_bracket(dx, dx))


def test_lie_bracket_commuting_fields():
    one = Polynomial.constant(2, 1)
    zero = Polynomial(2)
    assert all(c.is_zero for c in lie_bracket((one, zero), (zero, one)))


# ---------------------------------------------------------------------------
# finite type

def test_grushin_type_two_at_the_origin():
    one = Polynomial.constant(2, 1)
    zero = Polynomial(2)
    x = Polynomial.variable(2, 0)
    system = VectorFieldSystem(2, ((one, zero), (zero, x)))
    rep = finite_type(system, (0.0, 0.0))
    assert rep.rank_by_length == (1, 2, 2, 2)
    assert rep.type_length == 2
    assert rep.finite


def test_grushin_type_one_off_the_degenerate_line():
    one = Polynomial.constant(2, 1)
    zero = Polynomial(2)
    x = Polynomial.variable(2, 0)
    system = VectorFieldSystem(2, ((one, zero), (zero, x)))
    rep = finite_type(system, (1.0, 0.0))
    assert rep.rank_by_length[0] == 2
    assert rep.type_length == 1


def test_quadratic_degeneracy_needs_three_brackets():
    one = Polynomial.constant(2, 1)
    zero = Polynomial(2)
    x = Polynomial.variable(2, 0)
    system = VectorFieldSystem(2, ((one, zero), (zero, x * x)))
    rep = finite_type(system, (0.0, 0.0))
    assert rep.rank_by_length == (1, 1, 2, 2)
    assert rep.type_length == 3


def test_single_field_never_fills_the_plane():
    one = Polynomial.constant(2, 1)
    zero = Polynomial(2)
    rep = finite_type(VectorFieldSystem(2, ((one, zero),)), (0.0, 0.0))
    assert rep.type_length is None
    assert not rep.finite
    assert all(a <= b for a, b in zip(rep.rank_by_length,
                                      rep.rank_by_length[1:]))


def test_finite_type_bracket_length_is_capped():
    one = Polynomial.constant(2, 1)
    zero = Polynomial(2)
    system = VectorFieldSystem(2, ((one, zero),))
    with pytest.raises(ValueError):
        finite_type(system, (0.0, 0.0), max_length=7)


# ---------------------------------------------------------------------------
# hamiltonian flow

def test_hamiltonian_field_components():
    p = parse_symbol("xi1^2").scalar
    field = hamiltonian_field(p).fields[0]
    assert field[0].terms == {(0, 1): 2.0 + 0j}
    assert field[1].is_zero
    q = parse_symbol("x1*xi1").scalar
    field = hamiltonian_field(q).fields[0]
    assert field[0].terms == {(1, 0): 1.0 + 0j}
    assert field[1].terms == {(0, 1): -1.0 + 0j}


def test_wave_cone_bicharacteristic_is_a_straight_ray():
    wave = parse_symbol("xi1^2 - xi2^2").scalar
    curve = bicharacteristic(wave, (0.0, 0.0, 1.0, 1.0))
    assert curve.on_characteristic
    # frequencies are conserved; positions move at (2, -2)
    assert curve.states[-1] == pytest.approx([20.0, -20.0, 1.0, 1.0],
                                             abs=1e-9)
    assert curve.drift <= 1e-10


def test_off_cone_start_is_flagged_as_a_plain_flow_line():
    wave = parse_symbol("xi1^2 - xi2^2").scalar
    curve = bicharacteristic(wave, (0.0, 0.0, 1.0, 2.0))
    assert not curve.on_characteristic
    assert curve.symbol_start == -3.0
    assert curve.drift <= 1e-10


def test_zero_frequency_start_is_stationary():
    p = parse_symbol("xi1^2").scalar
    curve = bicharacteristic(p, (0.5, 0.0), steps=50)
    assert np.all(curve.states == curve.states[0])


def test_blowup_raises():
    p = Polynomial(2, {(2, 1): 1.0})   # x^2 xi: position obeys xdot = x^2
    with pytest.raises(TrajectoryBlowup, match="trusted region"):
        bicharacteristic(p, (1.0, 1.0))


def test_flow_requires_real_coefficients():
    heat = parse_symbol("i*xi2 + xi1^2").scalar
    with pytest.raises(ValueError, match="real"):
        bicharacteristic(heat, (0.0, 0.0, 1.0, 0.0))


def test_curve_csv_round_trip(tmp_path):
    wave = parse_symbol("xi1^2 - xi2^2").scalar
    curve = bicharacteristic(wave, (0.0, 0.0, 1.0, 1.0), steps=20)
    path = tmp_path / "curve.csv"
    save_curve(curve, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x1,x2,xi1,xi2,p_drift"
    assert len(lines) == 22
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (21, 6)
    assert np.max(np.abs(data[:, 5])) <= 1e-10
    save_curve(curve, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()


# ---------------------------------------------------------------------------
# elliptic inclusion audit

G1 = gevrey(1.0)
P1 = classical(1)
WIN = PlateauWindow(0.0, 0.5, 0.75)
PTS = (-0.5, 0.0, 0.5)
DIRS = (-1.0, 1.0)


def _estimate(u, **kwargs):
    return estimate_wavefront(u, PTS, DIRS, G1, WIN, P1, **kwargs)


@pytest.fixture(scope="module")
def kink_pair():
    u = combine((1.0, AbsValue()))
    pu = apply_operator([1.0, 0.0, 1.0], u)
    return u, pu


def test_inclusion_holds_for_kink_under_elliptic_operator(kink_pair):
    u, pu = kink_pair
    wf_u = _estimate(u, tau_sing=0.35)
    wf_pu = _estimate(pu, tau_sing=0.35)
    char = char_set(from_operator_coefficients([1.0, 0.0, 1.0]), PTS)
    report = elliptic_inclusion_check(wf_u, wf_pu, char)
    assert report.ok
    assert report.violations == ()
    assert report.checked == 6
    assert report.indeterminate == 0
    # the interesting rays really were judged singular on both sides
    assert wf_u.verdict_at(0.0, 1.0) == "SINGULAR"
    assert wf_pu.verdict_at(0.0, -1.0) == "SINGULAR"


def test_inclusion_at_default_thresholds_counts_undecided_rays(kink_pair):
    u, pu = kink_pair
    wf_u = _estimate(u)
    wf_pu = _estimate(pu)
    char = char_set(from_operator_coefficients([1.0, 0.0, 1.0]), PTS)
    report = elliptic_inclusion_check(wf_u, wf_pu, char)
    assert report.ok
    assert report.indeterminate == 2
    assert wf_u.verdict_at(0.0, 1.0) == "INCONCLUSIVE"


def test_inclusion_for_first_order_operator_on_a_jump():
    u = combine((1.0, Heaviside()))
    pu = apply_operator([0.0, 1j], u)     # d/dx, so pu is a point mass
    ((c, atom),) = pu.terms
    assert c == 1.0 + 0j and isinstance(atom, Delta)
    wf_u = _estimate(u, tau_sing=0.35)
    wf_pu = _estimate(pu, tau_sing=0.35)
    char = char_set(from_operator_coefficients([0.0, 1j]), PTS)
    report = elliptic_inclusion_check(wf_u, wf_pu, char)
    assert report.ok and report.indeterminate == 0


def test_inclusion_flags_impossible_configurations():
    # a point mass is singular at the origin while a Gaussian is regular
    # everywhere; under an elliptic symbol that pairing cannot happen
    wf_u = _estimate(Delta())
    wf_smooth = _estimate(Gaussian())
    char = char_set(from_operator_coefficients([1.0, 0.0, 1.0]), PTS)
    report = elliptic_inclusion_check(wf_u, wf_smooth, char)
    assert not report.ok
    assert report.violations == ((0.0, -1.0), (0.0, 1.0))


def test_inclusion_requires_shared_grids():
    wf_u = _estimate(Delta())
    other = estimate_wavefront(Delta(), (0.0,), DIRS, G1, WIN, P1)
    char = char_set(from_operator_coefficients([1.0, 0.0, 1.0]), PTS)
    with pytest.raises(ValueError, match="different grids"):
        elliptic_inclusion_check(wf_u, other, char)


def test_inclusion_requires_covering_characteristic_sample():
    wf_u = _estimate(Delta())
    wf_pu = _estimate(Gaussian())
    char = char_set(from_operator_coefficients([1.0, 0.0, 1.0]), (0.0,))
    with pytest.raises(ValueError, match="cover"):
        elliptic_inclusion_check(wf_u, wf_pu, char)


# ---------------------------------------------------------------------------
# admissibility

def test_admissibility_is_a_sampled_check():
    one = Polynomial.constant(2, 1)
    zero = Polynomial(2)
    char = char_set(parse_symbol("xi1", n=2), [(0.0, 0.0), (1.0, 0.0)])
    tangent = VectorFieldSystem(2, ((one, zero),))    # symbol xi1
    crossing = VectorFieldSystem(2, ((zero, one),))   # symbol xi2
    good = admissible_on_characteristics(tangent, char)
    assert good.ok
    assert good.checked == 4
    assert "sampled" in good.note and "not an algebraic" in good.note
    bad = admissible_on_characteristics(crossing, char)
    assert not bad.ok
    assert bad.worst_by_field == (1.0,)

"""Transition proposals, momentum jumps, the energy filter and weight algebra."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sstp import (
    BathSpec,
    ModelParams,
    PhasePoint,
    SamplingScheme,
    SegmentState,
    SurfacePair,
    discretize_bath,
    energy_residual,
    energy_weight,
    hop_probability,
    propose_hop,
    segment_energy,
    weight_factor,
)
from sstp.hopping import (
    ENERGY_CONSERVING,
    EXACT_RESCALE,
    FIRST_ORDER_SHIFT,
    PRIMITIVE,
    HopProposal,
    ZeroCouplingError,
)


def _unit_bath(freq=1.0, coup=1.0):
    return BathSpec(1, np.array([freq]), np.array([coup]), 1.0, 3.0)


def _state(R, P, ket, bra):
    return SegmentState(
        point=PhasePoint(R=np.asarray(R, float), P=np.asarray(P, float)),
        pair=SurfacePair(ket, bra),
    )


def test_scheme_validation():
    with pytest.raises(ValueError):
        SamplingScheme(variant="bogus")
    with pytest.raises(ValueError):
        SamplingScheme(variant=ENERGY_CONSERVING, c_energy=0.0)
    with pytest.raises(ValueError):
        SamplingScheme(jump_rule="bogus")
    SamplingScheme(variant=PRIMITIVE, c_energy=-1.0)  # unused for primitive


def test_first_order_shift_reference_value():
    """Uphill jump with component 2 along the coupling direction and a
    mean-surface change of 0.5 leaves a residual of exactly 0.03125."""
    model = ModelParams(omega_tunnel=0.3, kondo_xi=0.1, beta=1.0)
    bath = _unit_bath()
    # gamma = 0.4 so the gap half is 0.5; ket side on surface 1 goes uphill
    state = _state([0.4], [2.0], 1, 2)
    prop = propose_hop(state, "ket", 0.05, model, bath, FIRST_ORDER_SHIFT)
    assert prop.target == 2
    assert prop.shifted_momenta[0] == pytest.approx(1.75, rel=1e-14)
    assert prop.energy_residual == pytest.approx(0.03125, rel=1e-12)
    # cross-check against the standalone residual formula
    direct = energy_residual(
        state.point.P,
        prop.shifted_momenta,
        SurfacePair(1, 2),
        SurfacePair(2, 2),
        state.point.R,
        model,
        bath,
    )
    assert direct == pytest.approx(prop.energy_residual, abs=1e-14)


def test_exact_rescale_frustration():
    """(d.P)^2 < 2*dE leaves no real rescale solution."""
    model = ModelParams(omega_tunnel=0.6, kondo_xi=0.1, beta=1.0)
    bath = _unit_bath()
    state = _state([0.8], [1.0], 1, 1)  # gap half 1, uphill dE = +1
    prop = propose_hop(state, "ket", 0.05, model, bath, EXACT_RESCALE)
    assert prop.frustrated
    assert prop.shifted_momenta is None
    for scheme in (SamplingScheme(PRIMITIVE), SamplingScheme(ENERGY_CONSERVING)):
        assert hop_probability(prop, scheme) == 0.0
        assert weight_factor(prop, scheme, accepted=False) == 1.0
        with pytest.raises(ValueError):
            weight_factor(prop, scheme, accepted=True)


def test_exact_rescale_conserves_energy(rng, strong_model):
    bath = discretize_bath(strong_model, n_modes=6)
    for _ in range(200):
        R = rng.normal(0, 2, 6)
        P = rng.normal(0, 2, 6)
        ket, bra = rng.integers(1, 3, 2)
        side = "ket" if rng.random() < 0.5 else "bra"
        state = _state(R, P, int(ket), int(bra))
        prop = propose_hop(state, side, 0.01, strong_model, bath, EXACT_RESCALE)
        if prop.frustrated:
            continue
        assert abs(prop.energy_residual) < 1e-12
        new_pair = (
            SurfacePair(prop.target, state.pair.bra)
            if side == "ket"
            else SurfacePair(state.pair.ket, prop.target)
        )
        before = segment_energy(state, strong_model, bath)
        after = segment_energy(
            SegmentState(
                point=PhasePoint(R=R, P=prop.shifted_momenta), pair=new_pair
            ),
            strong_model,
            bath,
        )
        assert abs(after - before) < 1e-10
        # kinetic change equals minus the mean-surface change
        dk = 0.5 * (prop.shifted_momenta @ prop.shifted_momenta - P @ P)
        g = float(bath.couplings @ R)
        G = float(np.hypot(strong_model.omega_tunnel, g))
        cur = state.pair.ket if side == "ket" else state.pair.bra
        de = G if cur == 1 else -G
        assert dk == pytest.approx(-de, rel=1e-10)


def test_residual_consistency_first_order_shift(rng, strong_model):
    bath = discretize_bath(strong_model, n_modes=6)
    for _ in range(200):
        R = rng.normal(0, 2, 6)
        P = rng.normal(0, 2, 6)
        ket, bra = (int(v) for v in rng.integers(1, 3, 2))
        side = "ket" if rng.random() < 0.5 else "bra"
        state = _state(R, P, ket, bra)
        prop = propose_hop(state, side, 0.01, strong_model, bath, FIRST_ORDER_SHIFT)
        assert prop.rate_x == abs(prop.matrix_element)
        if prop.frustrated:
            continue
        new_pair = (
            SurfacePair(prop.target, bra) if side == "ket" else SurfacePair(ket, prop.target)
        )
        direct = energy_residual(
            P, prop.shifted_momenta, SurfacePair(ket, bra), new_pair, R,
            strong_model, bath,
        )
        assert direct == pytest.approx(prop.energy_residual, rel=1e-10, abs=1e-12)
        # only the component along the coupling direction moves
        c = bath.couplings / np.linalg.norm(bath.couplings)
        perp = (prop.shifted_momenta - P) - c * float(c @ (prop.shifted_momenta - P))
        assert np.max(np.abs(perp)) < 1e-12


def test_identity_transition_residual_is_zero(strong_model, rng):
    bath = discretize_bath(strong_model, n_modes=4)
    R, P = rng.normal(size=4), rng.normal(size=4)
    pair = SurfacePair(2, 1)
    assert energy_residual(P, P, pair, pair, R, strong_model, bath) == 0.0


def test_energy_weight_window():
    assert energy_weight(0.005, 0.01) == 1
    assert energy_weight(0.02, 0.01) == 0
    assert energy_weight(0.01, 0.01) == 1  # boundary is inside the window
    assert energy_weight(-0.01, 0.01) == 1
    with pytest.raises(ValueError):
        energy_weight(0.0, 0.0)


def _proposal(x, resid=0.0, frustrated=False):
    return HopProposal(
        which_index="ket",
        target=2,
        rate_x=x,
        shifted_momenta=None if frustrated else np.zeros(1),
        energy_residual=resid,
        matrix_element=-x,
    )


def test_hop_probability_values():
    prim = SamplingScheme(PRIMITIVE)
    ec = SamplingScheme(ENERGY_CONSERVING, c_energy=0.01)
    assert hop_probability(_proposal(0.0), prim) == 0.0
    assert hop_probability(_proposal(0.0), ec) == 0.0
    assert hop_probability(_proposal(1.0), prim) == 0.5
    assert hop_probability(_proposal(1.0, resid=0.005), ec) == 0.5
    assert hop_probability(_proposal(1.0, resid=0.02), ec) == 0.0


def test_weight_factor_values():
    prim = SamplingScheme(PRIMITIVE)
    assert weight_factor(_proposal(0.0), prim, accepted=False) == 1.0
    assert abs(weight_factor(_proposal(1.0), prim, accepted=True)) == pytest.approx(2.0)
    assert weight_factor(_proposal(1.0), prim, accepted=False) == pytest.approx(2.0)


@settings(max_examples=200, deadline=None)
@given(
    x=st.floats(1e-12, 1e6),
    filtered=st.booleans(),
    accepted=st.booleans(),
)
def test_weight_magnitude_per_step(x, filtered, accepted):
    """Either branch carries magnitude exactly 1 + x*w."""
    scheme = SamplingScheme(ENERGY_CONSERVING, c_energy=0.01)
    resid = 0.02 if filtered else 0.0
    prop = _proposal(x, resid=resid)
    w = 0 if filtered else 1
    if accepted and x * w == 0.0:
        return
    factor = abs(weight_factor(prop, scheme, accepted=accepted))
    # forming 1 - p amplifies rounding by about (1 + x) on the no-hop branch
    assert factor == pytest.approx(1.0 + x * w, rel=1e-12 * (1.0 + x))


def test_zero_coupling_rejected(uncoupled_model, rng):
    bath = discretize_bath(uncoupled_model, n_modes=3)
    state = _state(rng.normal(size=3), rng.normal(size=3), 1, 1)
    with pytest.raises(ZeroCouplingError):
        propose_hop(state, "ket", 0.01, uncoupled_model, bath)


def test_propose_hop_argument_validation(strong_model, small_bath, rng):
    state = _state(rng.normal(size=8), rng.normal(size=8), 1, 1)
    with pytest.raises(ValueError):
        propose_hop(state, "middle", 0.01, strong_model, small_bath)
    with pytest.raises(ValueError):
        propose_hop(state, "ket", 0.0, strong_model, small_bath)
    with pytest.raises(ValueError):
        propose_hop(state, "ket", 0.01, strong_model, small_bath, "bogus")

import math

import numpy as np
import pytest
from scipy import optimize

from orlicz_kit import nfunction as nf


def brute_conjugate(G, s, t_max=2000.0, n=2_000_001):
    """sup_t (s t - G(t)) on a dense grid, refined by a bounded scalar search."""
    t = np.linspace(0.0, t_max, n)
    with np.errstate(over="ignore", invalid="ignore"):
        vals = s * t - G(t)
    vals = np.where(np.isfinite(vals), vals, -np.inf)
    j = int(np.argmax(vals))
    lo, hi = t[max(j - 1, 0)], t[min(j + 1, n - 1)]
    res = optimize.minimize_scalar(lambda x: -(s * x - G(x)), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-13})
    return max(-res.fun, vals[j])


# -- registry and evaluation ---------------------------------------------------


def test_power_default_and_coef():
    G = nf.power(3.0)
    assert G(2.0) == pytest.approx(8 / 3)
    assert G.g(2.0) == pytest.approx(4.0)
    H = nf.power(2.0, coef=5.0)
    assert H(3.0) == pytest.approx(45.0)
    assert H.inverse(45.0) == pytest.approx(3.0)


@pytest.mark.parametrize("alpha", [1.0, 0.5, -2.0])
def test_power_rejects_small_exponent(alpha):
    with pytest.raises(ValueError):
        nf.power(alpha)


def test_negative_argument_is_domain_error():
    with pytest.raises(ValueError, match="domain"):
        nf.power(2.0)(-1.0)
    with pytest.raises(ValueError, match="domain"):
        nf.exp_minus().inverse(np.array([1.0, -0.5]))


def test_scalar_and_array_shapes():
    G = nf.exp_minus()
    assert isinstance(G(1.0), float)
    out = G(np.ones((3, 4)))
    assert out.shape == (3, 4)


def test_exp_minus_and_llog_small_arguments():
    t = np.array([1e-9, 1e-5, 5e-4])
    assert np.allclose(nf.exp_minus()(t), t**2 / 2 + t**3 / 6, rtol=1e-10)
    assert np.allclose(nf.llog()(t), t**2 / 2 - t**3 / 6, rtol=1e-10)


def test_llog_value_at_one():
    assert nf.llog()(1.0) == pytest.approx(2 * math.log(2) - 1, rel=1e-14)


@pytest.mark.parametrize("name,G", list(nf.builtins().items()))
def test_builtins_satisfy_axioms(name, G):
    assert G.check_invariants()["ok"], name


def test_power_log_valid_only_from_one():
    G = nf.power_log(2.0)
    assert G.valid_from == 1.0
    assert G.check_invariants()["ok"]
    assert G(1.0) == pytest.approx(1.0)


def test_primitive_matches_quadrature_of_density():
    for G in nf.builtins().values():
        quad = nf.NFunction(G.g, name="quad", validate=False)
        t = np.array([0.1, 0.7, 1.9])
        assert np.allclose(quad(t), G(t), rtol=1e-9)


def test_inverse_round_trip():
    for G in nf.builtins().values():
        t = np.geomspace(1e-3, 3.0, 40)
        assert np.allclose(G.inverse(G(t)), t, rtol=1e-10)


def test_inverse_by_bisection_matches_closed_form():
    G = nf.power(2.5)
    generic = nf.NFunction(G.g, G._G, name="generic", validate=False)
    y = np.geomspace(1e-6, 1e6, 50)
    assert np.allclose(generic.inverse(y), G.inverse(y), rtol=1e-12)


def test_tabulated_is_piecewise_quadratic():
    G = nf.tabulated([[1.0, 1.0], [2.0, 3.0]])
    # g = t on [0,1], 1 + 2(t-1) on [1,2], continued with slope 2
    assert G(1.0) == pytest.approx(0.5)
    assert G(2.0) == pytest.approx(0.5 + 1.0 + 1.0)
    assert G(3.0) == pytest.approx(2.5 + 3.0 + 1.0)
    with pytest.raises(ValueError):
        nf.tabulated([[1.0, 2.0], [2.0, 1.0]])


def test_compose_and_linear_combination():
    P2, P3 = nf.power(2.0), nf.power(3.0)
    C = nf.compose(P2, P3)
    assert C(2.0) == pytest.approx(P2(P3(2.0)))
    L = nf.linear_combination([2.0, 1.0], [P2, P3])
    assert L(1.5) == pytest.approx(2 * P2(1.5) + P3(1.5))
    with pytest.raises(ValueError):
        nf.linear_combination([1.0, -1.0], [P2, P3])


@pytest.mark.parametrize("G", [nf.power(2.0, 3.0), nf.exp_minus(), nf.tabulated([[1, 1], [2, 4]]),
                               nf.linear_combination([1.0, 2.0], [nf.power(2.0), nf.llog()])])
def test_config_round_trip(G):
    H = nf.from_config(G.to_config())
    t = np.linspace(0, 5, 11)
    assert np.allclose(H(t), G(t))


def test_parse_gspec():
    assert nf.parse_gspec("power:2")(3.0) == pytest.approx(4.5)
    assert nf.parse_gspec("exp_power:3").params["p"] == 3.0
    for bad in ("nope", "exp_minus:2", "power:x"):
        with pytest.raises(ValueError):
            nf.parse_gspec(bad)


# -- conjugates ----------------------------------------------------------------


@pytest.mark.parametrize("name", ["power(1.5)", "power(3)", "exp_minus", "llog", "exp_power(2)"])
def test_conjugate_against_brute_force_sup(name):
    G = nf.builtins()[name]
    Gs = G.conjugate()
    for s in (0.3, 1.0, 2.5, 7.0):
        assert Gs(s) == pytest.approx(brute_conjugate(G, s), rel=1e-7, abs=1e-12)


def test_scaled_power_conjugate_closed_form():
    G = nf.power(3.0, coef=2.0)
    closed, generic = G.conjugate(), G.conjugate(closed_form=False)
    s = np.linspace(0, 10, 41)
    assert np.allclose(closed(s), generic(s), rtol=1e-12, atol=1e-14)


def test_conjugate_of_exp_minus_is_llog():
    assert nf.exp_minus().conjugate().params["kind"] == "llog"
    assert nf.llog().conjugate().params["kind"] == "exp_minus"


def test_conjugate_density_is_generalised_inverse():
    G = nf.power(3.0)
    s = np.array([0.5, 2.0, 9.0])
    assert np.allclose(G.g(G.conjugate_density(s)), s)


def test_young_gap_zero_at_density():
    G = nf.exp_minus()
    a = np.linspace(0, 4, 9)
    assert np.allclose(nf.young_gap(G, a, G.g(a)), 0.0, atol=1e-10 * np.maximum(1, a * G.g(a)).max())


# -- Delta_2 -------------------------------------------------------------------


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_delta2_power(p):
    rep = nf.delta2_check(nf.power(p, coef=3.0))
    assert rep.satisfied
    assert rep.k == pytest.approx(2**p, rel=1e-9)
    assert rep.T == 0.0
    assert rep.p_bound == pytest.approx(p, rel=1e-9)


def test_delta2_power_log():
    rep = nf.delta2_check(nf.power_log(2.0))
    assert rep.satisfied
    assert rep.p_bound == pytest.approx(3.0, rel=1e-9)
    assert rep.t0 == 1.0
    assert rep.T == 1.0


@pytest.mark.parametrize("G", [nf.exp_minus(), nf.exp_power(2.0)])
def test_delta2_exponential_fails(G):
    assert not nf.delta2_check(G).satisfied


def test_delta2_bad_range():
    with pytest.raises(ValueError):
        nf.delta2_check(nf.power(2.0), probe_range=(0.0, 10.0))


# -- comparisons ---------------------------------------------------------------


def test_compare_equivalent_scalings():
    v = nf.compare(nf.power(2.0), nf.power(2.0, coef=7.0))
    assert v.relation == "equivalent"
    # c t^2 <= (b t)^2 / 2 needs b = sqrt(14)
    assert v.witness_constants["b"] == pytest.approx(math.sqrt(14.0), rel=1e-6)


def test_compare_power_log_slower_than_higher_power():
    v = nf.compare(nf.power(2.5), nf.power_abslog(2.0))
    assert v.relation == "strictly_slower"


def test_compare_exponential_not_dominated_by_power():
    v = nf.compare(nf.power(4.0), nf.exp_minus(), probe_range=(1.0, 100.0))
    assert v.relation == "incomparable_on_range"


def test_compare_dominates_one_way():
    v = nf.compare(nf.exp_minus(), nf.power(2.0), probe_range=(1.0, 50.0))
    assert v.relation in ("dominates", "strictly_slower")
    assert v.witness_constants["c"] <= 1.0 + 1e-6


# -- Sobolev conjugate -----------------------------------------------------------


def test_sobolev_power_closed_form():
    # G = t^2/2, N = 3: G^{-1}(tau) = sqrt(2 tau), G_*^{-1}(t) = 6 sqrt(2) t^{1/6}
    S = nf.sobolev_conjugate(nf.power(2.0), 3)
    assert not S.extended
    s = np.array([0.5, 3.0, 12.0, 40.0])
    assert np.allclose(S(s), (s / (6 * math.sqrt(2))) ** 6, rtol=1e-8)
    assert np.allclose(S.inverse(S(s)), s, rtol=1e-8)


def test_sobolev_conditions_power():
    cond = nf.sobolev_conditions(nf.power(2.0), 3)
    assert cond["near_zero_finite"] and cond["tail_divergent"]
    assert cond["head_exponent"] == pytest.approx(0.5 - 4 / 3, abs=1e-3)
    sums = list(cond["partial_sums"].values())
    assert sums == sorted(sums)


def test_sobolev_extended_case():
    # G^{-1}(tau) ~ log tau at infinity, so the integral converges for N = 3
    S = nf.sobolev_conjugate(nf.exp_minus(), 3)
    assert S.extended
    assert 10.0 < S.M < 30.0
    assert math.isinf(S(S.M * 1.01))
    assert np.isfinite(S(0.5 * S.M))


def test_sobolev_undefined_near_zero():
    with pytest.raises(ValueError, match="undefined near zero"):
        nf.sobolev_conjugate(nf.exp_minus(), 1)


def test_sobolev_numeric_M_against_quad():
    from scipy import integrate

    # substitute tau = G(x): M = int_0^inf x g(x) G(x)^{-4/3} dx
    head = lambda x: x * np.expm1(x) * (np.expm1(x) - x) ** (-4 / 3)
    tail = lambda x: x * -np.expm1(-x) * np.exp(-x / 3) * (1 - (x + 1) * np.exp(-x)) ** (-4 / 3)
    ref = integrate.quad(head, 0, 1)[0] + integrate.quad(tail, 1, np.inf)[0]
    assert nf.sobolev_conjugate(nf.exp_minus(), 3).M == pytest.approx(ref, rel=1e-6)

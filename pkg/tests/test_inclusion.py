import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foamopt.inclusion import (LAMBDA_CAP, EagState, InclusionProblem,
                               InnerBudgetExceeded, SolverAbort, beta_product,
                               eag_beta, eag_init, eag_lambda, eag_lyapunov,
                               eag_solve, eag_step)
from foamopt.oracle import ContractError, prox_box, prox_zero
from foamopt.problems import make_affine_inclusion


def identity_problem(d=1):
    return InclusionProblem(apply_a=lambda u: u.copy(), resolvent_b=prox_zero,
                            lip_m=1.0)


def rotation_problem():
    return InclusionProblem(apply_a=lambda u: np.array([u[1], -u[0]]),
                            resolvent_b=prox_zero, lip_m=1.0)


# ---------------------------------------------------------------- constants

def test_beta_examples():
    assert eag_beta(0) == pytest.approx(2 / 3, abs=1e-15)
    assert eag_beta(1) == 0.5
    assert eag_beta(7) == pytest.approx(0.2, abs=1e-15)
    with pytest.raises(ContractError):
        eag_beta(-1)


def test_lambda_examples():
    assert eag_lambda(1.0) == pytest.approx(0.447213595499958, rel=1e-14)
    assert eag_lambda(math.sqrt(5)) == pytest.approx(0.2, rel=1e-14)
    assert eag_lambda(10.0) == pytest.approx(0.0447213595499958, rel=1e-14)
    assert eag_lambda(1e-12) == LAMBDA_CAP
    with pytest.raises(ContractError):
        eag_lambda(0.0)


def test_beta_product_examples():
    assert beta_product(1) == pytest.approx(1 / 3, rel=1e-15)
    assert beta_product(2) == pytest.approx(1 / 6, rel=1e-15)
    assert beta_product(10) == pytest.approx(2 / 132, rel=1e-14)
    with pytest.raises(ContractError):
        beta_product(0)


# ---------------------------------------------------------------- init / step

def test_init_identity_operator():
    st0 = eag_init(identity_problem(), np.array([1.0]), 0.5)
    np.testing.assert_allclose(st0.u0, [0.5])
    np.testing.assert_allclose(st0.a, [0.5])
    np.testing.assert_allclose(st0.b, [0.0])
    assert st0.t == 0


@pytest.mark.parametrize("lam", [0.1, 1.0, 7.0])
def test_init_projection(lam):
    prob = InclusionProblem(apply_a=lambda u: np.zeros_like(u),
                            resolvent_b=prox_box([-1.0], [1.0]), lip_m=1.0)
    st0 = eag_init(prob, np.array([3.0]), lam)
    np.testing.assert_allclose(st0.u0, [1.0])
    np.testing.assert_allclose(st0.b, [2.0 / lam])


def test_init_zero_b_for_smooth_problem():
    prob, _, _ = make_affine_inclusion(8, "zero", seed=3)
    st0 = eag_init(prob, np.ones(8), 0.1)
    np.testing.assert_array_equal(st0.b, np.zeros(8))


def test_init_rejects_bad_lambda():
    with pytest.raises(ContractError):
        eag_init(identity_problem(), np.array([1.0]), 0.0)


def test_init_aborts_on_non_finite_operator():
    prob = InclusionProblem(apply_a=lambda u: u * np.nan,
                            resolvent_b=prox_zero, lip_m=1.0)
    with pytest.raises(SolverAbort):
        eag_init(prob, np.array([1.0]), 0.1)


def test_step_with_zero_operators_stays_at_anchor():
    prob = InclusionProblem(apply_a=lambda u: np.zeros_like(u),
                            resolvent_b=prox_zero, lip_m=1.0)
    st = eag_init(prob, np.array([1.0]), 0.3)
    for _ in range(5):
        st = eag_step(prob, st, 0.3)
        np.testing.assert_array_equal(st.u, [1.0])


def test_step_keeps_a_consistent():
    prob, _, _ = make_affine_inclusion(6, "l1", seed=1)
    lam = eag_lambda(prob.lip_m)
    st = eag_init(prob, np.zeros(6), lam)
    for _ in range(10):
        st = eag_step(prob, st, lam)
        np.testing.assert_allclose(st.a, prob.apply_a(st.u), atol=1e-13)


def _replay_rotation(T, dps=50):
    """The same recursion in mpmath, for the 2-D rotation with B = 0."""
    mpmath.mp.dps = dps
    lam = 1 / mpmath.sqrt(5)
    rot = lambda u: [u[1], -u[0]]
    u_init = [mpmath.mpf(1), mpmath.mpf(0)]
    a_init = rot(u_init)
    u0 = [u_init[i] - lam * a_init[i] for i in range(2)]
    u, a = list(u0), rot(u0)
    b = [mpmath.mpf(0)] * 2
    out = [mpmath.sqrt(sum((a[i] + b[i]) ** 2 for i in range(2)))]
    for t in range(T):
        beta = mpmath.mpf(2) / (t + 3)
        anc = [u[i] + beta * (u0[i] - u[i]) for i in range(2)]
        half = [anc[i] - lam * (a[i] + b[i]) for i in range(2)]
        ah = rot(half)
        u = [anc[i] - lam * ah[i] for i in range(2)]
        a = rot(u)
        out.append(mpmath.sqrt(sum(a[i] ** 2 for i in range(2))))
    return [float(v) for v in out], [float(v) for v in u]


def test_rotation_matches_extended_precision_replay():
    T = 200
    res = eag_solve(rotation_problem(), np.array([1.0, 0.0]), iters=T,
                    keep_history=True)
    ref_norms, ref_u = _replay_rotation(T)
    norms = [float(np.linalg.norm(s.residual)) for s in res.history]
    np.testing.assert_allclose(norms, ref_norms, rtol=0, atol=1e-10)
    np.testing.assert_allclose(res.u, ref_u, rtol=0, atol=1e-12)


# ---------------------------------------------------------------- solve

def test_residual_identity_example():
    res = eag_solve(identity_problem(), np.array([1.0]), iters=50)
    assert res.residual @ res.residual <= 288 / 51**2


def test_solution_is_fixed_point():
    prob, u_star, _ = make_affine_inclusion(10, "box", seed=5)
    res = eag_solve(prob, u_star, iters=30, keep_history=True)
    for st in res.history:
        assert np.linalg.norm(st.residual) <= 1e-12


def test_mode_arguments():
    prob = identity_problem()
    with pytest.raises(ContractError):
        eag_solve(prob, np.array([1.0]))
    with pytest.raises(ContractError):
        eag_solve(prob, np.array([1.0]), iters=3, stop=lambda s: True,
                  max_iters=5)
    with pytest.raises(ContractError):
        eag_solve(prob, np.array([1.0]), stop=lambda s: True)
    with pytest.raises(ContractError):
        eag_solve(prob, np.array([1.0]), iters=0)


def test_predicate_checked_at_t0():
    res = eag_solve(identity_problem(), np.array([1.0]),
                    stop=lambda s: True, max_iters=5)
    assert res.iters == 0


def test_predicate_budget_error_carries_state():
    with pytest.raises(InnerBudgetExceeded) as info:
        eag_solve(identity_problem(), np.array([1.0]),
                  stop=lambda s: False, max_iters=7)
    assert isinstance(info.value.state, EagState)
    assert info.value.state.t == 7


@pytest.mark.parametrize("T", [1, 5, 40])
def test_cost_accounting(T):
    prob, _, _ = make_affine_inclusion(5, "l1", seed=2)
    eag_solve(prob, np.zeros(5), iters=T)
    # one A call at u_init and one at u0, then two per step
    assert prob.a_calls == 2 * T + 2
    assert prob.resolvent_calls == T + 1


# ---------------------------------------------------------------- properties

@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["zero", "box", "l1"]),
       st.integers(2, 30))
def test_residual_bound_and_lyapunov(seed, kind, d):
    prob, u_star, _ = make_affine_inclusion(d, kind, seed=seed)
    lam = eag_lambda(prob.lip_m)
    u_init = np.random.default_rng(seed).standard_normal(d)
    res = eag_solve(prob, u_init, iters=60, lam=lam, keep_history=True)
    m2d = prob.lip_m**2 * float((u_init - u_star) @ (u_init - u_star))
    for T, st in enumerate(res.history[1:], start=1):
        r = st.residual
        assert r @ r <= 288 * m2d / (T + 1) ** 2 + 1e-9
    for cur, nxt in zip(res.history[:-1], res.history[1:]):
        r = nxt.residual
        scale = abs(r @ (nxt.u - nxt.u0)) + lam / (2 * eag_beta(nxt.t)) * (r @ r)
        assert (eag_lyapunov(nxt, lam)
                <= (1 - eag_beta(cur.t)) * eag_lyapunov(cur, lam) + 1e-9 * scale)
    # anchor-start inequality
    first = res.history[0]
    e0 = first.u - u_star
    r0 = first.residual
    assert (96 * prob.lip_m**2 * (e0 @ e0) + 12 * (r0 @ r0)
            <= 288 * m2d * (1 + 1e-12))


def test_lyapunov_examples():
    st = EagState(u0=np.zeros(2), u=np.ones(2), a=np.zeros(2), b=np.zeros(2), t=4)
    assert eag_lyapunov(st, 0.3) == 0.0
    r = np.array([1.0, -2.0])
    st = EagState(u0=np.ones(2), u=np.ones(2), a=r, b=np.zeros(2), t=0)
    assert eag_lyapunov(st, 0.4) == pytest.approx(0.4 * 0.75 * 5.0, rel=1e-15)


@pytest.mark.parametrize("kind", ["zero", "box", "l1"])
def test_certificate_satisfies_subgradient_inequality(kind):
    prob, _, prox = make_affine_inclusion(12, kind, seed=9)
    res = eag_solve(prob, np.zeros(12), iters=25)
    u, b = res.u, res.b
    rng = np.random.default_rng(10)
    for _ in range(100):
        w = rng.uniform(-1, 1, 12)  # inside the box, so h(w) is finite
        assert prox.value(w) >= prox.value(u) + b @ (w - u) - 1e-9


def test_monotone_operator_on_samples():
    prob, _, _ = make_affine_inclusion(15, "zero", seed=11)
    rng = np.random.default_rng(12)
    for _ in range(200):
        u1, u2 = rng.standard_normal((2, 15))
        assert (prob.apply_a(u1) - prob.apply_a(u2)) @ (u1 - u2) >= -1e-9

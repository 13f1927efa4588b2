import numpy as np
import pytest

from pinchsim import (ChannelSample, PinchingLayout, SystemConfig, default_schedule,
                      effective_channel, grad_x_fixed_w, run_long_term, smooth_update,
                      solve_subproblem, sum_rate, update_surrogate, wmmse_solve)
from pinchsim.checks import random_feasible_layout
from pinchsim.longterm import SurrogateState, trace_to_csv


def test_default_schedule_domains():
    sched = default_schedule()
    rho = np.array([sched.rho(t) for t in range(1000)])
    gam = np.array([sched.gamma(t) for t in range(1000)])
    assert rho[0] == 1.0 and gam[0] == 1.0
    assert np.all((rho > 0) & (rho <= 1.0))
    assert np.all((gam > 0) & (gam <= 1.0))
    assert np.all(np.diff(rho) <= 0)
    assert np.all(np.diff(gam) <= 0)
    # blending decays faster than averaging: gamma/rho falls like t^-0.1
    # (with these constants the ratio peaks near t=35 before decaying)
    ratio = gam / rho
    assert np.all(np.diff(ratio[50:]) < 0)
    expect = (15 / (15 + 999)) / (10 / (10 + 999) ** 0.9) \
        / ((15 / (15 + 10)) / (10 / (10 + 10) ** 0.9))
    assert ratio[-1] / ratio[10] == pytest.approx(expect, rel=1e-12)
    # partial sums: harmonic-style divergence vs square summability
    assert gam.sum() > 4.0
    assert (gam ** 2).sum() < 15.0 * np.pi ** 2 / 6


def test_surrogate_recursion_base_case(cfg):
    state = SurrogateState.initial(cfg)
    assert state.f == 0.0 and state.t == -1
    g = [2.0, 4.0]
    gx = [np.ones((cfg.waveguides, cfg.pas_per_guide)),
          3 * np.ones((cfg.waveguides, cfg.pas_per_guide))]
    gw = [np.zeros((cfg.waveguides, cfg.pas_per_guide))] * 2
    new = update_surrogate(state, 1.0, g, gx, gw)
    assert new.f == pytest.approx(3.0)
    assert np.allclose(new.f_x, 2.0)
    assert new.t == 0


def test_surrogate_recursion_two_steps(cfg):
    shape = (cfg.waveguides, cfg.pas_per_guide)
    state = SurrogateState.initial(cfg)
    state = update_surrogate(state, 0.5, [2.0], [np.zeros(shape)], [np.zeros(shape)])
    assert state.f == pytest.approx(1.0)  # (1-rho)*0 + rho*2
    state = update_surrogate(state, 0.5, [4.0], [np.zeros(shape)], [np.zeros(shape)])
    assert state.f == pytest.approx(0.5 * 1.0 + 0.5 * 4.0)


def test_surrogate_converges_on_constant_batches(cfg):
    # with identical batches every step, f approaches the batch value
    sched = default_schedule()
    shape = (cfg.waveguides, cfg.pas_per_guide)
    state = SurrogateState.initial(cfg)
    for t in range(200):
        state = update_surrogate(state, sched.rho(t), [-7.5],
                                 [np.zeros(shape)], [np.zeros(shape)])
    assert abs(state.f - (-7.5)) < 1e-3


def test_surrogate_rejects_empty_batch(cfg):
    state = SurrogateState.initial(cfg)
    with pytest.raises(ValueError):
        update_surrogate(state, 1.0, [], [], [])


def test_surrogate_linear_coefficient(cfg):
    # b = f_x + f_w matches the collected linear term of the surrogate
    shape = (cfg.waveguides, cfg.pas_per_guide)
    rng = np.random.default_rng(0)
    state = SurrogateState.initial(cfg)
    rho = 0.3
    prev_fx = rng.standard_normal(shape)
    state.f_x = prev_fx.copy()
    gx = [rng.standard_normal(shape) for _ in range(3)]
    gw = [rng.standard_normal(shape) for _ in range(3)]
    new = update_surrogate(state, rho, [1.0, 2.0, 3.0], gx, gw)
    expect = rho * np.mean(gx, axis=0) + (1 - rho) * prev_fx + new.f_w
    assert np.allclose(new.b, expect)


def test_solve_subproblem_zero_coefficient_fixed_point(cfg):
    layout = PinchingLayout.grid(cfg)
    state = SurrogateState.initial(cfg, tau=1.0)
    got = solve_subproblem(cfg, layout, state)
    assert np.allclose(got.x, layout.x)


def test_solve_subproblem_feasible_output(cfg):
    rng = np.random.default_rng(1)
    layout = PinchingLayout.grid(cfg)
    for _ in range(20):
        state = SurrogateState.initial(cfg, tau=1e-2)
        state.f_x = rng.standard_normal(layout.x.shape) * 50
        solve_subproblem(cfg, layout, state).validate(cfg)


def test_smooth_update_endpoints(cfg):
    rng = np.random.default_rng(2)
    a = random_feasible_layout(cfg, rng)
    b = random_feasible_layout(cfg, rng)
    assert np.allclose(smooth_update(a, b, 1.0).x, b.x)
    assert np.allclose(smooth_update(a, a, 0.5).x, a.x)
    with pytest.raises(ValueError):
        smooth_update(a, b, 0.0)


def test_smooth_update_preserves_feasibility(cfg):
    rng = np.random.default_rng(3)
    for _ in range(1000):
        a = random_feasible_layout(cfg, rng)
        b = random_feasible_layout(cfg, rng)
        smooth_update(a, b, float(rng.uniform(0.01, 1.0))).validate(cfg)


def test_single_iteration_is_projected_step():
    # t_f=1 with rho0=gamma0=1 reduces to one projected surrogate step
    cfg = SystemConfig(users=2, waveguides=2, pas_per_guide=3, carrier_hz=2.8e9)
    tau = 1e3
    lay, trace = run_long_term(cfg, t_f=1, n_s=2, seed=5, solver="wmmse", tau=tau)

    from pinchsim.longterm import _train_rng
    from pinchsim.channel import draw_users

    grid = PinchingLayout.grid(cfg)
    users = draw_users(cfg, _train_rng(5, 0), 2)
    grads = []
    for u in users:
        s = ChannelSample(u)
        h = effective_channel(cfg, grid, s)
        st = wmmse_solve(h, cfg)
        grads.append(grad_x_fixed_w(cfg, grid, s, st.w))
    b = np.mean(grads, axis=0)
    from pinchsim.isotonic import project_layout
    expect = project_layout(cfg, grid.x - b / (2 * tau))
    assert np.allclose(lay.x, expect.x, atol=1e-12)
    assert len(trace) == 1


def test_long_term_trace_feasible_and_finite():
    cfg = SystemConfig(users=2, waveguides=2, pas_per_guide=3)
    lay, trace = run_long_term(cfg, t_f=5, n_s=2, seed=1, tau=2e5)
    lay.validate(cfg)
    assert len(trace) == 5
    assert all(np.isfinite(row.f) for row in trace)
    rhos = [row.rho for row in trace]
    assert rhos[0] == 1.0


def test_long_term_fixed_sample_improves():
    # degenerate one-placement distribution: the loop is driven by a single
    # deterministic objective and must not end below its start
    cfg = SystemConfig(users=2, waveguides=2, pas_per_guide=4)
    users = np.array([[4.0, 2.5], [14.0, 7.5]])

    def sampler(c, rng, count):
        return np.tile(users[None], (count, 1, 1))

    grid = PinchingLayout.grid(cfg)

    def rate_at(lay):
        s = ChannelSample(users)
        h = effective_channel(cfg, lay, s, check=False)
        return sum_rate(h, wmmse_solve(h, cfg).w, cfg.noise_w)

    lay, _ = run_long_term(cfg, t_f=40, n_s=1, seed=2, solver="wmmse",
                           tau=2e5, sampler=sampler)
    assert rate_at(lay) >= rate_at(grid)


def test_trace_csv_format():
    cfg = SystemConfig(users=2, waveguides=2, pas_per_guide=3)
    _, trace = run_long_term(cfg, t_f=3, n_s=2, seed=1, tau=2e5)
    text = trace_to_csv(trace)
    lines = text.strip().split("\n")
    assert lines[0] == "t,f_t,gamma_t,rho_t,eval_sum_rate"
    assert len(lines) == 4


def test_long_term_rejects_bad_args():
    cfg = SystemConfig(users=2, waveguides=2, pas_per_guide=3)
    with pytest.raises(ValueError):
        run_long_term(cfg, t_f=0)
    with pytest.raises(ValueError):
        run_long_term(cfg, t_f=1, n_s=1, grad_mode="bogus")
    with pytest.raises(ValueError):
        run_long_term(cfg, t_f=1, n_s=1, solver="bogus")

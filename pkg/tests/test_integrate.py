import math
import warnings

import numpy as np
import pytest

from kuracluster.analysis import jacobian_scale
from kuracluster.graph import build_digraph, complete_digraph, make_partition
from kuracluster.integrate import integrate, integrate_error, rk4
from kuracluster.model import NetworkSpec, SimState, from_error, to_error
from kuracluster.rules import custom_fourier, hebbian_cos, shifted_cos


def _strong_network(seed=3, n=5):
    rng = np.random.default_rng(seed)
    spec = NetworkSpec(complete_digraph(n), rng.uniform(0.5, 1.5, n), 1.0, 1.0, 1.0,
                       shifted_cos(0.4))
    init = SimState(rng.uniform(0, 2 * np.pi, n), rng.uniform(-1, 1, n * (n - 1)))
    return spec, init


def test_single_oscillator_turns_once():
    spec = NetworkSpec(build_digraph([[0]]), [1.0], 1.0, 0.0, 1.0, hebbian_cos())
    traj = integrate(spec, None, SimState(np.array([0.0]), np.zeros(0)), 2 * math.pi,
                     dt=2 * math.pi / 1000)
    assert abs(traj.theta[-1, 0] - 2 * math.pi) < 1e-12
    assert traj.k.shape == (len(traj), 0)


def test_zero_rule_gives_exponential_decay():
    spec, init = _strong_network()
    spec = spec.replace(rule=custom_fourier([0.0]), gamma=0.7)
    dt, t_end = 0.01, 10.0
    traj = integrate(spec, None, init, t_end, dt, sample_every=100)
    h = 0.7 * dt
    amp = 1 - h + h ** 2 / 2 - h ** 3 / 6 + h ** 4 / 24      # RK4 on k' = -gamma k
    steps = np.round(traj.t / dt)
    assert np.allclose(traj.k, init.k * amp ** steps[:, None], rtol=1e-12, atol=0)
    assert np.allclose(traj.k, init.k * np.exp(-0.7 * traj.t)[:, None], rtol=1e-8, atol=0)


@pytest.mark.filterwarnings("ignore:dt=")
def test_step_halving_shows_fourth_order():
    spec, init = _strong_network()
    finals = [integrate(spec, None, init, 10.0, dt, sample_every=10 ** 6).state(-1).pack()
              for dt in (0.1, 0.05, 0.025)]
    d1 = np.abs(finals[0] - finals[1]).max()
    d2 = np.abs(finals[1] - finals[2]).max()
    assert d1 / d2 >= 12.0, d1 / d2


def test_global_phase_shift_commutes_with_flow(ex2):
    c = 1.234
    a = integrate(ex2.spec, None, ex2.initial, 100.0, 0.01, sample_every=1000)
    shifted = SimState(ex2.initial.theta + c, ex2.initial.k)
    b = integrate(ex2.spec, None, shifted, 100.0, 0.01, sample_every=1000)
    assert np.abs(b.theta - a.theta - c).max() < 1e-10
    assert np.abs(b.k - a.k).max() < 1e-10


def test_manifold_stays_invariant(ex2):
    spec, p = ex2.spec, ex2.partition
    es = to_error(ex2.initial, spec.graph, p)
    es.e[:] = 0.0
    es.k_intra[:] = jacobian_scale(spec)
    es.k_inter[:] = 0.0
    traj = integrate(spec, p, from_error(es, spec.graph, p), 200.0, 0.01, sample_every=500)
    assert np.abs(traj.e).max() < 1e-8


def test_couplings_stay_bounded():
    spec, init = _strong_network(seed=11)
    spec = spec.replace(mu_inter=0.5)
    traj = integrate(spec, None, init, 30.0, 0.01, sample_every=10)
    bound = max(np.abs(init.k).max(), spec.rule.delta * max(spec.mu_inter, spec.mu_intra) / spec.gamma)
    assert np.abs(traj.k).max() <= bound + 1e-9


def test_full_and_error_systems_agree(ex1):
    p = ex1.partition
    a = integrate(ex1.spec, p, ex1.initial, 5.0, 1e-3, sample_every=500)
    b = integrate_error(ex1.spec, p, to_error(ex1.initial, ex1.graph, p), 5.0, 1e-3,
                        sample_every=500)
    assert np.allclose(a.t, b.t)
    assert np.abs(np.angle(np.exp(1j * (a.theta - b.theta)))).max() < 1e-10
    assert np.abs(a.k - b.k).max() < 1e-12


def test_sampling_and_observer(ex2):
    seen = []
    traj = integrate(ex2.spec, None, ex2.initial, 1.05, 0.01, sample_every=50,
                     observer=lambda t, s: seen.append((t, s.theta.flags.writeable)))
    assert np.allclose(traj.t, [0.0, 0.5, 1.0, 1.05])
    assert [round(t, 9) for t, _ in seen] == [0.0, 0.5, 1.0, 1.05]
    assert not any(w for _, w in seen)


def test_zero_horizon_returns_initial_state(ex2):
    traj = integrate(ex2.spec, None, ex2.initial, 0.0)
    assert len(traj) == 1 and np.array_equal(traj.theta[0], ex2.initial.theta)


def test_overflow_aborts_with_partial_trajectory():
    spec = NetworkSpec(complete_digraph(2), [1e308, 1e308], 1.0, 0.1, 0.1, hebbian_cos())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        traj = integrate(spec, None, SimState(np.zeros(2), np.zeros(2)), 10.0, 1.0)
    assert not traj.completed and "non-finite" in traj.message
    assert np.all(np.isfinite(traj.theta))


def test_large_step_warns(ex2):
    with pytest.warns(RuntimeWarning, match="exceeds"):
        integrate(ex2.spec, None, ex2.initial, 1.0, 0.5)


def test_bad_arguments(ex2):
    with pytest.raises(ValueError):
        integrate(ex2.spec, None, ex2.initial, 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate(ex2.spec, None, ex2.initial, -1.0)
    with pytest.raises(ValueError):
        integrate(ex2.spec, None, SimState(np.zeros(3), np.zeros(14)), 1.0)


def test_generic_rk4_on_growth():
    ts, ys = rk4(lambda y: y, np.array([1.0]), 0.01, 100)
    assert abs(ys[-1, 0] - math.e) < 1e-9 and ts[-1] == pytest.approx(1.0)


def test_error_view_requires_partition():
    spec, init = _strong_network()
    traj = integrate(spec, None, init, 0.1)
    with pytest.raises(ValueError):
        traj.e
    p = make_partition([[0, 1], [2, 3, 4]])
    assert integrate(spec, p, init, 0.1).e.shape == (11, 3)

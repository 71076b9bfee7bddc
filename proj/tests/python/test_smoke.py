import random

import numpy as np
import pytest

import prefix_dse as pd


def test_regular_adder_adds():
    g = pd.make_regular("kogge_stone", 16)
    m = g.metrics()
    assert (m.size, m.level) == (49, 4)
    rng = random.Random(1)
    for _ in range(200):
        a, b = rng.getrandbits(16), rng.getrandbits(16)
        s, c = pd.simulate_add(g, a, b)
        assert s + (c << 16) == a + b


def test_serialize_round_trip():
    g = pd.make_regular("brent_kung", 8)
    assert pd.parse(pd.serialize(g)) == g
    with pytest.raises(pd.ParseError):
        pd.parse("pfx 2\n2 1 0 1 1\noutputs 0 2\n")


def test_enumerate_and_features():
    graphs = pd.enumerate(16, 16, bucket_cap=16)
    assert graphs
    assert all(g.bit_width == 16 for g in graphs)
    space = pd.design_space(graphs[:3])
    assert len(space) == 3 * 16
    fv = space[0].features
    assert len(fv.spfo) == 8
    assert fv.values()[:2] == [fv.size, fv.mfo]


def test_pareto_and_hypervolume():
    pts = [[1.0, 3.0], [2.0, 2.0], [3.0, 1.0], [3.0, 3.0]]
    assert pd.front_indices(pts) == [0, 1, 2]
    assert pd.hypervolume(pts, [4.0, 4.0]) == pytest.approx(6.0)


def test_gp_interpolates():
    x = np.linspace(0, 1, 20).reshape(-1, 1)
    y = np.sin(4 * x[:, 0])
    gp = pd.GpModel.fit(x, y, seed=1)
    mean, sd = gp.predict(x)
    assert np.max(np.abs(mean - y)) < 0.05
    assert np.all(sd >= 0)


def test_pal_and_sweep_run():
    graphs = pd.sample(pd.enumerate(16, 16, bucket_cap=16), 6, seed=2)
    space = pd.design_space(graphs)
    pal = pd.run_pal(space, "delay,power", init=30, t_max=3, seed=1)
    assert pal.counts.init == 30
    assert set(pal.frontier) <= set(pal.predicted)
    sw = pd.alpha_sweep(space, "delay,power", top_k=3)
    assert sw.models_fitted == 15
    assert set(sw.frontier) <= set(sw.candidates)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cobranet.dcm import Digraph, sample_dcm
from cobranet.forward import (OpinionConfig, apply_event, run_forward, run_streaming, sample_grid,
                              simulate_density)
from cobranet.marks import MarkEvent, generate_marks

from conftest import random_sequence, regular

# u -> (v, w)
FIG1 = Digraph.from_out_adj([[1, 2], [0, 0], [0, 0]])


def test_all_bits_one_turns_blue():
    cfg = OpinionConfig.all_red(3)
    apply_event(FIG1, cfg, MarkEvent(0.1, 0, (0, 1), (True, True)))
    assert cfg.color(0) == "b" and cfg.red_count == 2


def test_unbiased_red_neighbours_stay_red():
    cfg = OpinionConfig.from_string("brr")
    apply_event(FIG1, cfg, MarkEvent(0.1, 0, (0, 1), (False, False)))
    assert cfg.color(0) == "r" and cfg.red_count == 3


def test_figure_one_update():
    # v is red but biased; w is genuinely blue
    cfg = OpinionConfig.from_string("rrb")
    apply_event(FIG1, cfg, MarkEvent(0.1, 0, (0, 1), (True, False)))
    assert cfg.color(0) == "b"


def test_one_red_perception_wins():
    cfg = OpinionConfig.from_string("bbr")
    apply_event(FIG1, cfg, MarkEvent(0.1, 0, (0, 1), (False, False)))
    assert cfg.color(0) == "r"


def test_self_loop_reads_pre_event_colour():
    g = Digraph.from_out_adj([[0, 0]])
    cfg = OpinionConfig.from_string("r")
    apply_event(g, cfg, MarkEvent(0.1, 0, (0, 1), (False, True)))
    assert cfg.color(0) == "r"
    cfg = OpinionConfig.from_string("b")
    apply_event(g, cfg, MarkEvent(0.1, 0, (0, 1), (False, False)))
    assert cfg.color(0) == "b"


def _random_event(data, g, s):
    x = data.draw(st.integers(0, g.n - 1))
    d = int(g.d_plus[x])
    slots = tuple(data.draw(st.lists(st.integers(0, d - 1), min_size=s, max_size=s)))
    bits = tuple(data.draw(st.lists(st.booleans(), min_size=s, max_size=s)))
    return MarkEvent(0.5, x, slots, bits)


GRAPH = sample_dcm(random_sequence(np.random.default_rng(3), 12, 1, 4), np.random.default_rng(4))


@settings(max_examples=300, deadline=None)
@given(st.data(), st.integers(1, 4))
def test_flipping_a_bias_bit_only_helps_blue(data, s):
    colours = data.draw(st.lists(st.booleans(), min_size=GRAPH.n, max_size=GRAPH.n))
    ev = _random_event(data, GRAPH, s)
    i = data.draw(st.integers(0, s - 1))
    if ev.bias_bits[i]:
        return
    bits = list(ev.bias_bits)
    bits[i] = True
    before = apply_event(GRAPH, OpinionConfig(colours), ev)
    after = apply_event(GRAPH, OpinionConfig(colours), MarkEvent(ev.time, ev.vertex, ev.neighbor_slots, tuple(bits)))
    assert after.blue[ev.vertex] >= before.blue[ev.vertex]


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_single_sample_is_biased_voter(data):
    colours = data.draw(st.lists(st.booleans(), min_size=GRAPH.n, max_size=GRAPH.n))
    ev = _random_event(data, GRAPH, 1)
    y = int(GRAPH.heads[GRAPH.offsets[ev.vertex] + ev.neighbor_slots[0]])
    out = apply_event(GRAPH, OpinionConfig(colours), ev)
    assert bool(out.blue[ev.vertex]) == (ev.bias_bits[0] or colours[y])


@pytest.mark.parametrize("s", [1, 2, 3])
def test_kernel_matches_event_by_event(small_dcm, s):
    rng = np.random.default_rng(s)
    stream = generate_marks(small_dcm, 10.0, s, 0.35, rng)
    initial = OpinionConfig(rng.random(small_dcm.n) < 0.5)
    slow = initial.copy()
    for ev in stream:
        apply_event(small_dcm, slow, ev)
        assert slow.red_count == slow.recount()
    fast = run_forward(small_dcm, stream, initial)
    assert fast == slow and fast.red_count == slow.red_count == fast.recount()


def test_empty_stream_returns_initial(small_dcm, rng):
    initial = OpinionConfig(rng.random(small_dcm.n) < 0.5)
    out = run_forward(small_dcm, generate_marks(small_dcm, 0.0, 2, 0.3, rng), initial)
    assert out == initial and out is not initial


def test_red_is_absorbing_without_bias(small_dcm, rng):
    out = run_forward(small_dcm, generate_marks(small_dcm, 20.0, 2, 0.0, rng), OpinionConfig.all_red(small_dcm.n))
    assert out.red_count == small_dcm.n


def test_full_bias_red_decays_exponentially():
    g = sample_dcm(regular(200), np.random.default_rng(0))
    T, trials = 1.5, 200
    rng = np.random.default_rng(1)
    dens = [run_forward(g, generate_marks(g, T, 2, 1.0, rng), OpinionConfig.all_red(g.n)).red_density
            for _ in range(trials)]
    se = math.sqrt(math.exp(-T) * (1 - math.exp(-T)) / (g.n * trials))
    assert abs(np.mean(dens) - math.exp(-T)) <= 3 * se


@pytest.mark.parametrize("s", [1, 2, 3])
def test_streaming_equals_replay(small_dcm, s):
    initial = OpinionConfig.all_red(small_dcm.n)
    streamed, _ = run_streaming(small_dcm, 0.3, s, 40.0, initial, np.random.default_rng(77))
    replayed = run_forward(small_dcm, generate_marks(small_dcm, 40.0, s, 0.3, np.random.default_rng(77)), initial)
    assert streamed == replayed and streamed.red_count == replayed.red_count


def test_streaming_equals_replay_many_chunks():
    g = sample_dcm(regular(3000), np.random.default_rng(5))
    initial = OpinionConfig.all_red(g.n)
    streamed, _ = run_streaming(g, 0.3, 2, 10.0, initial, np.random.default_rng(6))
    replayed = run_forward(g, generate_marks(g, 10.0, 2, 0.3, np.random.default_rng(6)), initial)
    assert streamed == replayed


def test_density_samples_match_replay(small_dcm):
    T, dt = 8.0, 0.5
    series = simulate_density(small_dcm, 0.3, 2, T, dt, rng=np.random.default_rng(3))
    stream = generate_marks(small_dcm, T, 2, 0.3, np.random.default_rng(3))
    expected = []
    for t in series.sample_times:
        keep = stream.times <= t
        prefix = type(stream)(T, stream.times[keep], stream.vertices[keep], stream.slots[keep],
                              stream.bits[keep], 2)
        expected.append(run_forward(small_dcm, prefix, OpinionConfig.all_red(small_dcm.n)).red_density)
    assert series.red_density.tolist() == expected


def test_density_series_shape(small_dcm, rng):
    series = simulate_density(small_dcm, 0.3, 2, 5.0, 0.25, rng=rng)
    assert series.sample_times.tolist() == pytest.approx(np.arange(21) * 0.25)
    assert series.red_density[0] == 1.0
    assert np.all((series.red_density >= 0) & (series.red_density <= 1))


def test_sample_grid():
    assert sample_grid(1.0, 0.1).tolist() == pytest.approx(np.arange(11) * 0.1)
    with pytest.raises(ValueError):
        sample_grid(1.0, 0.0)


def test_supercritical_blue_decays():
    from cobranet.degrees import build_sequence
    from cobranet.experiments import preset_profile
    g = sample_dcm(build_sequence(preset_profile("blue", 2000)), np.random.default_rng(0))
    series = simulate_density(g, 0.45, 2, 50.0, 1.0, rng=np.random.default_rng(1))
    assert series.red_density[-1] < 0.1

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import dmm_grid
from thzamp.amp import amp_config
from thzamp.experiments import (BenchmarkSpec, PhaseCellResult, PhaseGridSpec, channel_benchmark,
                                derive_seed, dmm_l1_curve, dynamic_n_table, empirical_boundary,
                                evaluate_phase_cell, phase_cells, phase_transition, round_half_up,
                                single_recovery)
from thzamp.sensing import gaussian_matrix
from thzamp.signals import PRESETS, strictly_sparse

# brute-force maximization of the l1 boundary objective on a 1e-4 grid
DMM_HALF = 0.38568966


def test_dmm_endpoint_and_range():
    assert dmm_l1_curve(1.0) == 1.0
    # vanishes only logarithmically as delta -> 0
    assert 0 < dmm_l1_curve(1e-4) < dmm_l1_curve(0.01) < dmm_l1_curve(0.05)
    for bad in (0.0, -0.2, 1.2):
        with pytest.raises(ValueError):
            dmm_l1_curve(bad)


def test_dmm_matches_brute_force():
    assert dmm_l1_curve(0.5) == pytest.approx(DMM_HALF, abs=1e-7)
    for d in (0.05, 0.2, 0.35, 0.65, 0.8, 0.9):
        assert dmm_l1_curve(d) == pytest.approx(dmm_grid(d), abs=1e-6)


def test_dmm_monotone():
    values = [dmm_l1_curve(d) for d in np.linspace(0.02, 1.0, 50)]
    assert np.all(np.diff(values) > 0)


def test_round_half_up():
    assert [round_half_up(x) for x in (0.5, 1.5, 2.5, 2.4999, 10.0)] == [1, 2, 3, 2, 10]


@given(st.integers(0, 2**63 - 1), st.integers(0, 1000), st.integers(0, 1000))
def test_derive_seed_is_stable_and_distinct(master, i, j):
    a = derive_seed(master, i, j, 0)
    assert a == derive_seed(master, i, j, 0)
    assert 0 <= a < 2**64
    assert a != derive_seed(master, i, j, 1)


def test_cell_dimensions():
    spec = PhaseGridSpec((0.5,), (0.1, 0.0001), n=101)
    cells = phase_cells(spec)
    assert (cells[0].m, cells[0].k) == (51, 5)
    # k never rounds to zero on the normalized-sparsity axis
    assert cells[1].k == 1
    spec = PhaseGridSpec((0.5,), (0.0001, 0.2), rho_axis="rho", n=100)
    cells = phase_cells(spec)
    assert not cells[0].feasible and cells[1].k == 20


def test_skipped_cell():
    spec = PhaseGridSpec((0.5,), (0.001, 0.1), rho_axis="rho", n=100, trials=2)
    res = phase_transition(spec)
    assert res[0].status == "skipped" and math.isnan(res[0].mean_nmse_db)
    assert res[1].status == "ok"


def test_easy_cell_succeeds():
    spec = PhaseGridSpec((0.9,), (0.05,), n=500, trials=10)
    (res,) = phase_transition(spec)
    assert res.success_rate == 1.0 and res.mean_nmse_db < -20


def test_hard_cell_fails():
    spec = PhaseGridSpec((0.2,), (0.9,), n=500, trials=10, config=amp_config("soft", max_iters=100))
    (res,) = phase_transition(spec)
    assert res.success_rate == 0.0


def test_cosamp_cells():
    spec = PhaseGridSpec((0.5,), (0.05, 0.9), n=200, trials=5, algo="cosamp")
    easy, hard = phase_transition(spec)
    assert easy.success_rate == 1.0 and hard.success_rate == 0.0


def test_phase_deterministic_and_order_independent():
    spec = PhaseGridSpec((0.3, 0.6), (0.1, 0.4), n=80, trials=3, master_seed=5)
    a, b = phase_transition(spec), phase_transition(spec)
    assert a == b
    cells = phase_cells(spec)
    reversed_results = [evaluate_phase_cell(spec, c) for c in reversed(cells)][::-1]
    assert reversed_results == a


def test_phase_seed_matters():
    kw = dict(delta_values=(0.3,), rho_values=(0.3,), n=80, trials=3)
    a = phase_transition(PhaseGridSpec(master_seed=1, **kw))
    b = phase_transition(PhaseGridSpec(master_seed=2, **kw))
    assert a[0].mean_nmse_db != b[0].mean_nmse_db


def test_phase_spec_validation():
    with pytest.raises(ValueError):
        PhaseGridSpec((0.5,), (0.1,), algo="omp")
    with pytest.raises(ValueError):
        PhaseGridSpec((0.0,), (0.1,))
    with pytest.raises(ValueError):
        PhaseGridSpec((0.5,), (0.1,), trials=0)
    with pytest.raises(ValueError):
        PhaseGridSpec((0.5, 0.6), (0.1,), n_table=((0.5, 100),))


def test_dynamic_table():
    table = dict(dynamic_n_table((0.05, 0.5, 0.95)))
    assert table[0.05] == 20000 and table[0.95] == 2000
    assert 2000 < table[0.5] < 20000


def _row(rho, rate):
    return PhaseCellResult(0.5, rho, 100, 50, 5, 0, 10, rate, -30.0)


def test_empirical_boundary_interpolates():
    rows = [_row(0.1, 1.0), _row(0.2, 0.8), _row(0.3, 0.2)]
    assert empirical_boundary(rows)[0.5] == pytest.approx(0.25)
    assert empirical_boundary([_row(0.1, 1.0), _row(0.2, 1.0)])[0.5] == 0.2
    assert empirical_boundary([_row(0.1, 0.0), _row(0.2, 0.0)])[0.5] == 0.1


def test_benchmark_rows_and_ls_overdetermined():
    preset = PRESETS["32-band-first"]
    spec = BenchmarkSpec(preset, (1600, 3000), algorithms=("ls", "opt-ls"), realizations=2,
                         master_seed=3)
    rows = channel_benchmark(spec)
    assert [(r.m, r.algorithm) for r in rows] == [(1600, "ls"), (1600, "opt-ls"),
                                                  (3000, "ls"), (3000, "opt-ls")]
    assert all(r.trials == 2 and len(r.squared_errors) == 2 for r in rows)
    # with m >= n least squares is well posed; opt-ls still pays the tail bias
    assert abs(rows[0].mse_db - rows[1].mse_db) < 15


def test_opt_ls_runs_at_shortest_training():
    preset = PRESETS["32-band-first"]
    spec = BenchmarkSpec(preset, (100,), algorithms=("opt-ls",), realizations=1)
    assert channel_benchmark(spec)[0].status == "ok"


def test_benchmark_validation():
    preset = PRESETS["16-band-third"]
    with pytest.raises(ValueError):
        BenchmarkSpec(preset, (50,))
    with pytest.raises(ValueError):
        BenchmarkSpec(preset, (100,), algorithms=("omp",))
    with pytest.raises(ValueError):
        BenchmarkSpec(preset, (100,), realizations=0)


def test_benchmark_deterministic():
    spec = BenchmarkSpec(PRESETS["32-band-first"], (200,), algorithms=("cosamp", "ls"),
                         realizations=2, master_seed=9)
    assert channel_benchmark(spec) == channel_benchmark(spec)


def test_single_recovery_dispatch():
    A = gaussian_matrix(40, 80, 0)
    h = strictly_sparse(80, 4, 1).values
    y = A.forward(h)
    for algo in ("s-amp", "h-amp", "cosamp", "opt-ls"):
        est, _, _ = single_recovery(algo, A, y, k=4, h_true=h)
        assert np.linalg.norm(est - h) < 1e-3 * np.linalg.norm(h)
    est, res, tau = single_recovery("s-amp", A, y, tau=1.5)
    assert tau == 1.5 and res is not None
    with pytest.raises(ValueError):
        single_recovery("s-amp", A, y)
    with pytest.raises(ValueError):
        single_recovery("cosamp", A, y)

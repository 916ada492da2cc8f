import pytest

import offsim


def test_default_config_shape():
    cfg = offsim.default_config()
    assert cfg.num_tasks() == 30
    assert len(cfg.nodes) == 6
    assert len(cfg.links) == 5


def test_instance_generation_is_deterministic():
    cfg = offsim.default_config()
    a = offsim.generate_instance(cfg, 7)
    b = offsim.generate_instance(cfg, 7)
    assert a.serving == b.serving


def test_joint_pipeline_produces_a_valid_solution():
    inst = offsim.generate_instance(offsim.default_config(), 1)
    sol = offsim.run_jto(inst)
    assert 0.0 <= sol.acceptance_ratio() <= 1.0
    assert len(sol.rho) == inst.num_tasks()
    for trace in sol.alpha_traces:
        assert all(b <= a for a, b in zip(trace, trace[1:]))
    ok, why = offsim.validate_solution(inst, sol)
    assert ok, why


def test_disjoint_pipeline_respects_its_radio_budget():
    inst = offsim.generate_instance(offsim.default_config(), 1)
    sol = offsim.run_dto(inst, 0.015)
    ok, why = offsim.validate_solution(inst, sol)
    assert ok, why


def test_sweep_csv_shape_and_determinism():
    cfg = offsim.default_config()
    kwargs = dict(trials=2, seed=1, workers=1, omit_timing=True)
    a = offsim.run_sweep_csv(cfg, "T", [0.02, 0.04], ["jto"], **kwargs)
    b = offsim.run_sweep_csv(cfg, "T", [0.02, 0.04], ["jto"], **kwargs)
    assert a == b
    lines = a.strip().splitlines()
    assert lines[0] == (
        "seed,algo,param,value,acceptance_ratio,energy_w,mean_ttx_s,"
        "mean_texe_s,mean_tprop_s,iters,wall_s,placement_hist"
    )
    assert len(lines) == 1 + 2 * 2


def test_class_experiment_reports_one_row_per_class():
    cfg = offsim.load_config(
        """
        [topology]
        node = 0 1e9 1e-28 bbu
        node = 1 1e9 1e-28
        link = 0 1 1e9 0.010

        [tasks]
        class = 4 1e6 1e4 0.020
        class = 4 1e6 1e4 0.060
        """
    )
    csv = offsim.run_class_experiment_csv(cfg, [20e9], trials=1, seed=1)
    assert len(csv.strip().splitlines()) == 1 + 2


def test_config_errors_surface_as_value_errors():
    with pytest.raises(ValueError):
        offsim.load_config("[radio]\nrrhs = 0\n")


def test_load_config_file_round_trip(tmp_path):
    p = tmp_path / "toy.cfg"
    p.write_text("[tasks]\nclass = 4 1e6 1e5 0.040\n")
    assert offsim.load_config_file(str(p)).num_tasks() == 4

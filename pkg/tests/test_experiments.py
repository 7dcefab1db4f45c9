from ringcc.experiments import run_experiment_1, run_experiment_2, run_experiment_3


def test_experiment_1_reports_rate():
    r = run_experiment_1(kind="repeat", n=5000, p=4, s=5000, k=5)
    assert r["edges"] == 5000
    assert r["edges_per_second"] > 0
    assert r["stored"] == 50  # 5000 observations / 100 per unique edge


def test_experiment_2_bound_holds():
    r = run_experiment_2(c=0.5, downtime_budget=0.5, u=1.0, p=10, s=500,
                         events=2, validate=True)
    assert r["k"] == 4  # ceil(3.4)
    assert not r["failed"]
    assert r["events"] == 2
    assert r["edges_intact"]
    assert r["downtime_fraction"] <= 0.5
    assert r["violations"] == 0


def test_experiment_2_small_bundle_with_late_trigger_fails():
    # the bound says k must be 4 here; k=2 with a trigger far past the lead
    # time cannot recycle fast enough and the system fills
    r = run_experiment_2(c=0.5, downtime_budget=0.5, u=1.0, p=10, s=500,
                         k=2, late_trigger=True)
    assert r["failed"]
    assert r["fail_tick"] is not None


def test_experiment_3_reestablishes_target_level():
    r = run_experiment_3(n=40_000, target_c=0.5, p=5, s=1200, k=5,
                         validate=True)
    assert len(r["events"]) >= 3
    for e in r["events"]:
        assert abs(e["survivor_level"] - 0.5) <= 0.06
    assert r["violations"] == 0

import math
from pathlib import Path

import pytest

import structrl

ROOT = Path(__file__).resolve().parents[2]


def test_three_state_chain():
    m = structrl.birth_death(2, 0.5, 1.0)
    values, sigma, greedy = structrl.rvia(m)
    assert math.isclose(sigma, 2 / 3, abs_tol=1e-8)
    assert values[0] == 0.0
    assert list(greedy) == [1, 1, 0]
    assert structrl.optimal_threshold(m)[0] == 2
    sweep = structrl.integer_sweep(m)
    assert sweep == pytest.approx([0.0, 0.5, 2 / 3])


def test_gradient_matches_differences():
    m = structrl.birth_death(10, 0.6, 1.0)
    d = 1e-4
    hi = structrl.evaluate_threshold(m, 3.3 + d)[0]
    lo = structrl.evaluate_threshold(m, 3.3 - d)[0]
    fd = (hi - lo) / (2 * d)
    assert structrl.sigma_gradient(m, 3.3) == pytest.approx(fd, rel=1e-4)


def test_mixers():
    assert structrl.sigmoid_mix(3, 2.5) == 0.5
    assert structrl.piecewise_linear_mix(5, 4.25) == 0.75


def test_learner_runs_are_reproducible():
    m = structrl.birth_death(5, 0.5, 1.0)
    a = structrl.run_learner(structrl.Learner.SAL, m, 7, 200)
    b = structrl.run_learner(structrl.Learner.SAL, m, 7, 200)
    assert a["sigma_exact"] == b["sigma_exact"]
    assert len(a["n"]) == 200
    assert a["storage"] == 7
    pds = structrl.run_learner(structrl.Learner.PDS, m, 1, 100, queue_service_rate=1.2)
    assert pds["storage"] == 21
    with pytest.raises(Exception):
        structrl.run_learner(structrl.Learner.PDS, m, 1, 10)


def test_queue_optimum():
    assert structrl.optimal_threshold(structrl.koole_queue())[0] == 4
    assert structrl.optimal_threshold(structrl.koole_queue(service_rate=1.5))[0] == 5


def test_commands(tmp_path):
    code, report = structrl.solve(str(ROOT / "configs" / "birth_death_small.ini"), str(tmp_path / "solve"))
    assert code == 0
    assert "optimal_threshold = 2" in report
    assert (tmp_path / "solve" / "values.csv").exists()
    bad = tmp_path / "bad.ini"
    bad.write_text("[model]\nkind = birth_death\nN = 2\n")
    with pytest.raises(structrl.ConfigError):
        structrl.solve(str(bad), str(tmp_path / "bad"))

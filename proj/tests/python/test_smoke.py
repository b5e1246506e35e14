import json
import math

import pytest

import nlst


def test_box_values():
    box = nlst.unbiased_pr_box(0.1)
    assert len(box) == 16
    assert nlst.chsh_value(box) == pytest.approx(0.9)
    ok, violations = nlst.is_nonsignalling(box)
    assert ok and violations == []
    assert nlst.lambda1_star_value(box) == pytest.approx(0.4)
    again = nlst.System.from_json(box.to_json())
    assert again.table == box.table


def test_signalling_table_is_reported():
    table = [0.0] * 16
    for u in range(2):
        for v in range(2):
            table[((u * 2 + 0) * 2 + v) * 2 + u] = 1.0
    ok, violations = nlst.is_nonsignalling(nlst.System(nlst.Scenario.binary(2), table))
    assert not ok and violations


def test_ns_distance_and_local_part():
    r = nlst.ns_distance(nlst.unbiased_pr_box(0.1))
    assert r["distance"] == pytest.approx(0.2, abs=1e-9)
    assert r["certified"] == pytest.approx(0.2, abs=1e-9)
    assert nlst.local_part(nlst.unbiased_pr_box(0.05)) == pytest.approx(0.2, abs=1e-9)
    assert nlst.xor_bound(3, 0.05) == pytest.approx(0.004)


def test_quantum():
    assert nlst.max_chsh(1) == pytest.approx((2 + math.sqrt(2)) / 4, abs=1e-6)
    g = nlst.guessing_probability(nlst.noisy_singlet_system(0.09), level=2)
    assert g == pytest.approx(0.7771, abs=5e-3)
    assert nlst.q_key_rate_curve(0.06) == pytest.approx(0.1296, abs=5e-3)


def test_attack_and_rates():
    assert nlst.attack_distance(3, 0.1) == pytest.approx(0.244)
    assert nlst.attack_distance(3, 0.1) == pytest.approx(nlst.xor_attack_distance_closed_form(3, 0.1))
    assert nlst.xor_attack_polynomial(2) == [0.0, 2.0, -2.0]
    assert nlst.attack_distance(4, 0.1, "mask:3") >= nlst.general_lower_bound(0.1)
    assert 0.047 <= nlst.ns_key_rate_zero() <= 0.049
    assert nlst.q_key_rate(0.5, 0.0) == pytest.approx(1.0)
    assert nlst.ns_key_rate(0.0, 0.0) == 1.0


def test_errors():
    with pytest.raises(nlst.NlstError):
        nlst.unbiased_pr_box(0.7)
    with pytest.raises(ValueError):
        nlst.ns_key_rate(-1.0, 0.0)


def test_simulate_is_deterministic():
    a = nlst.simulate(n=20000, seed=4)
    b = nlst.simulate(n=20000, seed=4)
    assert a == b
    assert a["accepted"] and a["keys_equal"]
    json.dumps(a)

import math

import numpy as np
import pytest

from multinorm.convexity import (
    INCONCLUSIVE, NOT_UC_EVIDENCE, UC_EVIDENCE, ModulusEstimate, modulus_of_convexity,
    uc_verdict, verify_pair,
)
from multinorm.norms import Lp, Sum, TruncSeminorm, eval_norm

INF = math.inf


def closed_form_l2(e):
    return 1 - math.sqrt(1 - e * e / 4)


def test_l2_matches_closed_form():
    est = modulus_of_convexity(Lp(2), 2, [0.5, 1.0, 1.5, 2.0], samples=20_000, seed=3)
    for e, d in zip(est.eps_grid, est.delta_hat):
        assert d == pytest.approx(closed_form_l2(e), abs=5e-3)
    assert est.delta_hat[-1] == pytest.approx(1.0, abs=1e-5)
    assert uc_verdict(est, 1e-3) == UC_EVIDENCE
    assert est.direction == "upper_bound"


@pytest.mark.parametrize("p", [1, INF])
def test_flat_norms_get_certificates(p):
    norm = Lp(p)
    est = modulus_of_convexity(norm, 2, [0.5, 1.0, 1.5, 2.0], samples=10_000)
    assert est.delta_hat[1] <= 1e-6
    x, y = est.witness_pairs[1]
    assert eval_norm(norm, 0.5 * (x + y)) == pytest.approx(1.0, abs=1e-9)
    assert uc_verdict(est, 1e-3) == NOT_UC_EVIDENCE


@pytest.mark.parametrize("norm", [Lp(2), Lp(3), Lp(1), Sum((Lp(2.5), TruncSeminorm(1)))])
def test_witness_pairs_are_genuine(norm):
    est = modulus_of_convexity(norm, 3, [0.5, 1.0, 1.9], samples=10_000, seed=5)
    for e, d, (x, y) in zip(est.eps_grid, est.delta_hat, est.witness_pairs):
        valid, bound = verify_pair(norm, x, y, e)
        assert valid
        assert max(bound, 0.0) == pytest.approx(d, abs=1e-9)


def test_more_samples_never_raise_the_estimate():
    small = modulus_of_convexity(Lp(3), 2, [0.5, 1.0], samples=20_000, seed=9)
    large = modulus_of_convexity(Lp(3), 2, [0.5, 1.0], samples=40_000, seed=9)
    for a, b in zip(small.delta_hat, large.delta_hat):
        assert b <= a + 1e-9


@pytest.mark.parametrize("p, dim", [(1.5, 2), (3, 2), (4, 3), (2.5, 3)])
def test_lp_positive_at_one(p, dim):
    est = modulus_of_convexity(Lp(p), dim, [1.0], samples=100_000)
    assert est.delta_hat[0] > 0


def test_seed_reproducible():
    a = modulus_of_convexity(Lp(2.5), 2, [1.0], samples=10_000, seed=1).to_json()
    b = modulus_of_convexity(Lp(2.5), 2, [1.0], samples=10_000, seed=1).to_json()
    assert a == b


def test_inconclusive_when_sampling_failed():
    est = ModulusEstimate(Lp(2), 2, [0.5, 1.0], [None, None], [None, None], 10, 0,
                          failures={0.5: "x", 1.0: "x"})
    assert uc_verdict(est, 1e-3) == INCONCLUSIVE


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        modulus_of_convexity(Lp(2), 2, [2.5])
    with pytest.raises(ValueError):
        modulus_of_convexity(TruncSeminorm(1), 2)
    with pytest.raises(ValueError):
        uc_verdict(modulus_of_convexity(Lp(2), 2, [1.0], samples=100), 0)


def test_table_lists_every_eps():
    est = modulus_of_convexity(Lp(2), 2, [0.5, 1.0], samples=1000)
    lines = est.table().splitlines()
    assert len(lines) == 4 and "upper bounds" in lines[0]
    assert np.isfinite(est.to_json()["delta_hat"]).all()

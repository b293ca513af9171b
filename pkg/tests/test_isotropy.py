import math

import numpy as np
import pytest

from featpost import (FeaturePostprocessor, SynthSpec, generate,
                      isotropy_empirical, isotropy_first_order, isotropy_report,
                      isotropy_second_order, log_partition, partition)
from featpost.errors import PartitionOverflowError, ValidationError

from oracles import first_order_direct, partition_direct, second_order_direct

FRAME = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])


def test_partition_single_zero_row():
    assert partition(np.zeros((1, 2)), [1.0, 0.0]) == pytest.approx(1.0, abs=1e-15)


def test_partition_matches_direct_sum():
    F = np.array([[1.0, 0.0], [-1.0, 0.0]])
    expected = partition_direct(F.tolist(), [1.0, 0.0])  # e + 1/e
    assert expected == pytest.approx(math.e + math.exp(-1.0), abs=1e-14)
    assert partition(F, [1.0, 0.0]) == pytest.approx(expected, abs=1e-12)


def test_partition_orthogonal_direction():
    F = np.array([[1.0, 0.0], [-1.0, 0.0]])
    assert partition(F, [0.0, 1.0]) == pytest.approx(2.0, abs=1e-14)


def test_partition_random_matches_direct_sum():
    rng = np.random.RandomState(2)
    F = rng.randn(25, 4)
    w = rng.randn(4)
    w /= np.linalg.norm(w)
    assert partition(F, w) == pytest.approx(partition_direct(F.tolist(), w), rel=1e-12)


def test_partition_rejects_non_unit_direction():
    with pytest.raises(ValidationError, match="unit"):
        partition(FRAME, [1.0, 1.0])


def test_partition_overflow_guard():
    F = np.full((3, 2), 800.0)  # exp(800) is past the float64 range
    w = np.array([1.0, 0.0])
    with pytest.raises(PartitionOverflowError):
        partition(F, w)
    lp = partition(F, w, log=True)
    assert lp == pytest.approx(800.0 + math.log(3.0), abs=1e-9)
    assert log_partition(F, w) == lp


def test_empirical_perfectly_symmetric_frame():
    assert isotropy_empirical(FRAME) == pytest.approx(1.0, abs=1e-12)


def test_empirical_degenerate_direction():
    F = np.tile([5.0, 0.0], (4, 1))
    assert isotropy_empirical(F) < 0.1


def test_empirical_range_on_random_data():
    rng = np.random.RandomState(10)
    for trial in range(5):
        F = rng.randn(rng.randint(2, 30), rng.randint(1, 8)) * rng.uniform(0.2, 3.0)
        m = isotropy_empirical(F)
        assert 0.0 <= m <= 1.0


def test_empirical_improves_on_spiked_family():
    wins = 0
    for seed in range(10):
        spec = SynthSpec(n_per_class=150, n_classes=4, dim=16, offset_norm=5.0,
                         spike_variances=(50.0, 20.0), base_variance=1.0,
                         class_sep=6.0, seed=seed)
        F, _ = generate(spec)
        before = isotropy_empirical(F)
        after = isotropy_empirical(FeaturePostprocessor(t=2).fit(F).transform(F))
        wins += after > before
    assert wins >= 9


def test_empirical_rotation_invariance():
    rng = np.random.RandomState(7)
    F = rng.randn(40, 5) * np.array([3.0, 2.0, 1.5, 1.0, 0.5]) + np.array([1.0, 0, 0, 0, 0])
    base = isotropy_empirical(F)
    for trial in range(3):
        Q, _ = np.linalg.qr(np.random.RandomState(trial).randn(5, 5))
        assert isotropy_empirical(F @ Q.T) == pytest.approx(base, abs=1e-8)


def test_probe_subset_can_only_loosen_the_ratio():
    rng = np.random.RandomState(19)
    F = rng.randn(20, 4)
    from featpost.isotropy import _probe_directions, _probe_log_partitions
    probes = _probe_directions(F)
    logs = _probe_log_partitions(F, probes)
    full = math.exp(min(logs) - max(logs))
    for idx in ([0, 1], [0, 2, 5], list(range(4))):
        subset = [logs[i] for i in idx]
        assert full <= math.exp(min(subset) - max(subset)) + 1e-15


def test_first_order_zero_mean_is_exactly_one():
    rng = np.random.RandomState(4)
    half = rng.randn(10, 6)
    F = np.vstack([half, -half])  # column sums cancel exactly in floats
    assert isotropy_first_order(F) == 1.0


def test_first_order_hand_case():
    assert isotropy_first_order(np.array([[1.0, 0.0], [1.0, 0.0]])) == 0.0


def test_first_order_matches_direct_formula():
    rng = np.random.RandomState(6)
    F = rng.randn(33, 7) + 0.3
    assert isotropy_first_order(F) == pytest.approx(first_order_direct(F.tolist()),
                                                    abs=1e-12)


def test_first_order_exact_after_exact_demeaning():
    # integer data with a power-of-two row count demeans without rounding
    rng = np.random.RandomState(12)
    F = rng.randint(-8, 9, size=(16, 5)).astype(float)
    centered = F - F.mean(axis=0)
    assert isotropy_first_order(centered) == 1.0


def test_second_order_symmetric_frame_is_one():
    assert isotropy_second_order(FRAME) == pytest.approx(1.0, abs=1e-9)


def test_second_order_matches_oracle():
    F = np.array([[2.0, 0.0], [0.0, 1.0]])
    expected = second_order_direct(F.tolist())
    # by hand: singular values are 2 and 1, |1^T A| = sqrt(5)
    by_hand = (2 - math.sqrt(5.0) + 0.5) / (2 + math.sqrt(5.0) + 2.0)
    assert expected == pytest.approx(by_hand, abs=1e-12)
    assert isotropy_second_order(F) == pytest.approx(expected, abs=1e-9)


def test_second_order_random_matches_oracle():
    rng = np.random.RandomState(14)
    for _ in range(5):
        F = rng.randn(rng.randint(3, 20), rng.randint(2, 6))
        assert isotropy_second_order(F) == pytest.approx(
            second_order_direct(F.tolist()), abs=1e-8)


def test_second_order_wide_matrix_sigma_min_zero():
    rng = np.random.RandomState(15)
    F = rng.randn(3, 8)
    rep = isotropy_report(F)
    assert rep.sigma_min == 0.0
    assert rep.sigma_max > 0.0


def test_report_bundle_consistency():
    rng = np.random.RandomState(20)
    F = rng.randn(30, 6) + 0.5
    rep = isotropy_report(F)
    assert rep.n == 30 and rep.dim == 6
    assert 0.0 <= rep.m_empirical <= 1.0
    assert rep.h_min <= rep.h_max
    assert rep.log_h_min <= rep.log_h_max
    assert rep.sigma_min <= rep.sigma_max
    assert rep.m_empirical == pytest.approx(math.exp(rep.log_h_min - rep.log_h_max))
    assert rep.m_first_order == pytest.approx(isotropy_first_order(F))
    assert rep.m_second_order == pytest.approx(isotropy_second_order(F))
    assert rep.ones_proj_norm == pytest.approx(np.linalg.norm(F.sum(axis=0)))


def test_report_before_after_improvement():
    spec = SynthSpec(n_per_class=150, n_classes=4, dim=16, offset_norm=5.0,
                     spike_variances=(50.0, 20.0), base_variance=1.0,
                     class_sep=6.0, seed=0)
    F, _ = generate(spec)
    before = isotropy_report(F)
    after = isotropy_report(FeaturePostprocessor(t=2).fit(F).transform(F))
    assert after.m_empirical > before.m_empirical
    assert after.m_first_order > before.m_first_order


def test_report_single_row_smoke():
    rep = isotropy_report(np.array([[0.3, -0.2, 0.1]]))
    assert rep.n == 1
    assert 0.0 <= rep.m_empirical <= 1.0
    assert rep.h_min <= rep.h_max
    assert rep.sigma_min <= rep.sigma_max


def test_isotropic_unit_frame_all_measures_one():
    # rows of a scaled orthonormal frame and their negations: A^T A = c*I
    eye = np.eye(4)
    F = np.vstack([eye, -eye]) * 0.5
    assert isotropy_first_order(F) == 1.0
    assert isotropy_second_order(F) == pytest.approx(1.0, abs=1e-9)
    assert isotropy_empirical(F) == pytest.approx(1.0, abs=1e-9)

import numpy as np
import pytest

from multireg import CorrespondenceSet, agglomerate, build_matrix, group_distance

from conftest import exact_inliers, make_cloud, make_transform


class TestGroupDistance:
    def test_identical_vectors(self):
        p = np.array([0.2, 1.0, 0.7])
        assert group_distance(p, p) == pytest.approx(0.0, abs=1e-15)

    def test_disjoint_supports(self):
        assert group_distance([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]) == 1.0

    def test_worked_example(self):
        # <p,q> = 1, |p|^2 = |q|^2 = 2 -> 1 - 1/3 = 2/3
        assert group_distance([1, 1, 0], [1, 0, 1]) == pytest.approx(2.0 / 3.0)

    def test_bounds_on_unit_interval_vectors(self, rng):
        for _ in range(50):
            p = rng.uniform(0, 1, size=16)
            q = rng.uniform(0, 1, size=16)
            p[0] = q[1] = 1.0  # own-index entries are always 1
            d = group_distance(p, q)
            assert 0.0 <= d <= 1.0

    def test_zero_vectors_guard(self):
        assert group_distance(np.zeros(4), np.zeros(4)) == 1.0


class TestAgglomerate:
    def test_all_compatible_collapse_to_one_group(self):
        state = agglomerate(np.ones((12, 12)), 0.2)
        assert state.active_count == 1
        (members,) = [g.members for g in state.groups.values()]
        assert sorted(members) == list(range(12))

    def test_two_block_matrix_gives_two_groups(self):
        t_a, t_b = make_transform(0), make_transform(1, translation_scale=9.0)
        points = make_cloud(2, 25)
        cset = CorrespondenceSet(
            np.vstack([points, points + 0.01]),
            np.vstack([t_a.apply(points), t_b.apply(points + 0.01)]),
        )
        state = agglomerate(build_matrix(cset), 0.2)
        big = sorted((len(g.members), g.members) for g in state.groups.values())[-2:]
        groups = [set(members) for _, members in big]
        assert set(range(25)) in groups
        assert set(range(25, 50)) in groups

    def test_zero_threshold_keeps_noisy_singletons(self, rng):
        cset = CorrespondenceSet(rng.normal(size=(20, 3)), rng.normal(size=(20, 3)))
        state = agglomerate(build_matrix(cset), 0.0)
        assert state.active_count == 20
        assert state.merge_log == []

    def test_output_is_partition(self, rng):
        cset = CorrespondenceSet(rng.normal(size=(30, 3)), rng.normal(size=(30, 3)))
        state = agglomerate(build_matrix(cset), 0.5)
        seen = []
        for gid, group in state.groups.items():
            seen.extend(group.members)
            assert all(state.assignments[m] == gid for m in group.members)
            assert gid == min(group.members)  # surviving id is the smallest member
        assert sorted(seen) == list(range(30))

    def test_representation_dominated_by_members(self, rng):
        cset = CorrespondenceSet(rng.normal(size=(24, 3)), rng.normal(size=(24, 3)))
        matrix = build_matrix(cset)
        state = agglomerate(matrix, 0.6)
        for group in state.groups.values():
            for member in group.members:
                assert np.all(group.representation <= matrix[:, member] + 1e-12)

    def test_merge_distances_within_threshold(self, rng):
        cset = CorrespondenceSet(rng.normal(size=(26, 3)), rng.normal(size=(26, 3)))
        state = agglomerate(build_matrix(cset), 0.45)
        assert all(dist <= 0.45 for _, _, dist in state.merge_log)

    def test_deterministic(self, rng):
        matrix = build_matrix(
            CorrespondenceSet(rng.normal(size=(22, 3)), rng.normal(size=(22, 3)))
        )
        a = agglomerate(matrix, 0.3)
        b = agglomerate(matrix, 0.3)
        assert np.array_equal(a.assignments, b.assignments)
        assert a.merge_log == b.merge_log

    def test_tie_break_prefers_lowest_pair(self):
        # Two identical 2-blocks tie at the minimal distance; the
        # lexicographically smallest pair (0, 1) must merge first.
        a = 0.9
        matrix = np.array(
            [
                [1.0, a, 0.0, 0.0],
                [a, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, a],
                [0.0, 0.0, a, 1.0],
            ]
        )
        state = agglomerate(matrix, 0.5)
        assert state.merge_log[0][:2] == (0, 1)
        assert state.merge_log[1][:2] == (2, 3)
        assert state.active_count == 2

    def test_single_item_matrix(self):
        state = agglomerate(np.array([[1.0]]), 0.2)
        assert state.active_count == 1
        assert state.assignments.tolist() == [0]

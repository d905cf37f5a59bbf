import numpy as np
import pytest

import ialm
from ialm.errors import FeatureIndexError, NotSPD, ParseError
from ialm.problems import PROBLEM2_A, ProblemSource, rbf_kernel

from _oracles import det3


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def synthetic_libsvm(path, n=40, width=13, seed=0):
    rng = np.random.default_rng(seed)
    features = np.round(rng.uniform(-1, 1, size=(n, width)), 6)
    labels = rng.choice([-1.0, 1.0], size=n)
    ialm.write_libsvm(str(path), features, labels)
    return str(path), features, labels


class TestParseLibsvm:
    def test_basic_line(self, tmp_path):
        path = write_lines(tmp_path / "a.txt", ["+1 1:0.5 3:-1"])
        features, labels = ialm.parse_libsvm(path, width=3)
        assert np.array_equal(features, [[0.5, 0.0, -1.0]])
        assert labels[0] == 1.0

    def test_empty_file(self, tmp_path):
        path = write_lines(tmp_path / "b.txt", [""])
        with pytest.raises(ParseError):
            ialm.parse_libsvm(path)

    def test_comments_and_blanks(self, tmp_path):
        path = write_lines(
            tmp_path / "c.txt",
            ["# header comment", "", "-1 2:3.5  # trailing note", "   "],
        )
        features, labels = ialm.parse_libsvm(path)
        assert features.shape == (1, 2)
        assert features[0, 1] == 3.5 and labels[0] == -1.0

    def test_missing_label(self, tmp_path):
        path = write_lines(tmp_path / "d.txt", ["1:2.0 2:1.0"])
        features, labels = ialm.parse_libsvm(path)
        assert np.isnan(labels[0])
        assert np.array_equal(features, [[2.0, 1.0]])

    def test_malformed_token_reports_line(self, tmp_path):
        path = write_lines(tmp_path / "e.txt", ["+1 1:0.5", "+1 xyz"])
        with pytest.raises(ParseError) as err:
            ialm.parse_libsvm(path)
        assert err.value.line == 2

    def test_nonpositive_index(self, tmp_path):
        path = write_lines(tmp_path / "f.txt", ["+1 0:1.0"])
        with pytest.raises(FeatureIndexError):
            ialm.parse_libsvm(path)

    def test_index_above_width(self, tmp_path):
        path = write_lines(tmp_path / "g.txt", ["+1 14:1.0"])
        with pytest.raises(FeatureIndexError):
            ialm.parse_libsvm(path, width=13)
        # unconstrained width accepts it
        features, _ = ialm.parse_libsvm(path)
        assert features.shape == (1, 14)

    def test_roundtrip_idempotent(self, tmp_path):
        path, features, labels = synthetic_libsvm(tmp_path / "h.txt", n=25, seed=3)
        f1, l1 = ialm.parse_libsvm(path, width=13)
        again = tmp_path / "h2.txt"
        ialm.write_libsvm(str(again), f1, l1)
        f2, l2 = ialm.parse_libsvm(str(again), width=13)
        assert np.array_equal(f1, f2)
        assert np.array_equal(l1, l2)
        assert np.array_equal(f1, features)

    def test_shape_matches_instance_count(self, tmp_path):
        path, _, _ = synthetic_libsvm(tmp_path / "i.txt", n=270, width=13, seed=1)
        features, labels = ialm.parse_libsvm(path, width=13)
        assert features.shape == (270, 13)
        assert labels.shape == (270,)


class TestKernelProblem:
    def test_unit_self_similarity(self, tmp_path):
        _, features, _ = synthetic_libsvm(tmp_path / "k.txt", n=12, seed=5)
        H = rbf_kernel(features, h=0.5)
        assert np.allclose(np.diag(H), 1.0, atol=1e-14)

    def test_symmetry(self, tmp_path):
        _, features, _ = synthetic_libsvm(tmp_path / "l.txt", n=15, seed=6)
        H = rbf_kernel(features)
        assert np.array_equal(H, H.T)

    def test_identical_points_identical_rows(self):
        X = np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]])
        H = rbf_kernel(X)
        assert np.allclose(H[0], H[1], atol=1e-14)

    def test_distance_not_squared_by_default(self):
        X = np.array([[0.0], [2.0]])
        H = rbf_kernel(X, h=0.5)
        assert H[0, 1] == pytest.approx(np.exp(-2.0 / 0.25))
        H2 = rbf_kernel(X, h=0.5, squared=True)
        assert H2[0, 1] == pytest.approx(np.exp(-4.0 / 0.25))

    def test_build_problem1_shape_and_constraint(self, tmp_path):
        _, features, _ = synthetic_libsvm(tmp_path / "m.txt", n=30, seed=7)
        problem = ialm.build_problem1(features, seed=42)
        assert problem.dimension == 30
        assert problem.n_constraints == 1
        assert np.array_equal(problem.A, np.ones((1, 30)))
        assert np.array_equal(problem.b, [1.0])
        assert problem.blocks.n_blocks == 30

    def test_duplicate_points_fail_spd_check(self):
        X = np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]])
        with pytest.raises(NotSPD):
            ialm.build_problem1(X)

    def test_solves_end_to_end(self, tmp_path):
        _, features, _ = synthetic_libsvm(tmp_path / "n.txt", n=25, seed=8)
        problem = ialm.build_problem1(features, seed=42)
        cfg = ialm.OuterConfig(
            beta=5.0, max_outer=200, eps=1e-8,
            inner=ialm.InnerSolverSpec(method="direct"),
        )
        trace = ialm.alm_exact(problem, cfg)
        assert trace.status == "converged"


class TestProblem2:
    def test_exact_data(self, problem2):
        assert np.array_equal(problem2.H, 0.05 * np.eye(3))
        assert np.array_equal(problem2.A, PROBLEM2_A)
        assert problem2.blocks.sizes == (1, 1, 1)

    def test_constraints_full_rank_by_determinant(self):
        assert det3(PROBLEM2_A) == pytest.approx(-1.0)

    def test_seed_determinism(self):
        a = ialm.build_problem2(42)
        b = ialm.build_problem2(42)
        c = ialm.build_problem2(43)
        assert np.array_equal(a.g, b.g) and np.array_equal(a.b, b.b)
        assert not np.array_equal(a.g, c.g)


class TestRandomProblem:
    def test_dimensions(self):
        p = ialm.random_problem(7, 3, seed=1)
        assert p.dimension == 7 and p.n_constraints == 3

    def test_hessian_shifted_spd(self):
        p = ialm.random_problem(6, 2, seed=2)
        ev = ialm.symmetric_eigenvalues(p.H).eigenvalues.real
        assert ev.min() >= 1.0 - 1e-9

    def test_rejects_bad_dims(self):
        with pytest.raises(ValueError):
            ialm.random_problem(2, 3)


class TestProblemSource:
    def test_problem2_source(self):
        problem = ProblemSource(kind="problem2", seed=42).build()
        assert problem.dimension == 3

    def test_random_source(self):
        problem = ProblemSource(kind="random", dims=(6, 2), seed=1).build()
        assert problem.dimension == 6

    def test_problem1_requires_path(self):
        with pytest.raises(ValueError):
            ProblemSource(kind="problem1")

    def test_random_requires_dims(self):
        with pytest.raises(ValueError):
            ProblemSource(kind="random")

    def test_problem1_builds_from_file(self, tmp_path):
        path, _, _ = synthetic_libsvm(tmp_path / "p.txt", n=20, seed=9)
        problem = ProblemSource(kind="problem1", path=path, seed=42).build()
        assert problem.dimension == 20

import json

import numpy as np
import pytest

from oracles import kmeans_optimum, pball_optimum, relu_optimum
from psplit.bounds import check_independent_bounds, group_range
from psplit.model import is_feasible, validate
from psplit.problems import (ClusterInstance, ProblemError, gen_example1, gen_kmeans, gen_pball,
                             gen_relu_min, instance_from_model, load_network, load_points_csv,
                             network_to_dict, random_affine_disjunction, random_clusters,
                             random_pball, random_relu_net)
from psplit.reformulate import build
from psplit.solver import branch_and_bound


def test_generators_are_seeded():
    a, b = random_clusters(5, 6, 3, 2), random_clusters(5, 6, 3, 2)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, random_clusters(6, 6, 3, 2).points)
    assert random_relu_net(1, [2, 3, 1]).weights[0].tolist() == random_relu_net(1, [2, 3, 1]).weights[0].tolist()


def test_generated_models_validate():
    models = [gen_example1().model, gen_kmeans(random_clusters(0, 5, 2, 3)).model,
              gen_pball(random_pball(0, 3, 2, 2)).model, gen_relu_min(random_relu_net(0, [2, 4, 1])).model]
    for m in models:
        assert validate(m, check_nonempty=True).ok, m.name


def test_affine_battery_has_nonredundant_disjuncts():
    m = random_affine_disjunction(np.random.default_rng(0), 6, 3)
    for d in m.disjunctions[0].disjuncts:
        (c,) = d.constraints
        r = group_range(c, c.support, m.variables)
        assert r.lower < c.rhs < r.upper
        assert check_independent_bounds(c, m.variables)


def test_kmeans_rule_covers_centres_in_the_data_hull():
    # optimal centres are centroids, so the recipe bounds only need to hold
    # for centres in the convex hull of the points
    ci = random_clusters(2, 5, 3, 2)
    inst = gen_kmeans(ci)
    L, n = ci.points.shape
    rng = np.random.default_rng(0)
    for P in (1, 2, 3):
        for j, part in enumerate(inst.partitions(P)):
            for l, dis in enumerate(inst.model.disjunctions[j].disjuncts):
                c = dis.constraints[0]
                for g in part.restrict(c.support).groups:
                    b = inst.bound_rule(j, l, 0, g)
                    for _ in range(50):
                        w = rng.dirichlet(np.ones(L), size=2)
                        x = np.concatenate([(w @ ci.points).ravel(), rng.uniform(0, inst.model.upper[-1], L)])
                        assert b.lower - 1e-9 <= c.group_value(x, g) <= b.upper + 1e-9


def test_pball_rule_covers_points_in_any_ball():
    pb = random_pball(1, 3, 2, 2)
    inst = gen_pball(pb)
    rng = np.random.default_rng(1)
    for _ in range(200):
        ball = rng.integers(3)
        v = rng.normal(size=2)
        pt = pb.centers[ball] + v / np.linalg.norm(v) * rng.uniform(0, 1)
        for l in range(3):
            c = inst.model.disjunctions[0].disjuncts[l].constraints[0]
            x = np.zeros(inst.model.n)
            x[:2] = pt
            for g in ((0,), (1,), (0, 1)):
                assert c.group_value(x, g) <= inst.bound_rule(0, l, 0, g).upper + 1e-9


def test_relu_encoding_is_exact_on_samples():
    net = random_relu_net(3, [2, 4, 3, 1])
    m = gen_relu_min(net).model
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = rng.uniform(-1, 1, 2)
        h1 = np.maximum(net.weights[0] @ x + net.biases[0], 0)
        h2 = np.maximum(net.weights[1] @ h1 + net.biases[1], 0)
        full = np.concatenate([x, h1, h2])
        assert is_feasible(m, full, tol=1e-9)
        assert m.objective_value(full) == pytest.approx(net.forward(x))


@pytest.mark.parametrize("seed", range(3))
def test_small_instances_against_oracles(seed, tight):
    ci = random_clusters(seed, 4, 2, 2)
    inst = gen_kmeans(ci)
    rep = branch_and_bound(build(inst.model, "bigm", None, inst.bound_rule), tight)
    assert rep.objective == pytest.approx(kmeans_optimum(ci.points, 2), abs=1e-6)

    pb = random_pball(seed, 3, 2, 2)
    inst = gen_pball(pb)
    rep = branch_and_bound(build(inst.model, "psplit", inst.partitions(2), inst.bound_rule), tight)
    assert rep.objective == pytest.approx(pball_optimum(pb.centers, 2), abs=1e-6)

    net = random_relu_net(seed, [2, 3, 1])
    rep = branch_and_bound(build(gen_relu_min(net).model, "hull"), tight)
    assert rep.objective == pytest.approx(relu_optimum(net), abs=1e-6)


def test_kmeans_centroid_oracle_beats_random_assignments():
    ci = random_clusters(0, 5, 2, 2)
    best = kmeans_optimum(ci.points, 2)
    rng = np.random.default_rng(0)
    for _ in range(20):
        c = rng.uniform(ci.points.min(0), ci.points.max(0), size=(2, 2))
        cost = ((ci.points[:, None, :] - c[None]) ** 2).sum(2).min(1).sum()
        assert cost >= best - 1e-12


def test_input_files_and_meta_round_trip(tmp_path):
    net = random_relu_net(0, [2, 3, 1])
    p = tmp_path / "net.json"
    p.write_text(json.dumps(network_to_dict(net)))
    back = load_network(p)
    assert back.units == net.units and back.forward([0.3, -0.2]) == pytest.approx(net.forward([0.3, -0.2]))
    csv = tmp_path / "pts.csv"
    csv.write_text("0,1\n2,3\n4,5\n")
    assert load_points_csv(csv).shape == (3, 2)
    for inst in (gen_kmeans(ClusterInstance(load_points_csv(csv), 2)), gen_relu_min(back)):
        again = instance_from_model(inst.model)
        assert again.bound_rule is not None or inst.bound_rule is None
        assert again.model == inst.model


def test_edited_models_drop_family_recipes():
    inst = gen_example1()
    m = inst.model
    edited = type(m)(m.variables[:3] + (m.variables[3].__class__(-1.0, 5.0),), m.objective,
                     m.disjunctions, name=m.name, meta=m.meta)
    assert instance_from_model(edited).bound_rule is None
    assert instance_from_model(m).bound_rule is not None


def test_bad_generator_input():
    with pytest.raises(ProblemError):
        ClusterInstance(np.zeros((1, 2)), 2)
    with pytest.raises(ProblemError):
        random_relu_net(0, [2, 3, 2])
    with pytest.raises(ProblemError):
        gen_pball(random_pball(0, 2, 3, 2))

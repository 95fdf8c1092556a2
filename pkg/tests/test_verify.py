import numpy as np
import pytest

from ncsq import linalg
from ncsq.cz import cuculescu, cz_decompose, default_lambda
from ncsq.field import MatrixField
from ncsq.grid import GridSpec
from ncsq.instances import generate, random_field, trivial
from ncsq.operators import SignSample
from ncsq.report import CheckReport, inequality, to_csv, vanishing
from ncsq.verify import (
    AOInstance,
    bd_instance,
    cadilhac_family,
    check_almost_orthogonality,
    check_bd_vanishing,
    check_cadilhac,
    check_cuculescu,
    check_cz_proposition,
    check_good_part,
    check_main_lemma,
    check_offdiag_sum,
    check_refinement,
    check_strong_pp,
    check_weak11,
    check_zeta,
    random_instance,
)
from ncsq.verify.cz_checks import cadilhac_sides
from ncsq.weights import make_weight

GRID = GridSpec(1, 4, 3)


@pytest.fixture(scope="module")
def instance():
    inst = generate(GRID, 5)
    parts = cz_decompose(inst.field, default_lambda(inst.field))
    return inst, parts


def statuses(reports):
    return {r.check_id: r.status for r in reports}


def test_report_semantics():
    assert inequality("x", 1.0, 1.0).status == "pass"
    assert inequality("x", 1.1, 1.0).status == "fail"
    assert vanishing("x", 1e-12).status == "pass"
    assert vanishing("x", 1e-3).status == "fail"
    r = CheckReport("x", 0.0, 0.0)
    assert r.ratio == 0.0 and not r.failed
    soft = CheckReport("x", 2.0, 1.0, "fail", hard=False)
    assert not soft.failed and not soft.passed


def test_csv_schema():
    text = to_csv([CheckReport("x", 1.0, 2.0, grid=GRID, seed=3, R=64),
                   CheckReport("y", 1.0, 2.0, "hypothesis-failed")])
    lines = text.splitlines()
    assert lines[0] == "check_id,seed,d,J,m,R,lambda,lhs,rhs,ratio,budget,pass"
    assert lines[1] == "x,3,1,4,3,64,nan,1.0,2.0,0.5,nan,1"
    assert lines[2].endswith(",hyp")
    extra = to_csv([CheckReport("x", 1.0, 2.0)], [("axis", "J"), ("value", "4")])
    assert extra.splitlines()[0].startswith("axis,value,check_id")


def test_trivial_instance_passes_everything():
    inst = trivial(GRID, 1.0)
    parts = cz_decompose(inst.field, 1.0)
    reports = (check_cuculescu(inst.field, 1.0, inst.weight, parts.cuculescu)
               + check_cz_proposition(parts) + check_zeta(parts, inst.weight)
               + check_bd_vanishing(parts) + cadilhac_family(parts.cuculescu, inst.field))
    assert all(r.status == "pass" for r in reports)
    assert all(r.lhs == 0 for r in check_bd_vanishing(parts))
    assert check_offdiag_sum(parts, inst.weight).lhs == 0


def test_cz_checks_pass_on_random_instance(instance):
    inst, parts = instance
    f, w = inst.field, inst.weight
    reports = (check_cuculescu(f, parts.lam, w, parts.cuculescu) + check_cz_proposition(parts)
               + check_zeta(parts, w) + check_bd_vanishing(parts) + cadilhac_family(parts.cuculescu, f))
    assert not [r.check_id for r in reports if r.failed]
    ids = {r.check_id for r in reports}
    assert {"cuculescu_weighted", "cz_reconstruction", "zeta_mass", "bd_zeta_cut", "cadilhac_pfq"} <= ids


def test_cz_checks_catch_a_corrupted_decomposition(instance):
    _, parts = instance
    broken = cz_decompose(parts.f, parts.lam)
    broken.g = broken.g + MatrixField.identity(GRID) * 0.1
    assert statuses(check_cz_proposition(broken))["cz_reconstruction"] == "fail"


def test_scalar_offdiag_sum_is_zero():
    grid = GridSpec(1, 4, 1)
    f = random_field(grid, 2)
    parts = cz_decompose(f, default_lambda(f))
    assert check_offdiag_sum(parts, make_weight(grid, "constant")).lhs == 0


def test_cadilhac_single_stopped_cube_direct():
    grid = GridSpec(1, 4, 2)
    for seed in range(20):
        f = random_field(grid, seed)
        res = cuculescu(f, default_lambda(f))
        for k in range(1, grid.J + 1):
            stopped = res.stopped(k)
            if not stopped.any():
                continue
            first = np.flatnonzero(stopped)[0]
            size = 2 ** (grid.J - k)
            E = grid.empty()
            E[first:first + size] = True
            lhs1, lhs2, bound, _ = cadilhac_sides(res, f, k, E, E)
            direct = sum(res.p[k][x] @ f.values[x] @ res.q[k][x] for x in range(first, first + size)) / grid.ncells
            assert lhs1 == pytest.approx(np.sum(np.linalg.svd(direct, compute_uv=False)), rel=1e-10)
            assert bound == pytest.approx(2 * res.lam * np.trace(res.p[k][first]).real * size / grid.ncells)
            assert max(lhs1, lhs2) <= bound * (1 + 1e-9)
            return
    pytest.fail("no stopping found")


def test_cadilhac_rejects_bad_sets(instance):
    inst, parts = instance
    res = parts.cuculescu
    E = GRID.empty()
    E[:4] = True
    K = GRID.empty()
    K[5] = True
    with pytest.raises(ValueError):
        check_cadilhac(res, inst.field, 2, K, E)
    E2 = GRID.empty()
    E2[:3] = True
    with pytest.raises(ValueError):
        check_cadilhac(res, inst.field, 2, E2, E2)


def test_cadilhac_zero_when_nothing_stops():
    inst = trivial(GRID)
    res = cuculescu(inst.field, 1.0)
    reps = check_cadilhac(res, inst.field, 2, GRID.full(), GRID.full())
    assert all(r.lhs == 0 and r.status == "pass" for r in reps)


def test_main_lemma_zero_and_bad_p():
    w = make_weight(GRID, "constant")
    rep = check_main_lemma(MatrixField.zeros(GRID), 1, w, 0.5)
    assert rep.status == "pass"
    with pytest.raises(ValueError):
        check_main_lemma(MatrixField.zeros(GRID), 3, w, 0.5)


def test_almost_orthogonality_trivial_equality():
    v = np.array([[1.0, 2.0, 0.5]])
    inst = AOInstance(np.eye(3)[None], v, v, {0: 1.0})
    rep = check_almost_orthogonality(inst)
    assert rep.status == "pass"
    assert rep.lhs == pytest.approx(rep.rhs)


def test_almost_orthogonality_flags_hypothesis_not_conclusion():
    v = np.array([[1.0, 0.0]])
    inst = AOInstance(3 * np.eye(2)[None], v, v, {0: 1.0})
    assert check_almost_orthogonality(inst).status == "hypothesis-failed"
    with pytest.raises(ValueError):
        AOInstance(np.eye(2)[None], v, v, {0: -1.0})


def test_random_ao_instances():
    for seed in range(50):
        assert check_almost_orthogonality(random_instance(seed)).status == "pass"
        assert check_almost_orthogonality(random_instance(seed, violate=True)).status == "hypothesis-failed"


def test_bd_application_of_almost_orthogonality(instance):
    inst, parts = instance
    ao = bd_instance(parts, inst.weight, 0.5)
    assert check_almost_orthogonality(ao).status == "pass"


def test_good_part_and_weak11(instance):
    inst, parts = instance
    signs = SignSample.random(16, GRID.J, 0)
    good = check_good_part(parts, inst.weight, signs)
    assert [r.check_id for r in good] == ["good_l2", "good_l1", "good_weak"]
    assert all(r.status == "pass" for r in good)
    weak = check_weak11(inst.field, inst.weight, signs, 8)
    assert all(r.status == "pass" for r in weak)
    assert set(weak[0].extra["parts"]) == {"g", "b_d", "b_off"}


def test_good_part_equality_when_nothing_stops():
    inst = trivial(GRID, 0.5)
    parts = cz_decompose(inst.field, 1.0)
    l1 = check_good_part(parts, inst.weight, SignSample.random(4, GRID.J))[1]
    assert l1.lhs == pytest.approx(l1.rhs)


def test_weak11_of_constant_is_zero():
    inst = trivial(GRID, 2.0)
    rep = check_weak11(inst.field, inst.weight, SignSample.random(8, GRID.J), 8)[0]
    assert rep.lhs == 0 and rep.status == "pass"
    with pytest.raises(ValueError):
        check_weak11(inst.field, inst.weight, SignSample.random(8, GRID.J), 4)


def test_strong_pp_rows():
    inst = generate(GridSpec(1, 3, 2), 1)
    exhaustive = SignSample.enumerate_all(3)
    ids = statuses(check_strong_pp(inst.field, 2, inst.weight, exhaustive))
    assert ids == {"strong_p2": "pass", "khintchine_p2": "pass", "self_adjoint_pairing": "pass"}
    sampled = check_strong_pp(inst.field, 2, inst.weight, SignSample.random(4, 3))
    row = [r for r in sampled if r.check_id == "khintchine_p2_sampled"][0]
    assert not row.hard
    assert [r.check_id for r in check_strong_pp(inst.field, 3, inst.weight, exhaustive)] == ["strong_p3"]
    const = trivial(GridSpec(1, 3, 2))
    assert check_strong_pp(const.field, 1.5, const.weight, exhaustive)[0].lhs <= 1e-14
    with pytest.raises(ValueError):
        check_strong_pp(inst.field, 4, inst.weight, exhaustive)


def test_refinement_band():
    assert check_refinement(1.0, 1.9).status == "pass"
    assert check_refinement(1.0, 2.5).status == "fail"
    assert check_refinement(0.0, 0.0).status == "pass"
    assert check_refinement(0.0, 0.1).status == "fail"


def test_zeta_mass_uses_weight(instance):
    inst, parts = instance
    rep = [r for r in check_zeta(parts, inst.weight) if r.check_id == "zeta_mass"][0]
    assert rep.extra["a1"] == inst.weight.a1
    assert rep.ratio <= 1
    assert linalg.is_projection(parts.zeta.values[0])

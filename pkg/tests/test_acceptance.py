"""Acceptance criteria 1-8.  Each test prints one PASS/FAIL line."""

import io
import math
import re
import time
from contextlib import redirect_stdout

import numpy as np
import pytest

from qrac.cli import main
from qrac.cloning import buzek_hillery_clone, example3_summary
from qrac.core import (
    BinaryPovm,
    DensityMatrix,
    bloch_to_density,
    density_to_bloch,
    measure_prob,
    partial_trace,
    random_binary_povm,
    random_pure_state,
)
from qrac.geometry import max_regions, povm_to_halfspace, realized_patterns
from qrac.optimizer import SeeSawConfig, ascent_trace_check, optimal_povm_for_bit, see_saw
from qrac.schemes import (
    AMBAINIS2_P,
    CHUANG3_P,
    HINRY7_CLOSED_FORM,
    bitstrings,
    encode_chuang3,
    evaluate_scheme,
    standard_scheme,
)


def verdict(capsys, number: int, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def random_density(dim, rng):
    k = rng.integers(1, dim + 1)
    w = rng.dirichlet(np.ones(k))
    return DensityMatrix(sum(wi * random_pure_state(dim, rng).projector() for wi in w))


def test_criterion_1_ambainis2(capsys):
    t0 = time.perf_counter()
    report = evaluate_scheme(standard_scheme("ambainis2"))
    elapsed = time.perf_counter() - t0
    err = abs(report.worst_case_p - math.cos(math.pi / 8) ** 2)
    spread = float(np.ptp(report.per_cell))
    ok = err < 1e-9 and report.per_cell.size == 8 and spread < 1e-10 and elapsed < 1
    verdict(capsys, 1, ok, f"worst {report.worst_case_p:.10f}, |err| {err:.1e}, cell spread {spread:.1e}, {elapsed:.3f}s")


def test_criterion_2_chuang3(capsys):
    t0 = time.perf_counter()
    report = evaluate_scheme(standard_scheme("chuang3"))
    blochs = np.array([density_to_bloch(encode_chuang3(x).density()).coords for x in bitstrings(3)])
    elapsed = time.perf_counter() - t0
    err = abs(report.worst_case_p - (0.5 + math.sqrt(3) / 6))
    spread = float(np.ptp(report.per_cell))
    bloch_err = float(np.max(np.abs(np.abs(blochs) - 1 / math.sqrt(3))))
    signs = {tuple(np.sign(b)) for b in blochs}
    ok = err < 1e-9 and report.per_cell.size == 24 and spread < 1e-10 and bloch_err < 1e-9 and len(signs) == 8 and elapsed < 1
    verdict(capsys, 2, ok, f"worst {report.worst_case_p:.10f}, |err| {err:.1e}, spread {spread:.1e}, Bloch |err| {bloch_err:.1e}, {elapsed:.3f}s")


def test_criterion_3_hinry7(capsys):
    t0 = time.perf_counter()
    report = evaluate_scheme(standard_scheme("hinry7"))
    elapsed = time.perf_counter() - t0
    # the closed form is checked against the exhaustive 128 x 7 table
    exhaustive = float(report.per_cell.min())
    err = abs(exhaustive - HINRY7_CLOSED_FORM)
    ok = report.per_cell.shape == (128, 7) and exhaustive >= 0.54 and err < 1e-6 and elapsed < 5
    verdict(capsys, 3, ok, f"exhaustive min {exhaustive:.10f}, (9+2*sqrt3)/23 = {HINRY7_CLOSED_FORM:.10f}, |diff| {err:.1e}, {elapsed:.3f}s")


@pytest.mark.slow
def test_criterion_4_seesaw_ceiling(capsys):
    t0 = time.perf_counter()
    worst41 = []
    for seed in range(5):
        res = see_saw(4, 1, SeeSawConfig(seed=seed, restarts=32))
        worst41.extend(r["worst_case_p"] for r in res.restart_summary)
    r2 = see_saw(2, 1, SeeSawConfig(seed=0, restarts=8))
    r3 = see_saw(3, 1, SeeSawConfig(seed=0, restarts=8))
    elapsed = time.perf_counter() - t0
    best2 = max(r["worst_case_p"] for r in r2.restart_summary)
    best3 = max(r["worst_case_p"] for r in r3.restart_summary)
    ok = (
        len(worst41) == 160
        and max(worst41) <= 0.5 + 1e-6
        and abs(best2 - AMBAINIS2_P) < 1e-4
        and abs(best3 - CHUANG3_P) < 1e-4
        and elapsed < 120
    )
    verdict(
        capsys,
        4,
        ok,
        f"(4,1) max over {len(worst41)} restarts {max(worst41):.9f}; (2,1) {best2:.9f}; (3,1) {best3:.9f}; {elapsed:.1f}s",
    )


def test_criterion_5_counting(capsys):
    t0 = time.perf_counter()
    exact = max_regions(4, 3) == 15 and max_regions(16, 15) == 65535
    chuang = [povm_to_halfspace(p, i) for i, p in enumerate(standard_scheme("chuang3").povms)]
    base = sum(w.realized for w in realized_patterns(chuang, 3))
    rng = np.random.default_rng(5)
    counts = []
    for _ in range(100):
        extra = povm_to_halfspace(random_binary_povm(2, rng), 3)
        counts.append(sum(w.realized for w in realized_patterns(chuang + [extra], 3)))
    elapsed = time.perf_counter() - t0
    ok = exact and base == 8 and max(counts) <= 15 and elapsed < 30
    verdict(capsys, 5, ok, f"max_regions exact: {exact}; chuang3 realized {base}; max with 4th plane {max(counts)} over 100 trials; {elapsed:.1f}s")


def test_criterion_6_predicate(capsys):
    rng = np.random.default_rng(6)
    disagree = banded = 0
    for _ in range(1000):
        povm = random_binary_povm(2, rng)
        rho = random_density(2, rng)
        p = measure_prob(povm.e0, rho)
        hs = povm_to_halfspace(povm)
        value = hs.value(density_to_bloch(rho).coords)
        if abs(p - 0.5) < 1e-10:
            banded += 1
            continue
        disagree += (p > 0.5) != (value > 0)
    verdict(capsys, 6, disagree == 0, f"1000 pairs, {disagree} disagreements, {banded} inside the 1e-10 band")


def test_criterion_7_example3(capsys):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(["demo", "example3"])
    text = buf.getvalue()
    naive = float(re.search(r"naive claim.*?:\s+([0-9.]+)", text).group(1))
    truth = float(re.search(r"exhaustive worst case:\s+([0-9.]+)", text).group(1))
    s = example3_summary()

    rng = np.random.default_rng(7)
    shrink = fid = 0.0
    for _ in range(200):
        psi = random_pure_state(2, rng)
        joint = buzek_hillery_clone(psi)
        r = density_to_bloch(psi.density()).coords
        for keep in (0, 1):
            clone = partial_trace(joint, (2, 2), keep=keep)
            shrink = max(shrink, float(np.max(np.abs(density_to_bloch(clone).coords - 2 / 3 * r))))
            fid = max(fid, abs(np.vdot(psi.amplitudes, clone.matrix @ psi.amplitudes).real - 5 / 6))
    ok = code == 0 and s.true_p <= 0.5 + 1e-9 and truth <= 0.5 + 1e-9 and naive > 0.5 and s.naive_p > 0.5 and shrink < 1e-9 and fid < 1e-9
    verdict(
        capsys,
        7,
        ok,
        f"demo prints naive {naive} and truth {truth}; exact true_p {s.true_p:.3e}; shrink err {shrink:.1e}; fidelity err {fid:.1e}",
    )


def test_criterion_8_properties(capsys):
    rng = np.random.default_rng(8)

    # Bloch round trip
    rt_err, rt_cases = 0.0, 0
    for dim in (2, 3, 4):
        for _ in range(400):
            rho = random_density(dim, rng)
            back = bloch_to_density(density_to_bloch(rho))
            rt_err = max(rt_err, float(np.max(np.abs(back.matrix - rho.matrix))))
            rt_cases += 1

    # POVM completeness: random POVMs and weighted Helstrom measurements
    comp_err, comp_cases = 0.0, 0
    for k in range(1000):
        dim = (2, 4)[k % 2]
        povm = random_binary_povm(dim, rng) if k % 4 < 2 else optimal_povm_for_bit(
            [random_density(dim, rng).matrix for _ in range(4)], k % 2, rng.dirichlet(np.ones(4))
        )
        comp_err = max(comp_err, float(np.max(np.abs(povm.e0 + povm.e1 - np.eye(dim)))))
        min_eig = min(np.linalg.eigvalsh(povm.e0).min(), np.linalg.eigvalsh(povm.e1).min())
        comp_err = max(comp_err, -float(min_eig))
        comp_cases += 1

    # see-saw ascent
    steps, violations = 0, 0
    for seed in range(4):
        for n, m in ((3, 1), (4, 1), (3, 2)):
            res = see_saw(n, m, SeeSawConfig(seed=seed, restarts=1, reweight_rounds=5))
            violations += len(ascent_trace_check(res, tol=1e-12).violations)
            steps += len(res.trace) - 1

    # scaling invariance: each halfspace rescaled by its own positive factor
    sc_cases, sc_mismatch = 0, 0
    for _ in range(64):
        hs = [povm_to_halfspace(random_binary_povm(2, rng), i) for i in range(4)]
        scaled = [h.scaled(10 ** rng.uniform(-3, 3)) for h in hs]
        a = {w.pattern: w.status for w in realized_patterns(hs, 3)}
        b = {w.pattern: w.status for w in realized_patterns(scaled, 3)}
        sc_cases += len(a)
        sc_mismatch += sum(a[p] != b[p] for p in a)

    ok = (
        rt_cases >= 1000 and rt_err < 1e-10
        and comp_cases >= 1000 and comp_err < 1e-10
        and steps >= 1000 and violations == 0
        and sc_cases >= 1000 and sc_mismatch == 0
    )
    verdict(
        capsys,
        8,
        ok,
        f"round trip {rt_cases} cases err {rt_err:.1e}; completeness {comp_cases} cases err {comp_err:.1e}; "
        f"ascent {steps} steps {violations} dips; scaling {sc_cases} patterns {sc_mismatch} mismatches",
    )

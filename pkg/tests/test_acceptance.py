"""End-to-end acceptance checks, one test per criterion.

Each test records PASS/FAIL through the ``acceptance`` fixture, which prints a
summary line per criterion at the end of the run.  Reference values come from
the high-precision oracles in ``oracles.py``, never from the package itself.
"""

import filecmp
import json
import math
import time

import numpy as np
import pytest

from conftest import PLANE_MONITOR, channel_families, random_discrete
from detgeom import cli
from detgeom.channels import AwgnChannel, LaplaceChannel, example_discrete_channel, log_likelihoods
from detgeom.detection import decide, decision_regions, simulate_error_rate
from detgeom.distances import (
    codeword_distance,
    codeword_distance_joint_mc,
    symbol_distance_mc,
    symbol_distance_quadrature,
)
from detgeom.figures import figure_locus
from detgeom.geometry import (
    distance,
    embed_observation,
    embed_observation_from_likelihoods,
    reconstruct_posterior,
    symbol_matrix,
)
from detgeom.sequence import (
    aggregate_repetition,
    embed_codeword,
    embed_sequence,
    repetition_posterior,
    sequence_posterior,
)
from oracles import bayes_posterior, repetition_product_posterior, sequence_product_posterior

pytestmark = pytest.mark.acceptance

SIZES = (2, 3, 4, 8, 16)
FAMILIES = ("discrete", "awgn", "laplace")


def _tied(p, rel=1e-9):
    p = np.asarray(p, dtype=float)
    return tuple(int(k) for k in np.flatnonzero(p >= p.max() * (1 - rel)))


def test_criterion_01_round_trip(acceptance):
    worst = 0.0
    for n in SIZES:
        rng = np.random.default_rng(1000 + n)
        for p in rng.dirichlet(np.full(n, 0.7), size=1000):
            worst = max(worst, float(np.max(np.abs(reconstruct_posterior(embed_observation(p)) - p))))
    print(f"round-trip worst error {worst:.3e}")
    acceptance(1, "posterior -> point -> posterior round trip within 1e-10", worst <= 1e-10)


def test_criterion_02_simplex_geometry(acceptance):
    ok = True
    for n in SIZES:
        rows = symbol_matrix(n)
        norm = math.sqrt((n - 1) / n) / (2 * n)
        spacing = math.sqrt(2) / (2 * n)
        ok &= all(abs(np.linalg.norm(r) - norm) <= 1e-12 for r in rows)
        ok &= all(
            abs(distance(rows[i], rows[j]) - spacing) <= 1e-12 for i in range(n) for j in range(i + 1, n)
        )
    acceptance(2, "symbol norms and pairwise spacing within 1e-12", bool(ok))


def test_criterion_03_hyperplane_membership(acceptance):
    # sweep every producer once more so the check does not depend on test selection
    rng = np.random.default_rng(3)
    for name, (ch, draw) in channel_families().items():
        seq = draw(rng, 6)
        aggregate_repetition(ch, seq)
        embed_sequence(ch, seq)
        embed_codeword(ch.n, [0, 1, 2, 2, 1, 0])
        for y in seq:
            decide(ch, y)
    for n in SIZES:
        embed_observation(rng.dirichlet(np.ones(n)))
    figure_locus(LaplaceChannel([0, 1, -1], 0.5), np.linspace(-5, 5, 101))
    simulate_error_rate(AwgnChannel([0, 1, -1], 1.0), 3, 5000, seed=3)
    print(f"{PLANE_MONITOR.count} embeddings checked, worst |sum| {PLANE_MONITOR.worst:.3e}")
    assert all(PLANE_MONITOR.calls.values()), PLANE_MONITOR.calls
    acceptance(3, "every embedding has coordinate sum <= 1e-9", PLANE_MONITOR.worst <= 1e-9)


def test_criterion_04_repetition_equivalence(acceptance):
    worst = 0.0
    for family in FAMILIES:
        ch, draw = channel_families()[family]
        rng = np.random.default_rng(400 + FAMILIES.index(family))
        for _ in range(500):
            seq = draw(rng, int(rng.integers(1, 9)))
            err = np.max(np.abs(repetition_posterior(ch, seq) - repetition_product_posterior(ch, seq)))
            worst = max(worst, float(err))
    fixture = repetition_posterior(AwgnChannel([0, 1, -1], 1.0), [0.5, -0.5])[0]
    print(f"repetition worst error {worst:.3e}; fixture {fixture:.9f}")
    acceptance(
        4,
        "summed embeddings reproduce the repetition posterior (1e-10) and the 0.57611 fixture",
        worst <= 1e-10 and abs(fixture - 0.57611) <= 1e-5,
    )


def test_criterion_05_sequence_equivalence(acceptance):
    worst = 0.0
    for family in FAMILIES:
        ch, draw = channel_families()[family]
        rng = np.random.default_rng(500 + FAMILIES.index(family))
        for _ in range(200):
            m = int(rng.integers(1, 6))
            seq = draw(rng, m)
            cw = [int(c) for c in rng.integers(0, 3, m)]
            want = sequence_product_posterior(ch, seq, cw)
            worst = max(worst, abs(sequence_posterior(ch, seq, cw) - want) / want)
    print(f"sequence worst relative error {worst:.3e}")
    acceptance(5, "stacked-embedding sequence posterior equals the product form (1e-10 rel)", worst <= 1e-10)


def test_criterion_06_map_coherence(acceptance):
    mismatches = 0
    total = 0
    rng = np.random.default_rng(600)
    # discrete: many random channels and priors, observations drawn from their output sets
    for _ in range(100):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(2, 8))
        ch = random_discrete(rng, n=n, k=k)
        prior = rng.dirichlet(np.ones(n)) if rng.random() < 0.5 else None
        for o in rng.integers(0, k, 100):
            dec = decide(ch, f"o{o}", prior)
            want = _tied(bayes_posterior(ch, f"o{o}", prior))
            mismatches += dec.tied != want or dec.chosen_index != want[0]
            total += 1
    for family in ("awgn", "laplace"):
        ch, _ = channel_families()[family]
        for k, y in enumerate(rng.uniform(-4, 4, 10_000)):
            prior = [0.5, 0.3, 0.2] if k % 2 else None
            dec = decide(ch, y, prior)
            want = _tied(bayes_posterior(ch, y, prior))
            mismatches += dec.tied != want or dec.chosen_index != want[0]
            total += 1
    regions = decision_regions(example_discrete_channel())
    fixture = {o: (d.chosen_index, d.tied if d.tie else None) for o, d in regions.items()}
    fixture_ok = fixture == {
        "a": (0, None), "b": (1, None), "c": (2, None),
        "d": (0, (0, 1)), "e": (0, (0, 2)), "f": (1, (1, 2)),
    }
    print(f"{mismatches} mismatches in {total} observations; table fixture {'ok' if fixture_ok else fixture}")
    acceptance(6, "nearest symbol equals most probable symbol; table fixture decisions and ties",
               mismatches == 0 and fixture_ok)


def test_criterion_07_awgn_closed_form(acceptance):
    rng = np.random.default_rng(700)
    worst = 0.0
    for y, s2 in zip(rng.uniform(-5, 5, 100), rng.uniform(0.05, 10, 100)):
        ch = AwgnChannel([0, 1, -1], s2)
        got = embed_observation_from_likelihoods(log_likelihoods(ch, y))
        want = np.array([2, 6 * y - 1, -6 * y - 1]) / (2 * s2)
        worst = max(worst, float(np.max(np.abs(got - want)) / np.max(np.abs(want))))
    print(f"closed-form worst relative error {worst:.3e}")
    acceptance(7, "AWGN embedding matches (2, 6y-1, -6y-1)/(2 sigma^2) within 1e-12 rel", worst <= 1e-12)


def test_criterion_08_laplace_structure(acceptance):
    ok = True
    for lam in (0.5, 1.0, 2.0):
        ch = LaplaceChannel([0, 1, -1], lam)
        fig = figure_locus(ch, np.linspace(-5, 5, 201))
        ok &= fig.checks["pieces"] == 4 and fig.checks["saturation_points"] == 2
        ys = np.linspace(1.0, 50.0, 400)
        pts = embed_observation_from_likelihoods(ch.loglik_codes(ys))
        ok &= bool(np.all(np.abs(pts - [0, 3 / lam, -3 / lam]) <= 1e-12))
        pts = embed_observation_from_likelihoods(ch.loglik_codes(-ys))
        ok &= bool(np.all(np.abs(pts - [0, -3 / lam, 3 / lam]) <= 1e-12))
    acceptance(8, "Laplace locus: 4 affine pieces, saturation at (0, 3/lambda, -3/lambda)", bool(ok))


def test_criterion_09_distance_decomposition(acceptance):
    rng = np.random.default_rng(900)
    worst_z = 0.0
    for channel in (example_discrete_channel(), random_discrete(rng, n=3, k=6)):
        for k in range(25):
            m = int(rng.integers(1, 7))
            c1 = [int(c) for c in rng.integers(0, 3, m)]
            c2 = [int(c) for c in rng.integers(0, 3, m)]
            exact = codeword_distance(channel, c1, c2).value
            est = codeword_distance_joint_mc(channel, c1, c2, samples=100_000, seed=900 + k)
            worst_z = max(worst_z, abs(est.value - exact) / est.stderr)
    awgn_z = 0.0
    ch = AwgnChannel([0, 1, -1], 1.0)
    for i in range(3):
        for j in range(3):
            q = symbol_distance_quadrature(ch, i, j).value
            est = symbol_distance_mc(ch, i, j, samples=100_000, seed=10 * i + j)
            awgn_z = max(awgn_z, abs(est.value - q) / est.stderr)
    print(f"discrete worst |z| {worst_z:.2f}; AWGN quadrature vs MC worst |z| {awgn_z:.2f}")
    acceptance(9, "joint MC codeword distance agrees with the per-position sum (4 stderr)",
               worst_z <= 4 and awgn_z <= 4)


def test_criterion_10_simulator_agreement(acceptance):
    ok = True
    for family in FAMILIES:
        ch, _ = channel_families()[family]
        for m in (1, 3, 5):
            start = time.perf_counter()
            res = simulate_error_rate(ch, m, 100_000, seed=1000 + m)
            elapsed = time.perf_counter() - start
            print(f"{family} M={m}: agreement {res.agreements}/{res.decoded}, "
                  f"error rate {res.error_rate:.4f}, {elapsed:.1f}s")
            ok &= res.agreements == 100_000 and res.erasures.sum() == 0 and elapsed < 60
    acceptance(10, "geometric and Bayes decoders agree on all 1e5 trials, under a minute each", bool(ok))


def _run_all_commands(specs, out, capsys):
    book = out.parent / "book.txt"
    book.write_text("1,2,3\n3,2,1\n2,2,2\n")
    cmds = []
    for name, spec in specs.items():
        obs = ["a", "d", "f"] if name == "table" else ["0.5", "-0.5", "1.7"]
        cmds += [
            ["embed", "--spec", spec, "--obs", *obs],
            ["decode", "--spec", spec, "--obs", *obs],
            ["decode", "--spec", spec, "--obs", *obs, "--repetition", "3"],
            ["decode", "--spec", spec, "--obs", *obs, "--sequence"],
            ["simulate", "--spec", spec, "--repetitions", "1", "3", "--trials", "20000", "--workers", "3"],
            ["distances", "--spec", spec, "--method", "both", "--samples", "5000", "--codebook", str(book)],
            ["figure", "--spec", spec],
        ]
    stdout = []
    for k, argv in enumerate(cmds):
        target = out / f"run{k:02d}"
        target.mkdir()
        code = cli.main([*argv, "--out", str(target), "--seed", "12345"])
        stdout.append((code, capsys.readouterr().out))
    return stdout


def test_criterion_11_cli_determinism(acceptance, tmp_path, capsys):
    specs = {}
    for name, spec in {
        "table": example_discrete_channel().to_dict(),
        "awgn": {"type": "awgn", "symbols": [0, 1, -1], "sigma2": 1.0},
        "laplace": {"type": "laplace", "symbols": [0, 1, -1], "lambda": 1.0},
    }.items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(spec))
        specs[name] = str(path)
    first, second = tmp_path / "a" / "out", tmp_path / "b" / "out"
    first.mkdir(parents=True)
    second.mkdir(parents=True)
    out1 = _run_all_commands(specs, first, capsys)
    out2 = _run_all_commands(specs, second, capsys)
    files = sorted(p.relative_to(first) for p in first.rglob("*") if p.is_file())
    same = all(filecmp.cmp(first / f, second / f, shallow=False) for f in files)
    same &= files == sorted(p.relative_to(second) for p in second.rglob("*") if p.is_file())
    codes_ok = all(code == 0 for code, _ in out1)
    print(f"{len(files)} output files compared")
    acceptance(11, "repeated CLI runs give byte-identical outputs",
               bool(same) and out1 == out2 and codes_ok and len(files) > 0)

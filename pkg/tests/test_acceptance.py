"""Acceptance gate: one test per criterion, one PASS/FAIL line each.

Every check recomputes its numbers from tabulated parameters or from an
oracle written here; builder-reported values are never trusted.
"""
import contextlib
import itertools
import math

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from nqs_uat import activations as acts
from nqs_uat.ansatz import NNBFParams, NPSParams, eval_nps_log, tabulate
from nqs_uat.boolean_fourier import leading_asymptotic, neuron_fourier, parity_flip, wht_forward, wht_inverse
from nqs_uat.constructors import (
    build_fnn_exact,
    build_nnbf_exact,
    build_nps_general,
    build_nps_saturating,
    build_sign_factor,
    general_parts,
    necessity_residual,
    regularize_zeros,
    separating_vector,
)
from nqs_uat.fockspace import WavefunctionTable
from nqs_uat.verify import compare, fourier_residual, naive_wht, random_target, sector_projection


@contextlib.contextmanager
def criterion(number, title):
    detail = {"text": ""}
    try:
        yield detail
    except BaseException as exc:
        ACCEPTANCE_LINES.append((f"criterion {number} ({title})", False, detail["text"] or repr(exc)[:160]))
        raise
    ACCEPTANCE_LINES.append((f"criterion {number} ({title})", True, detail["text"]))


def occupations(K):
    """Configurations by brute force, orbital 0 first (most significant bit)."""
    return np.array(list(itertools.product((0, 1), repeat=K)), dtype=np.float64)


def spins(K):
    return 1.0 - 2.0 * occupations(K)


def test_wht_round_trip_and_oracle():
    with criterion(1, "transform round trip and direct-sum oracle") as d:
        rng = np.random.default_rng(101)
        worst_rt, worst_naive = 0.0, 0.0
        for t in range(50):
            K = 1 + t % 12
            a = rng.standard_normal(1 << K)
            c = wht_forward(a)
            worst_rt = max(worst_rt, float(np.max(np.abs(wht_inverse(c).amplitudes - a))))
            if K <= 8:
                worst_naive = max(worst_naive, float(np.max(np.abs(c.coeffs - naive_wht(a)))))
        d["text"] = f"round trip {worst_rt:.1e}, oracle {worst_naive:.1e} (< 1e-12)"
        assert worst_rt < 1e-12 and worst_naive < 1e-12


def test_neuron_fourier_worked_examples():
    with criterion(2, "two-orbital and one-orbital neuron formulas") as d:
        rng = np.random.default_rng(202)
        names = ["cos", "tanh", "sigmoid", "exp", "sin"]
        worst = 0.0
        for t in range(10):
            f = acts.get_activation(names[t % len(names)])
            b, w1, w2 = rng.uniform(-1.5, 1.5, 3)
            pp, mp = float(f(b + w1 + w2)), float(f(b - w1 + w2))
            pm, mm = float(f(b + w1 - w2)), float(f(b - w1 - w2))
            want = [(pp + mp + pm + mm) / 4, (pp + mp - pm - mm) / 4,
                    (pp - mp + pm - mm) / 4, (pp - mp - pm + mm) / 4]
            got = neuron_fourier(f, b, [w1, w2]).coeffs
            worst = max(worst, float(np.max(np.abs(got - want))))
            one = neuron_fourier(f, b, [w1]).coeffs
            plus, minus = float(f(b + w1)), float(f(b - w1))
            worst = max(worst, abs(one[0] - (plus + minus) / 2), abs(one[1] - (plus - minus) / 2))
        d["text"] = f"max deviation {worst:.1e} over 10 triples (< 1e-12)"
        assert worst < 1e-12


def test_parity_flip():
    with criterion(3, "negating one weight flips odd coefficients") as d:
        rng = np.random.default_rng(303)
        worst = 0.0
        for t in range(20):
            K = 2 + t % 3
            f = acts.get_activation(["cos", "tanh", "sigmoid", "exp"][t % 4])
            b, w = rng.uniform(-1, 1), rng.uniform(-1, 1, K)
            k = int(rng.integers(K))
            base = neuron_fourier(f, b, w).coeffs
            w2 = w.copy()
            w2[k] = -w2[k]
            flipped = neuron_fourier(f, b, w2).coeffs
            x_k = (np.arange(1 << K) >> (K - 1 - k)) & 1
            worst = max(worst, float(np.max(np.abs(flipped - (-1.0) ** x_k * base))))
            worst = max(worst, float(np.max(np.abs(parity_flip(neuron_fourier(f, b, w), k).coeffs - flipped))))
        d["text"] = f"max deviation {worst:.1e} over 20 neurons (< 1e-12)"
        assert worst < 1e-12


def test_small_weight_asymptotics():
    with criterion(4, "leading small-weight term, quadratic error decay") as d:
        u = np.array([0.6, -0.8, 0.5])
        ratios = []
        for f, b in [(acts.exp(), 0.3), (acts.cos().log, 0.2), (acts.cos().log, -0.5)]:
            for x in [(1, 0, 0), (0, 1, 0), (1, 1, 0), (0, 1, 1), (1, 0, 1)]:
                mask = int("".join(map(str, x)), 2)
                errs = []
                for eps in (1e-1, 1e-2, 1e-3):
                    w = eps * u
                    lead = leading_asymptotic(f, b, x) * np.prod(w ** np.array(x))
                    errs.append(abs(neuron_fourier(f, b, w)[mask] / lead - 1.0))
                ratios += [errs[0] / errs[1], errs[1] / errs[2]]
        d["text"] = f"error ratio per decade in [{min(ratios):.1f}, {max(ratios):.1f}] (want 100 within x2)"
        assert all(50.0 <= r <= 200.0 for r in ratios)


def test_fnn_construction():
    with criterion(5, "one-layer network reproduces any table") as d:
        worst, mono_fail = 0.0, []
        for K in range(3, 7):
            for seed in range(20):
                psi = random_target(K, seed)
                errs = [compare(tabulate(build_fnn_exact(psi, th)), psi).max_abs for th in (10.0, 20.0, 40.0, 80.0)]
                worst = max(worst, errs[2])
                if any(b > a for a, b in zip(errs, errs[1:])):
                    mono_fail.append((K, seed))
        d["text"] = f"worst max-abs at theta=40 {worst:.1e} (< 1e-10); non-monotone seeds {len(mono_fail)}"
        assert worst < 1e-10 and not mono_fail


def test_nnbf_construction():
    with criterion(6, "backflow determinant on the two-electron sector") as d:
        worst, sign_ok = 0.0, True
        for seed in range(10):
            psi = sector_projection(random_target(4, seed), 2)
            p = build_nnbf_exact(psi, 2, 40.0)
            worst = max(worst, compare(tabulate(p), psi).max_abs)
            swapped = NNBFParams(p.activation, p.W, p.b, p.c[:, ::-1, :], 2)
            a, s = np.asarray(tabulate(p)), np.asarray(tabulate(swapped))
            sign_ok &= bool(np.array_equal(np.sign(s), -np.sign(a)))
        d["text"] = f"sector max-abs {worst:.1e} (< 1e-8); column swap flips every sign: {sign_ok}"
        assert worst < 1e-8 and sign_ok


def test_saturating_nps():
    with criterion(7, "saturating product state and separating margins") as d:
        worst = 0.0
        for K in (3, 4, 5):
            for seed in range(10):
                a = np.asarray(random_target(K, seed))
                target = WavefunctionTable(K, 0.9 * a / np.max(np.abs(a)))
                worst = max(worst, compare(tabulate(build_nps_saturating(target, 60.0, acts.tanh())), target).max_abs)
        min_margin = math.inf
        for K in range(1, 11):
            n = occupations(K)
            for i in range(1 << K):
                diff = (n - n[i]) @ separating_vector(i, K)
                min_margin = min(min_margin, float(np.min(np.delete(diff, i))))
        d["text"] = f"max-abs {worst:.1e} (< 1e-6); smallest margin over K<=10 is {min_margin:g} (>= 1)"
        assert worst < 1e-6 and min_margin >= 1.0


def test_zero_regularization():
    with criterion(8, "zeros lifted within eps, norm kept") as d:
        rng = np.random.default_rng(808)
        worst_rel, worst_norm = 0.0, 0.0
        for t in range(20):
            K = 2 + t % 5
            amps = rng.standard_normal(1 << K)
            # at least two zeros: a lone zero becomes exactly eps (see notes)
            n_zero = int(rng.integers(2, (1 << K) // 2 + 1))
            amps[rng.choice(1 << K, n_zero, replace=False)] = 0.0
            psi = WavefunctionTable(K, amps / np.linalg.norm(amps))
            for eps in (1e-1, 1e-2):
                out = regularize_zeros(psi, eps)
                dev = float(np.max(np.abs(np.asarray(out) - np.asarray(psi))))
                worst_rel = max(worst_rel, dev / eps)
                worst_norm = max(worst_norm, abs(float(np.linalg.norm(np.asarray(out))) - 1.0))
                assert np.all(np.asarray(out) != 0)
        d["text"] = f"max deviation {worst_rel:.3f} eps (< 1); norm error {worst_norm:.1e} (< 1e-12)"
        assert worst_rel < 1.0 and worst_norm < 1e-12


def test_sign_factor():
    with criterion(9, "cosine sign factor matches every sign") as d:
        mismatches = 0
        total = 0
        for K in (3, 4, 5):
            for seed in range(20):
                psi = random_target(K, 1000 + seed)
                s = np.asarray(tabulate(build_sign_factor(psi, acts.cos()).params(), K))
                mismatches += int(np.sum(np.sign(s) != np.sign(np.asarray(psi))))
                total += 1 << K
        d["text"] = f"{mismatches} sign mismatches over {total} amplitudes"
        assert mismatches == 0


def test_general_nps():
    with criterion(10, "general product state: residual bound and convergence") as d:
        worst_res, worst_err, non_decreasing = 0.0, 0.0, []
        for K in (3, 4):
            for seed in range(5):
                psi = random_target(K, seed)
                errs = []
                for delta in (1e-2, 1e-3, 1e-4):
                    params, report = build_nps_general(psi, acts.cos(), delta=delta)
                    errs.append(compare(tabulate(params), psi).max_abs)
                # residual of the positive part against the table it was fitted to
                sign, pos = general_parts(params, report)
                psi_t = regularize_zeros(WavefunctionTable(K, np.asarray(psi) / psi.norm()),
                                         report.knobs["eps_zero"])
                positive = WavefunctionTable(K, np.asarray(psi_t) / np.asarray(tabulate(sign)))
                res = np.abs(fourier_residual(pos, positive).coeffs[1:])
                worst_res = max(worst_res, float(np.max(res)))
                worst_err = max(worst_err, errs[-1])
                if not errs[0] > errs[1] > errs[2]:
                    non_decreasing.append((K, seed, errs))
        d["text"] = (f"max residual {worst_res:.2e} (<= {1e-4 / 2 + 1e-10:.2e}); "
                     f"max-abs {worst_err:.1e} (< 1e-2); non-decreasing runs {len(non_decreasing)}")
        assert worst_res <= 1e-4 / 2 + 1e-10 and worst_err < 1e-2 and not non_decreasing


def test_necessity():
    with criterion(11, "exp of a quadratic cannot reach the top mode") as d:
        z = spins(3)
        amps = np.exp(np.prod(z, axis=1))
        psi = WavefunctionTable(3, amps / np.linalg.norm(amps))
        top = necessity_residual(acts.get_activation("exp-poly:2"), psi)
        params, _ = build_nps_general(psi, acts.cos(), delta=1e-4)
        err = compare(tabulate(params), psi).max_abs
        d["text"] = f"top residual {top!r} (1 to 1e-12); cosine max-abs {err:.1e} (< 1e-2)"
        assert abs(top - 1.0) <= 1e-12 and err < 1e-2


def test_log_direct_consistency():
    with criterion(12, "log-space and direct products agree") as d:
        rng = np.random.default_rng(1212)
        worst = 0.0
        for t in range(50):
            K = 2 + t % 4
            act = [acts.sigmoid(), acts.exp(), acts.cos()][t % 3]
            Nh = int(rng.integers(1, 6))
            W = rng.uniform(-0.5, 0.5, (Nh, K))
            b = rng.uniform(-0.5, 0.5, Nh)
            mult = rng.integers(1, 30, Nh)
            p = NPSParams(act, W, b, mult, float(rng.uniform(-1, 1)))
            for n in occupations(K):
                direct = math.exp(p.log_scale)
                for a in range(Nh):
                    direct *= float(act(b[a] + W[a] @ n)) ** int(mult[a])
                sign, logmag = eval_nps_log(p, n.astype(int))
                worst = max(worst, abs(direct - sign * math.exp(logmag)) / abs(direct))
        d["text"] = f"max relative deviation {worst:.1e} over 50 instances (<= 1e-10)"
        assert worst <= 1e-10

"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to watch them stream)."""

import itertools
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest
import torch
import torch.nn as nn

from comixify import aesthetics as ae
from comixify import kts
from comixify import selector as sl
from comixify import styletransfer as stx
from comixify import summarizer as sm
from comixify.features import FeatureMatrix
from comixify.kts import Segmentation
from comixify.modelzoo import (ensure_models, synthetic_checker_comics,
                               synthetic_feature_corpus, synthetic_photos)
from comixify.styletransfer.gatys import FeatureMap, StyleLossConfig
from comixify.styletransfer.networks import images_to_tensor
from comixify.summarizer import HighlightScores


def report(name: str, ok: bool, detail: str = ""):
    line = f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    print(line, flush=True)
    assert ok, line


def make_features(rows) -> FeatureMatrix:
    data = np.asarray(rows, dtype=np.float64)
    return FeatureMatrix(data=data, frame_index_map=list(range(data.shape[0])),
                         extractor_id="test")


# --------------------------------------------------------------------------
# 1. KTS oracle equivalence

def test_kts_oracle_equivalence():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    checked = 0
    for _ in range(200):
        T = int(rng.integers(2, 13))
        D = int(rng.integers(1, 5))
        X = rng.normal(size=(T, D))
        K = kts.kernel_matrix(make_features(X))
        S = kts.scatter_table(K.K)
        for m in range(1, T + 1):
            seg = kts.optimal_m_segmentation(K, m)
            best = None
            for cps in itertools.combinations(range(1, T), m - 1):
                bounds = (0,) + cps + (T,)
                cost = 0.0
                for a, b in reversed(list(zip(bounds[:-1], bounds[1:]))):
                    cost = S[a, b] + cost
                if best is None or cost < best:
                    best = cost
            assert seg.cost == best, f"T={T} m={m}: {seg.cost} != {best}"
            checked += 1
    elapsed = time.perf_counter() - t0
    report("kts-oracle-equivalence", elapsed < 10.0,
           f"{checked} segmentations exact in {elapsed:.2f}s")


# --------------------------------------------------------------------------
# 2. Selector oracle + monotone invariance

def oracle_selection(segments, probs, aesthetic, n, k):
    means = [np.mean(probs[a:b]) for a, b in segments]
    ranked = sorted(range(len(segments)), key=lambda i: (-means[i], i))[:n]
    top = [segments[i] for i in sorted(ranked)]
    peaks = []
    for a, b in top:
        best = a
        for t in range(a, b):
            if probs[t] > probs[best]:
                best = t
        peaks.append(best)
    group = len(peaks) // k
    kept = []
    for g in range(k):
        lo = g * group
        best = lo
        for j in range(lo, lo + group):
            if aesthetic[peaks[j]] > aesthetic[peaks[best]]:
                best = j
        kept.append(peaks[best])
    return top, peaks, kept


def test_selector_oracle():
    rng = np.random.default_rng(77)
    for _ in range(100):
        T = int(rng.integers(2, 11))
        n_segs = int(rng.integers(1, T + 1))
        cuts = sorted(rng.choice(np.arange(1, T), size=n_segs - 1,
                                 replace=False).tolist())
        seg = Segmentation(change_points=cuts, cost=0.0, T=T)
        probs = rng.random(T)
        aesthetic = rng.random(T)
        n = int(rng.integers(1, n_segs + 1))
        k = int(rng.choice([d for d in range(1, n + 1) if n % d == 0]))

        scores = HighlightScores(probs)
        top = sl.select_top_segments(seg, scores, n)
        peaks = sl.pick_segment_peaks(top, scores)
        result = sl.aesthetic_filter(peaks, [aesthetic[i] for i in peaks], k)

        o_top, o_peaks, o_kept = oracle_selection(seg.segments, probs, aesthetic, n, k)
        assert top == o_top and peaks == o_peaks
        assert result.frame_indices == o_kept

        # monotone-transform invariance
        transformed = [math.exp(2.0 * aesthetic[i]) - 3.0 for i in peaks]
        again = sl.aesthetic_filter(peaks, transformed, k)
        assert again.frame_indices == result.frame_indices
    report("selector-oracle", True, "100 instances exact + argmax invariance")


# --------------------------------------------------------------------------
# 3. Loss unit values

def test_loss_unit_values():
    content = stx.content_loss(FeatureMap([[1.0]]), FeatureMap([[0.0]]))
    ok_content = abs(content - 0.5) < 1e-9

    ga = {"l": stx.GramMatrix(G=np.array([[2.0]]), source_layer="l", n_positions=1)}
    gb = {"l": stx.GramMatrix(G=np.array([[0.0]]), source_layer="l", n_positions=1)}
    style = stx.style_loss(ga, gb, StyleLossConfig(layer_weights={"l": 1.0}))
    ok_style = abs(style - 0.5) < 1e-9

    feats = np.ones((2, 2))
    gen_term = float(stx.generator_loss(np.array([0.5]), feats, feats, 10.0))
    ok_gen = abs(gen_term - math.log(2)) < 1e-9

    half = np.full(4, 0.5)
    disc = float(stx.discriminator_loss(half, half, half))
    ok_disc = abs(disc - 3 * math.log(2)) < 1e-9

    report("loss-unit-values", ok_content and ok_style and ok_gen and ok_disc,
           f"content={content} style={style} gen={gen_term:.12f} disc={disc:.12f}")


# --------------------------------------------------------------------------
# 4. EMD value + metric axioms

def test_emd_value_and_metric_axioms():
    def one_hot(b):
        p = np.zeros(10)
        p[b - 1] = 1.0
        return ae.RatingDistribution(p)

    extreme = ae.emd_loss(one_hot(1), one_hot(10))
    ok_value = abs(extreme - 0.94868) < 1e-5

    rng = np.random.default_rng(123)

    def rand_dist():
        raw = rng.random(10) + 1e-9
        return ae.RatingDistribution(raw / raw.sum())

    ok_axioms = True
    for _ in range(1000):
        p, q, r = rand_dist(), rand_dist(), rand_dist()
        dpq, dqp = ae.emd_loss(p, q), ae.emd_loss(q, p)
        if abs(dpq - dqp) > 1e-12 or dpq < 0:
            ok_axioms = False
            break
        if ae.emd_loss(p, r) > dpq + ae.emd_loss(q, r) + 1e-9:
            ok_axioms = False
            break
        if np.max(np.abs(p.p - q.p)) > 1e-9 and dpq == 0.0:
            ok_axioms = False
            break
    report("emd-metric", ok_value and ok_axioms,
           f"one-hot distance {extreme:.6f}, 1000 axiom checks")


# --------------------------------------------------------------------------
# 5. AdaIN / WCT statistic matching

def test_statistic_matching():
    rng = np.random.default_rng(321)
    ok_adain = True
    ok_wct = True
    for _ in range(100):
        n = int(rng.integers(1, 6))
        content = FeatureMap(rng.normal(0, rng.uniform(0.5, 2.0), size=(n, 96)))
        style = FeatureMap(rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 2.0),
                                      size=(n, 80)))
        out = stx.adain(content, style).values
        if (np.abs(out.mean(1) - style.values.mean(1)).max() > 1e-4
                or np.abs(out.std(1) - style.values.std(1)).max() > 1e-4):
            ok_adain = False

        if n >= 2:
            c2 = FeatureMap(rng.normal(size=(n, 96)))
            s2 = FeatureMap(rng.normal(size=(n, 80)) * rng.uniform(0.5, 2.0))
            w = stx.wct(c2, s2).values

            def cov(v):
                x = v - v.mean(1, keepdims=True)
                return x @ x.T / (v.shape[1] - 1)

            rel = (np.linalg.norm(cov(w) - cov(s2.values), "fro")
                   / np.linalg.norm(cov(s2.values), "fro"))
            if rel > 1e-4:
                ok_wct = False
    report("statistic-matching", ok_adain and ok_wct,
           "AdaIN mean/std and WCT covariance within 1e-4 on 100 maps")


# --------------------------------------------------------------------------
# 6. Gradient checks

def _finite_difference(params, objective, h=1e-6):
    flat = torch.cat([p.detach().reshape(-1) for p in params]).clone()

    def set_params(values):
        with torch.no_grad():
            offset = 0
            for p in params:
                cnt = p.numel()
                p.copy_(values[offset:offset + cnt].reshape(p.shape))
                offset += cnt

    fd = np.zeros(flat.numel())
    for i in range(flat.numel()):
        bump = flat.clone()
        bump[i] += h
        set_params(bump)
        up = objective()
        bump[i] -= 2 * h
        set_params(bump)
        down = objective()
        fd[i] = (up - down) / (2 * h)
    set_params(flat)
    return fd


def _rel_error(loss_fn, params):
    grads = torch.autograd.grad(loss_fn(), params)
    analytic = torch.cat([g.reshape(-1) for g in grads]).numpy()
    fd = _finite_difference(params, lambda: float(loss_fn().detach()))
    return np.linalg.norm(analytic - fd) / max(np.linalg.norm(fd), 1e-30)


def test_gradient_checks():
    # policy gradient via exact 8-mask enumeration on T=3
    fm = make_features(np.array([[1.0, 0, 0], [0, 1.0, 0], [0.3, 0.5, 0.8]]))
    x = torch.tensor(fm.data, dtype=torch.float64)
    torch.manual_seed(1)
    policy = sm.DSNPolicy(input_dim=3, hidden_dim=2).double()
    masks = list(itertools.product([0, 1], repeat=3))
    rewards = {m: sm.episode_reward(fm, [i for i, b in enumerate(m) if b])
               for m in masks}

    def mask_logp(probs, mask):
        terms = [torch.log(p) if b else torch.log(1 - p)
                 for p, b in zip(probs, mask)]
        return torch.stack(terms).sum()

    def surrogate():
        probs = policy(x)
        total = torch.zeros((), dtype=torch.float64)
        for mask in masks:
            logp = mask_logp(probs, mask)
            total = total + logp.exp().detach() * (rewards[mask] - 0.25) * logp
        return total

    params = list(policy.parameters())
    grads = torch.autograd.grad(surrogate(), params)
    analytic = torch.cat([g.reshape(-1) for g in grads]).numpy()

    def expected_reward():
        probs = policy(x)
        total = torch.zeros((), dtype=torch.float64)
        for mask in masks:
            total = total + mask_logp(probs, mask).exp() * rewards[mask]
        return total

    fd = _finite_difference(params, lambda: float(expected_reward().detach()))
    rel_policy = np.linalg.norm(analytic - fd) / np.linalg.norm(fd)

    # GAN losses on 3-layer toy nets
    def toy(seed, out_channels, sigmoid):
        torch.manual_seed(seed)
        net = nn.Sequential(
            nn.Conv2d(3, 2, 3, 1, 1), nn.ReLU(),
            nn.Conv2d(2, 2, 3, 1, 1), nn.ReLU(),
            nn.Conv2d(2, out_channels, 3, 1, 1)).double()
        if sigmoid:
            return net, lambda t: torch.sigmoid(net(t))
        return net, net

    disc_net, disc = toy(2, 1, True)
    torch.manual_seed(3)
    comics = torch.rand(2, 3, 5, 5, dtype=torch.float64)
    generated = torch.rand(2, 3, 5, 5, dtype=torch.float64)
    edges = torch.rand(2, 3, 5, 5, dtype=torch.float64)
    rel_d = _rel_error(lambda: stx.discriminator_loss(disc(comics), disc(generated),
                                                      disc(edges)),
                       list(disc_net.parameters()))

    gen_net, gen = toy(4, 3, False)
    content_net, content = toy(5, 2, False)
    for p in content_net.parameters():
        p.requires_grad_(False)
    for p in disc_net.parameters():
        p.requires_grad_(False)
    photos = torch.rand(2, 3, 5, 5, dtype=torch.float64)

    def gen_loss():
        fake = torch.tanh(gen(photos))
        return stx.generator_loss(disc(fake), content(photos), content(fake), 5.0)

    rel_g = _rel_error(gen_loss, list(gen_net.parameters()))

    ok = rel_policy < 1e-3 and rel_d < 1e-3 and rel_g < 1e-3
    report("gradient-checks", ok,
           f"policy={rel_policy:.2e} disc={rel_d:.2e} gen={rel_g:.2e}")


# --------------------------------------------------------------------------
# 7. Training smoke properties

def test_training_smoke_dsn():
    t0 = time.perf_counter()
    corpus = synthetic_feature_corpus(2, 16, 8, seed=5)
    cfg = sm.DSNConfig(hidden_dim=16, epochs=50, episodes=20, seed=2, lr=1e-2)
    _policy, log = sm.train_dsn(corpus, cfg)
    elapsed = time.perf_counter() - t0
    ok = (log[-1]["mean_reward"] > log[0]["mean_reward"]) and elapsed < 600
    report("training-smoke-dsn", ok,
           f"epoch1={log[0]['mean_reward']:.4f} epoch50={log[-1]['mean_reward']:.4f} "
           f"in {elapsed:.1f}s")


def test_training_smoke_generator_pretrain():
    t0 = time.perf_counter()
    photos = synthetic_photos(8, 64, seed=1)
    cfg = stx.GanTrainConfig(generator_channels=8, generator_res_blocks=2, seed=0)
    _gen, log = stx.pretrain_generator(photos, 200, cfg)
    elapsed = time.perf_counter() - t0
    ok = log[-1]["content_loss"] < 0.5 * log[0]["content_loss"] and elapsed < 600
    report("training-smoke-generator", ok,
           f"content {log[0]['content_loss']:.4f}->{log[-1]['content_loss']:.4f} "
           f"in {elapsed:.1f}s")


def test_training_smoke_discriminator_pretrain():
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    photos = [rng.random((64, 64, 3)) for _ in range(8)]
    comics = synthetic_checker_comics(8, 64, 8, seed=2)
    triplet = stx.TrainingTriplet.build(photos, comics)
    cfg = stx.GanTrainConfig(discriminator_channels=8, lr_discriminator=1e-3, seed=0)
    disc, _log = stx.pretrain_discriminator(triplet, 200, cfg)
    with torch.no_grad():
        d_comics = float(disc(images_to_tensor(comics)).mean())
        d_photos = float(disc(images_to_tensor(photos)).mean())
    elapsed = time.perf_counter() - t0
    ok = d_comics > 0.8 and d_photos < 0.2 and elapsed < 600
    report("training-smoke-discriminator", ok,
           f"D(comics)={d_comics:.3f} D(photos)={d_photos:.3f} in {elapsed:.1f}s")


def test_training_smoke_comixgan_full():
    t0 = time.perf_counter()
    photos = synthetic_photos(16, 64, seed=7)
    comics = synthetic_checker_comics(16, 64, 8, seed=8)
    triplet = stx.TrainingTriplet.build(photos, comics)
    cfg = stx.GanTrainConfig(generator_channels=8, generator_res_blocks=2,
                             discriminator_channels=8, lr_discriminator=1e-3,
                             steps=300, pretrain_generator_steps=60,
                             pretrain_discriminator_steps=60, seed=0)
    _gen, report_doc = stx.train_comixgan(triplet, cfg)
    elapsed = time.perf_counter() - t0
    coverage = all(report_doc["generator_grad_coverage"].values())
    ratio_ok = report_doc["discriminator_steps"] == 100
    ok = coverage and ratio_ok and elapsed < 600
    report("training-smoke-comixgan", ok,
           f"300 steps, d_steps={report_doc['discriminator_steps']}, "
           f"all tensors touched={coverage}, {elapsed:.1f}s")


# --------------------------------------------------------------------------
# 8. End-to-end CLI determinism

@pytest.fixture(scope="module")
def cli_models(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli_models")
    ensure_models(path, seed=0)
    return path


def test_cli_end_to_end_determinism(cli_models, tmp_path):
    runs = []
    elapsed = []
    for tag in ("one", "two"):
        out = tmp_path / tag
        cmd = [sys.executable, "-m", "comixify.cli", "run",
               "--input", "sample:demo", "--k", "8",
               "--out", str(out), "--models-dir", str(cli_models),
               "--workdir", str(tmp_path / f"wd_{tag}"), "--seed", "0"]
        t0 = time.perf_counter()
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=300)
        elapsed.append(time.perf_counter() - t0)
        assert proc.returncode == 0, proc.stderr
        summary = json.loads(proc.stdout)
        runs.append([open(p, "rb").read() for p in summary["pages"]])
        assert len(summary["keyframes"]["frame_indices"]) == 8

    identical = (len(runs[0]) == len(runs[1])
                 and all(a == b for a, b in zip(runs[0], runs[1])))
    fast = max(elapsed) < 60.0
    report("e2e-cli-determinism", identical and fast,
           f"{len(runs[0])} page(s), byte-identical={identical}, "
           f"runs {elapsed[0]:.1f}s/{elapsed[1]:.1f}s")


# --------------------------------------------------------------------------
# 9. Eq-1 popularity values + SVR Spearman

def test_popularity_values_and_svr():
    ok_vals = (abs(ae.popularity_label(999, 1000) - 0.0) < 1e-9
               and abs(ae.popularity_label(0, 1) - 0.0) < 1e-9
               and abs(ae.popularity_label(9999, 100) - math.log(100)) < 1e-9)

    rng = np.random.default_rng(11)
    X = rng.normal(size=(500, 8))
    y = np.tanh(X[:, 3]) * 2.0 + 0.05 * rng.normal(size=500)
    reg = ae.train_popularity_regressor(X[:400], y[:400])
    rho = ae.spearman(reg.predict(X[400:]), y[400:])
    report("eq1-popularity", ok_vals and rho >= 0.9,
           f"label values exact, held-out Spearman={rho:.3f}")

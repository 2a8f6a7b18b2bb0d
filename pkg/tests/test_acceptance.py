"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Every tolerance is pinned here; trend criteria average over five seeds, and
each seed runs its own demo generation, training and evaluation pipeline.
Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion lines.
"""

import logging
import os

import numpy as np
import pytest
from dataclasses import replace

from teleassist import baselines, harness, intent, nn, reporting
from teleassist.humans import score_interaction
from teleassist.records import Dataset
from teleassist.scenario import load_scenario
from teleassist.sim import blend

from helpers import bayes_single_update, finite_difference, flatten_params, max_rel_err, with_params

logging.disable(logging.WARNING)

SCENARIOS = os.path.join(os.path.dirname(__file__), "..", "scenarios")
SEEDS = range(5)


def report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok


def sc_path(name):
    return os.path.join(SCENARIOS, name)


def run_method(sc, task_name, runtime, seed, calib, sigma=None):
    task = sc.task_named(task_name)
    human = harness.make_human(sc, task, seed, sigma=sigma)
    rec = harness.run_interaction(task, human, runtime, sc.sim, sc.start, "acc", seed)
    return score_interaction(rec, task, calib[task_name]), rec


# -- criterion 1 -------------------------------------------------------------


def test_c1_gradient_suite():
    """Loss gradients (reconstruction+KL through the frozen sample, and the
    classifier loss) match central finite differences, 100 random configs."""
    rng = np.random.default_rng(1000)
    worst = 0.0
    for i in range(60):
        feat = intent.FeatureConfig(window=2, state_dim=2)
        d = 2
        enc = nn.init_network([feat.feat_dim, 5, 2 * d], rng)
        dec = nn.init_network([2 + d, 5, 2], rng)
        B = 2
        feats = rng.normal(size=(B, feat.feat_dim))
        states = rng.normal(size=(B, 2))
        actions = rng.normal(size=(B, 2))
        eta = rng.standard_normal((B, d))
        _, enc_g, dec_g = intent.autoencoder_loss_and_grads(
            enc, dec, feats, states, actions, eta, kl_weight=0.01
        )

        def loss_enc(vec):
            l, _, _ = intent.autoencoder_loss_and_grads(
                with_params(enc, vec), dec, feats, states, actions, eta, kl_weight=0.01
            )
            return l

        def loss_dec(vec):
            l, _, _ = intent.autoencoder_loss_and_grads(
                enc, with_params(dec, vec), feats, states, actions, eta, kl_weight=0.01
            )
            return l

        a_enc = np.concatenate([np.concatenate([gw.ravel(), gb]) for gw, gb in enc_g])
        a_dec = np.concatenate([np.concatenate([gw.ravel(), gb]) for gw, gb in dec_g])
        worst = max(worst, max_rel_err(a_enc, finite_difference(loss_enc, flatten_params(enc))))
        worst = max(worst, max_rel_err(a_dec, finite_difference(loss_dec, flatten_params(dec))))
    for i in range(40):
        net = nn.init_network([6, 5, 1], rng)
        X = rng.normal(size=(3, 6))
        y = (rng.random(3) < 0.5).astype(float)
        logits, cache = nn.forward(net, X)
        _, dlogits = intent._bce_with_logits(logits, y)
        grads, _ = nn.backward(net, cache, dlogits)
        analytic = np.concatenate([np.concatenate([gw.ravel(), gb]) for gw, gb in grads])

        def loss_of(vec):
            out, _ = nn.forward(with_params(net, vec), X)
            l, _ = intent._bce_with_logits(out, y)
            return l

        worst = max(worst, max_rel_err(analytic, finite_difference(loss_of, flatten_params(net))))
    ok = worst < 1e-4
    assert report("C1 gradient suite", ok, f"worst rel err {worst:.2e} over 100 configs (< 1e-4)")


# -- criterion 2 -------------------------------------------------------------


def test_c2_guided_prefix_vs_cloning():
    """Operator steers 0.5 s, policy finishes; latent-task model beats the
    history-conditioned clone at 3 and 5 demos, and improves with data."""
    sc = load_scenario(sc_path("reach3.yaml"))
    prefix_ticks = int(round(0.5 / sc.sim.dt))
    means = {}
    for n_demos in (3, 5):
        ours_all, bc_all = [], []
        for seed_i in SEEDS:
            records = []
            for t in sc.tasks:
                records += harness.generate_demos(sc, t, n_demos, seed_salt=("c2", seed_i))
            ds = Dataset(records)
            bundle, _ = intent.train_bundle(
                ds, sc.feat, sc.train, harness.derive_seed("c2b", seed_i, n_demos), sc.sim.v_max
            )
            bc, _ = baselines.bc_train(
                ds, sc.feat, sc.train, harness.derive_seed("c2c", seed_i, n_demos), sc.sim.v_max
            )
            for t in sc.tasks:
                task = sc.task_named(t)
                for k in range(2):
                    hseed = harness.derive_seed("c2h", seed_i, t, k)
                    h = harness.make_human(sc, task, hseed)
                    _, e = harness.run_prefix_handoff(
                        task, h, sc.sim, sc.start, prefix_ticks, harness.ours_handoff_policy(bundle)
                    )
                    ours_all.append(e)
                    h = harness.make_human(sc, task, hseed)
                    _, e = harness.run_prefix_handoff(
                        task, h, sc.sim, sc.start, prefix_ticks, harness.bc_handoff_policy(bc)
                    )
                    bc_all.append(e)
        means[n_demos] = (float(np.mean(ours_all)), float(np.mean(bc_all)))
    ok = (
        means[3][0] < means[3][1]
        and means[5][0] < means[5][1]
        and means[5][0] < means[3][0]
    )
    assert report(
        "C2 guided-prefix trend",
        ok,
        f"ours/clone error: 3 demos {means[3][0]:.3f}/{means[3][1]:.3f}, "
        f"5 demos {means[5][0]:.3f}/{means[5][1]:.3f}",
    )


# -- criterion 3 -------------------------------------------------------------


def test_c3_skill_confidence_vs_dropout():
    """Seen lift skill: the familiarity gate stays confident; the dropout
    self-confidence gate does not."""
    sc = load_scenario(sc_path("glass_lift.yaml"))
    floor = 0.6 * sc.arb.beta_max
    ours_means, drop_means = [], []
    for seed_i in SEEDS:
        ds = Dataset(harness.generate_demos(sc, "glass", 5, seed_salt=("c3", seed_i)))
        bundle, _ = intent.train_bundle(
            ds, sc.feat, sc.train, harness.derive_seed("c3b", seed_i), sc.sim.v_max
        )
        dcfg = replace(sc.train, decoder_dropout=0.1)
        dbundle, _ = intent.train_bundle(
            ds, sc.feat, dcfg, harness.derive_seed("c3d", seed_i), sc.sim.v_max
        )
        var0 = baselines.calibrate_var0(dbundle, ds, samples=20, seed=harness.derive_seed("c3v", seed_i))
        gate = baselines.DropoutGate(samples=20, var0=var0, beta_max=sc.arb.beta_max)
        task = sc.task_named("glass")
        seed = harness.derive_seed("c3e", seed_i)
        h = harness.make_human(sc, task, seed)
        rec = harness.run_interaction(
            task, h, harness.OursRuntime(bundle, sc.arb), sc.sim, sc.start, "o", seed
        )
        ours_means.append(np.mean([s.beta for s in rec.steps[:-1]]))
        h = harness.make_human(sc, task, seed)
        rec = harness.run_interaction(
            task, h, harness.DropoutRuntime(dbundle, gate, seed), sc.sim, sc.start, "d", seed
        )
        drop_means.append(np.mean([s.beta for s in rec.steps[:-1]]))
    ours_beta, drop_beta = float(np.mean(ours_means)), float(np.mean(drop_means))
    ok = ours_beta >= floor and ours_beta > drop_beta
    assert report(
        "C3 skill-confidence trend",
        ok,
        f"ours mean beta {ours_beta:.3f} (floor {floor:.2f}), dropout {drop_beta:.3f}",
    )


# -- criterion 4 -------------------------------------------------------------


def test_c4_seen_skill_new_task_and_noise():
    """Trained on the drawer only: drawer effort < 0.7, new-task effort <=
    1.05, and the drawer bound holds across the whole noise sweep."""
    sc = load_scenario(sc_path("drawer_can.yaml"))
    results = {}
    for sigma in sc.noise_sweep:
        calib = harness.calibrate_no_assist(sc, sigma=sigma)
        drawer_eff, can_eff = [], []
        for seed_i in SEEDS:
            ds = Dataset(harness.generate_demos(sc, "drawer", 5, seed_salt=("c4", seed_i), sigma=sigma))
            bundle, _ = intent.train_bundle(
                ds, sc.feat, sc.train, harness.derive_seed("c4b", seed_i, sigma), sc.sim.v_max
            )
            art = harness.MethodArtifacts(bundle=bundle)
            for name, out in (("drawer", drawer_eff), ("can", can_eff)):
                seed = harness.derive_seed("c4e", seed_i, name, sigma)
                rt = harness.make_runtime("ours", sc, art, seed)
                rep, _ = run_method(sc, name, rt, seed, calib, sigma=sigma)
                out.append(rep.effort)
        results[sigma] = (float(np.mean(drawer_eff)), float(np.mean(can_eff)))
    default_sigma = sc.human.sigma
    a_ok = results[default_sigma][0] < 0.7
    b_ok = results[default_sigma][1] <= 1.05
    c_ok = all(results[s][0] < 0.7 for s in sc.noise_sweep)
    detail = "; ".join(f"s={s}: drawer {d:.2f}, can {c:.2f}" for s, (d, c) in results.items())
    assert report("C4 seen/new/noise", a_ok and b_ok and c_ok, detail)


# -- criterion 5 -------------------------------------------------------------


def test_c5_known_goal_parity_with_goal_inference():
    sc = load_scenario(sc_path("household.yaml"))
    calib = harness.calibrate_no_assist(sc)
    eff = {"ours": [], "bayes": [], "noassist": []}
    for seed_i in SEEDS:
        records = []
        for t in ("notepad", "tape"):
            records += harness.generate_demos(sc, t, 5, seed_salt=("c5", seed_i))
        ds = Dataset(records)
        bundle, _ = intent.train_bundle(
            ds, sc.feat, sc.train, harness.derive_seed("c5b", seed_i), sc.sim.v_max
        )
        art = harness.MethodArtifacts(bundle=bundle)
        for t in ("notepad", "tape"):
            for method in ("ours", "bayes", "noassist"):
                seed = harness.derive_seed("c5e", seed_i, t, method)
                rt = harness.make_runtime(method, sc, art, seed)
                rep, _ = run_method(sc, t, rt, seed, calib)
                eff[method].append(rep.effort)
    ours, bayes, noassist = (float(np.mean(eff[m])) for m in ("ours", "bayes", "noassist"))
    ok = abs(ours - bayes) < 0.15 and ours < noassist and bayes < noassist
    assert report(
        "C5 known-goal parity",
        ok,
        f"ours {ours:.3f}, bayes {bayes:.3f} (|diff| {abs(ours - bayes):.3f} < 0.15), "
        f"noassist {noassist:.3f}",
    )


# -- criterion 6 -------------------------------------------------------------


def test_c6_continual_improvement():
    """Cup goal and drawer skill, nine trials each in blocks of three with a
    retrain at each block boundary; late trials need 30% less effort."""
    sc = load_scenario(sc_path("household.yaml"))
    early = {"cup": [], "drawer": []}
    late = {"cup": [], "drawer": []}
    for seed_i in SEEDS:
        res = harness.continual_loop(sc, seed=harness.derive_seed("c6", seed_i))
        for tname in ("cup", "drawer"):
            rows = [r for r in res.rows if r.task == tname]
            assert len(rows) == 9
            early[tname].append(np.mean([r.effort for r in rows[:3]]))
            late[tname].append(np.mean([r.effort for r in rows[6:9]]))
    ok = True
    parts = []
    for tname in ("cup", "drawer"):
        e, l = float(np.mean(early[tname])), float(np.mean(late[tname]))
        ok &= l <= 0.7 * e
        parts.append(f"{tname} {e:.2f}->{l:.2f} (ratio {l / e:.2f})")
    assert report("C6 continual improvement", ok, "; ".join(parts) + " [need <=0.70]")


# -- criterion 7 -------------------------------------------------------------


def test_c7_no_forgetting():
    """Bundle trained on every task vs task-specific bundles, evaluated on the
    original goals; efforts agree within 0.15 of the normalized-effort unit
    (the ratio form is reported alongside)."""
    sc = load_scenario(sc_path("household.yaml"))
    calib = harness.calibrate_no_assist(sc)
    e_all, e_task = [], []
    for seed_i in SEEDS:
        demo = {t: harness.generate_demos(sc, t, 6, seed_salt=("c7", seed_i)) for t in sc.tasks}
        all_ds = Dataset([r for recs in demo.values() for r in recs])
        bundle_all, _ = intent.train_bundle(
            all_ds, sc.feat, sc.train, harness.derive_seed("c7a", seed_i), sc.sim.v_max
        )
        for t in ("notepad", "tape"):
            bundle_t, _ = intent.train_bundle(
                Dataset(demo[t]), sc.feat, sc.train, harness.derive_seed("c7t", seed_i, t), sc.sim.v_max
            )
            for k in range(3):
                seed = harness.derive_seed("c7e", seed_i, t, k)
                rep, _ = run_method(sc, t, harness.OursRuntime(bundle_all, sc.arb), seed, calib)
                e_all.append(rep.effort)
                rep, _ = run_method(sc, t, harness.OursRuntime(bundle_t, sc.arb), seed, calib)
                e_task.append(rep.effort)
    a, t = float(np.mean(e_all)), float(np.mean(e_task))
    gap = abs(a - t)
    ok = gap < 0.15
    assert report(
        "C7 no forgetting",
        ok,
        f"all-data {a:.3f} vs task-specific {t:.3f}: gap {gap:.3f} effort units "
        f"(< 0.15); ratio form {gap / max(a, t):.0%}",
    )


# -- criterion 8 -------------------------------------------------------------


def test_c8_prior_lockout_vs_learned_skill():
    """Goal-inference with a goal set that omits the drawer deadlocks or
    costs more than unassisted teleop; the learned bundle assists it."""
    sc = load_scenario(sc_path("drawer_can.yaml"))
    calib = harness.calibrate_no_assist(sc)
    bayes_ok, ours_eff, ours_succ = [], [], []
    for seed_i in SEEDS:
        seed = harness.derive_seed("c8", seed_i)
        dummy = harness.MethodArtifacts(
            bundle=intent.untrained_bundle(sc.feat, sc.train.latent_dim, sc.sim.v_max)
        )
        rt = harness.make_runtime("bayes", sc, dummy, seed)
        rep_b, _ = run_method(sc, "drawer", rt, seed, calib)
        bayes_ok.append((not rep_b.success) or rep_b.effort > 1.0)
        ds = Dataset(harness.generate_demos(sc, "drawer", 6, seed_salt=("c8d", seed_i)))
        bundle, _ = intent.train_bundle(
            ds, sc.feat, sc.train, harness.derive_seed("c8b", seed_i), sc.sim.v_max
        )
        rep_o, _ = run_method(sc, "drawer", harness.OursRuntime(bundle, sc.arb), seed, calib)
        ours_eff.append(rep_o.effort)
        ours_succ.append(rep_o.success)
    ok = all(bayes_ok) and all(ours_succ) and float(np.mean(ours_eff)) < 0.7
    assert report(
        "C8 prior lockout",
        ok,
        f"goal-inference failed/overran on {sum(bayes_ok)}/5 seeds; "
        f"learned skill succeeded on {sum(ours_succ)}/5 at effort {np.mean(ours_eff):.2f} (< 0.7)",
    )


# -- criterion 9 -------------------------------------------------------------


def test_c9_metrics_determinism(tmp_path):
    sc = load_scenario(sc_path("drawer_can.yaml"))
    sc = replace(sc, schedule=sc.schedule, retrain_cadence=3)
    blobs = []
    for run in (0, 1):
        res = harness.continual_loop(sc)
        out = tmp_path / f"run{run}"
        reporting.emit_report(res.rows, res.records, out, res.calibration)
        blobs.append((out / "metrics.csv").read_bytes())
    ok = blobs[0] == blobs[1]
    assert report("C9 determinism", ok, f"metrics.csv byte-identical across reruns ({len(blobs[0])} bytes)")


# -- criterion 10 ------------------------------------------------------------


def test_c10_named_invariants(drawer_sc, drawer_ds, drawer_bundle, tmp_path):
    checks = {}

    # blend algebra
    rng = np.random.default_rng(0)
    a = rng.uniform(-0.5, 0.5, 2)
    checks["blend identity"] = all(
        np.allclose(blend(a, a, b, 1.0), a) for b in np.linspace(0, 1, 5)
    )
    a_r, a_h = rng.uniform(-0.5, 0.5, 2), rng.uniform(-0.5, 0.5, 2)
    mid = blend(a_r, a_h, 0.4, 10.0)
    lin = 0.5 * (blend(a_r, a_h, 0.2, 10.0) + blend(a_r, a_h, 0.6, 10.0))
    checks["blend linearity"] = np.allclose(mid, lin)

    # posterior normalization
    prior = baselines.GoalPrior.uniform(drawer_sc.bayes_goal_points())
    for _ in range(50):
        v = rng.normal(size=2)
        if np.linalg.norm(v) < 1e-6:
            continue
        prior = baselines.bayes_update(prior, rng.uniform(-1, 1, 2), v)
    checks["posterior normalized"] = bool(
        np.all(prior.posterior >= 0) and np.isclose(prior.posterior.sum(), 1.0)
    )

    # robot-action blindness
    from teleassist.records import InteractionRecord, Step

    spiked = Dataset(
        [
            InteractionRecord.from_dict(
                {
                    **rec.to_dict(),
                    "steps": [
                        {**sd, "a_r": [7.0, -7.0]} for sd in rec.to_dict()["steps"]
                    ],
                }
            )
            for rec in drawer_ds
        ]
    )
    f1, s1, t1 = intent.build_training_pairs(drawer_ds, drawer_sc.feat)
    f2, s2, t2 = intent.build_training_pairs(spiked, drawer_sc.feat)
    checks["a_R blindness"] = (
        np.array_equal(f1, f2) and np.array_equal(s1, s2) and np.array_equal(t1, t2)
    )

    # no-assist effort is one by construction
    calib = harness.calibrate_no_assist(drawer_sc)
    efforts = []
    for k in range(5):
        seed = harness.derive_seed("c10", k)
        task = drawer_sc.task_named("drawer")
        human = harness.make_human(drawer_sc, task, seed)
        rec = harness.run_interaction(
            task, human, harness.NoAssistRuntime(), drawer_sc.sim, drawer_sc.start, "c10", seed
        )
        efforts.append(score_interaction(rec, task, calib["drawer"]).effort)
    checks["no-assist effort ~ 1"] = abs(float(np.mean(efforts)) - 1.0) <= 0.05

    # dataset round trip
    path = tmp_path / "rt.jsonl"
    drawer_ds.save_jsonl(path)
    checks["dataset round-trip"] = Dataset.load_jsonl(path).fingerprint() == drawer_ds.fingerprint()

    ok = all(checks.values())
    assert report(
        "C10 invariant suites", ok, ", ".join(f"{k}: {'ok' if v else 'BAD'}" for k, v in checks.items())
    )

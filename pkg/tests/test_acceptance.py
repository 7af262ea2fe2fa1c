"""End-to-end acceptance suite. Each test covers one acceptance criterion and
prints a single PASS/FAIL verdict line."""

import json
import random
import time
from functools import lru_cache

import pytest
import torch

from edhkit import cli
from edhkit.agent import ModelConfig, make_agent
from edhkit.corpus import (
    Plan,
    build_edh_instances,
    generate_session,
    get_scenario,
    get_task,
    navigation_share,
    parse_plan,
    plan_to_text,
    task_scenario_pairs,
)
from edhkit.maf import (
    MAFActionDecoder,
    MAFConfig,
    MCA2Params,
    gif_fuse,
    mca2_infuse,
)
from edhkit.metrics import lcs_length, rouge_l, rouge_n, score_instance, tlw
from edhkit.worldsim import digest_hash, snapshot_state


def _verdict(number, label, ok, detail=""):
    print(f"[acceptance {number}] {label}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{label} failed: {detail}"


# ------------------------------------------------- 1. metric oracle equivalence


def _lcs_oracle(a, b):
    @lru_cache(maxsize=None)
    def rec(i, j):
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + rec(i + 1, j + 1)
        return max(rec(i + 1, j), rec(i, j + 1))

    return rec(0, 0)


def _rouge_n_oracle(pred, ref, n):
    """Brute-force clipped n-gram overlap, recomputed from first principles."""

    def grams(seq):
        return [tuple(seq[i : i + n]) for i in range(len(seq) - n + 1)]

    p_grams, r_grams = grams(pred), grams(ref)
    overlap = 0
    remaining = list(r_grams)
    for g in p_grams:
        if g in remaining:
            remaining.remove(g)
            overlap += 1
    if not p_grams or not r_grams:
        return (0.0, 0.0, 0.0)
    precision = overlap / len(p_grams)
    recall = overlap / len(r_grams)
    f1 = 0.0
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    return (precision, recall, f1)


def test_acceptance_1_metric_oracles():
    t0 = time.time()
    rng = random.Random(11)
    alphabet = list("abcdef")
    ok = True
    for _ in range(200):
        a = tuple(rng.choice(alphabet) for _ in range(rng.randint(0, 14)))
        b = tuple(rng.choice(alphabet) for _ in range(rng.randint(0, 14)))
        ok &= lcs_length(a, b) == _lcs_oracle(a, b)
        la, lb = list(a), list(b)
        lcs = lcs_length(a, b)
        p = lcs / len(a) if a else 0.0
        r = lcs / len(b) if b else 0.0
        f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
        got = rouge_l(la, lb)
        ok &= got == pytest.approx((p, r, f1) if a and b else (0.0, 0.0, 0.0))
        for n in (1, 2):
            ok &= rouge_n(la, lb, n) == pytest.approx(_rouge_n_oracle(la, lb, n))
    for _ in range(1000):
        m = rng.random()
        ref_len = rng.randint(1, 12)
        pred_len = rng.randint(0, 20)
        expected = m * ref_len / max(ref_len, pred_len)
        ok &= tlw(m, ref_len, pred_len) == pytest.approx(expected)
    elapsed = time.time() - t0
    ok &= elapsed < 10.0
    _verdict(1, "metric oracle equivalence", ok, f"({elapsed:.2f}s)")


# ------------------------------------------------ 2. metric invariants (fuzz)


def test_acceptance_2_metric_invariants_fuzz():
    rng = random.Random(22)
    pool = [
        ("pickup", "knife"), ("slice", "bread"), ("place", "table"),
        ("toggle_on", "toaster"), ("pour", "plant"), ("open", "box"),
        ("forward", None), ("turn_left", None), ("stop", None),
    ]
    inter = [p for p in pool if p[1] is not None]
    ok = True
    for _ in range(10_000):
        a_f = [rng.choice(pool) for _ in range(rng.randint(0, 12))]
        ref = [rng.choice(inter) for _ in range(rng.randint(0, 6))]
        if not a_f and not ref:
            continue
        s = score_instance("i", a_f, ref)
        values = (s.gc, s.tlw_success, s.tlw_gc)
        ok &= all(0.0 <= v <= 1.0 for v in values) and s.success in (0, 1)
        if s.success == 1:
            ok &= s.gc == 1.0
        if s.gc == 1.0 and ref:
            ok &= s.success == 1
        if ref:
            m = rng.random()
            plen = rng.randint(0, 15)
            ok &= tlw(m, len(ref), plen) >= tlw(m, len(ref), plen + 1) - 1e-12
        if not ok:
            break
    _verdict(2, "metric consistency invariants (10^4 fuzz cases)", ok)


# ------------------------------------------------- 3. causality / mask suite


def test_acceptance_3_causality_and_masked_gradients(vocabs):
    t0 = time.time()
    tv, av, ov = vocabs
    cfg = ModelConfig(
        n_tokens=len(tv), n_actions=len(av), n_objects=len(ov), d_model=16,
        text_layers=1, mm_encoder_layers=2, attention_heads=2, dropout=0.0,
        max_dialog_tokens=12, max_steps=8,
    )
    model = make_agent(cfg, seed=3).eval()
    T = 8
    gen = torch.Generator().manual_seed(3)
    tokens = torch.randint(4, len(tv), (cfg.max_dialog_tokens,), generator=gen)
    frames = torch.rand(T, cfg.channels, 7, 7, generator=gen)
    prev = torch.randint(0, cfg.flat_action_count(), (T,), generator=gen)
    base_a, base_o = model(tokens, frames, prev)

    ok = True
    for t in range(1, T):
        f2 = frames.clone()
        f2[t] += 1.0
        a2, o2 = model(tokens, f2, prev)
        ok &= torch.equal(base_a[:t], a2[:t]) and torch.equal(base_o[:t], o2[:t])
        p2 = prev.clone()
        p2[t] = (p2[t] + 1) % cfg.flat_action_count()
        a3, o3 = model(tokens, frames, p2)
        ok &= torch.equal(base_a[:t], a3[:t]) and torch.equal(base_o[:t], o3[:t])

    # 64-bit finite-difference gradients through masked (future -> past) paths.
    model_d = model.double()
    frames_d = frames.double().requires_grad_(True)
    k = 3  # early steps whose logits the loss reads
    a, o = model_d(tokens, frames_d, prev)
    loss = a[:k].sum() + o[:k].sum()
    (grad,) = torch.autograd.grad(loss, frames_d)
    ok &= float(grad[k:].abs().max()) == 0.0
    eps = 1e-6
    with torch.no_grad():
        for t in (k, T - 1):
            for idx in ((0, 0, 0), (cfg.channels - 1, 6, 6)):
                orig = frames_d[(t,) + idx].item()
                frames_d[(t,) + idx] = orig + eps
                up = (lambda ao: ao[0][:k].sum() + ao[1][:k].sum())(
                    model_d(tokens, frames_d, prev)
                ).item()
                frames_d[(t,) + idx] = orig - eps
                down = (lambda ao: ao[0][:k].sum() + ao[1][:k].sum())(
                    model_d(tokens, frames_d, prev)
                ).item()
                frames_d[(t,) + idx] = orig
                ok &= abs((up - down) / (2 * eps)) < 1e-4
    elapsed = time.time() - t0
    ok &= elapsed < 120.0
    _verdict(3, "bitwise causality and zero masked gradients", ok, f"({elapsed:.2f}s)")


# ------------------------------------------------------- 4. MAF correctness


def test_acceptance_4_maf_oracles_limits_gradients(vocabs):
    tv, av, ov = vocabs
    ok = True
    # mca2_infuse against a naive double-loop oracle (lambda = sigmoid(0) = 0.5).
    torch.manual_seed(7)
    params = MCA2Params(3, 4, 5).double()
    with torch.no_grad():
        params.lambda_k_raw.zero_()
        params.lambda_v_raw.zero_()
    k = torch.randn(3, 4, dtype=torch.float64)
    v = torch.randn(3, 4, dtype=torch.float64)
    c = torch.randn(2, 5, dtype=torch.float64)
    k_hat, v_hat = mca2_infuse(k, v, c, params)
    pooled = [sum(c[i, j].item() for i in range(2)) / 2.0 for j in range(5)]
    u_k = params.u_k.detach().tolist()
    u_v = params.u_v.detach().tolist()
    for i in range(3):
        for j in range(4):
            pk = sum(pooled[a] * u_k[a][j] for a in range(5))
            pv = sum(pooled[a] * u_v[a][j] for a in range(5))
            ok &= abs(k_hat[i, j].item() - (0.5 * k[i, j].item() + 0.5 * pk)) < 1e-9
            ok &= abs(v_hat[i, j].item() - (0.5 * v[i, j].item() + 0.5 * pv)) < 1e-9
    # gif_fuse against a naive oracle.
    h = torch.randn(3, 4, dtype=torch.float64)
    streams = [torch.randn(3, 4, dtype=torch.float64) for _ in range(2)]
    gates = [torch.rand(3, 4, dtype=torch.float64) for _ in range(2)]
    out = gif_fuse(h, streams, gates)
    for i in range(3):
        for j in range(4):
            expected = h[i, j].item() + sum(
                g[i, j].item() * s[i, j].item() for s, g in zip(streams, gates)
            )
            ok &= abs(out[i, j].item() - expected) < 1e-9
    # Degenerate infusion limits, bitwise.
    for raw, want_k, want_v in (
        (-100.0, k, v),
        (100.0, c.mean(dim=0, keepdim=True).expand(3, 5) @ params.u_k,
         c.mean(dim=0, keepdim=True).expand(3, 5) @ params.u_v),
    ):
        with torch.no_grad():
            params.lambda_k_raw.fill_(raw)
            params.lambda_v_raw.fill_(raw)
        kh, vh = mca2_infuse(k, v, c, params)
        ok &= torch.equal(kh, want_k) and torch.equal(vh, want_v)

    # Finite-difference gradient check over every decoder parameter.
    torch.manual_seed(8)
    model = MAFActionDecoder(MAFConfig(
        n_tokens=len(tv), n_flat_actions=len(av) * len(ov) + 1, d_model=8,
        d_context=4, n_heads=2, max_src_len=6, max_tgt_len=8, dropout=0.0,
    )).double().eval()
    dialog = torch.randint(4, len(tv), (6,))
    act_ctx = torch.randint(0, len(av) * len(ov) + 1, (3,))
    obs = torch.rand(3, model.config.channels, 7, 7, dtype=torch.float64)
    prefix = torch.tensor([1, 5, 6])

    def loss_fn():
        x_in = model.fuse_inputs(dialog, act_ctx, obs)
        return (x_in ** 2).sum() + (model.decode_logits(x_in, prefix) ** 2).sum()

    loss = loss_fn()
    names, tensors = zip(*model.named_parameters())
    grads = torch.autograd.grad(loss, tensors, allow_unused=True)
    eps = 1e-6
    for name, param, grad in zip(names, tensors, grads):
        flat = param.detach().view(-1)
        gflat = (grad if grad is not None else torch.zeros_like(param)).reshape(-1)
        idxs = torch.linspace(0, flat.numel() - 1, steps=min(3, flat.numel())).long()
        for i in idxs:
            orig = flat[i].item()
            with torch.no_grad():
                flat[i] = orig + eps
            up = loss_fn().item()
            with torch.no_grad():
                flat[i] = orig - eps
            down = loss_fn().item()
            with torch.no_grad():
                flat[i] = orig
            fd = (up - down) / (2 * eps)
            an = gflat[i].item()
            # Absolute floor absorbs central-difference truncation noise on
            # entries whose true gradient is numerically zero.
            denom = max(abs(fd), abs(an), 1e-8)
            if abs(fd - an) > 1e-6 and abs(fd - an) / denom >= 1e-4:
                ok = False
    _verdict(4, "generative decoder oracles, limits, gradients", ok)


# --------------------------------------------- 5. closed-loop overfit ordering


@pytest.fixture(scope="module")
def overfit_pipeline(tmp_path_factory):
    """20-session corpus, all four ablations trained and evaluated closed-loop."""
    root = tmp_path_factory.mktemp("overfit")
    corpus = root / "corpus"
    edh = root / "edh"
    t0 = time.time()
    assert cli.main(["generate", "--out", str(corpus), "--sessions", "20",
                     "--seed-base", "0"]) == 0
    assert cli.main(["build-edh", "--corpus", str(corpus), "--out", str(edh)]) == 0
    cfg = root / "cfg.json"
    cfg.write_text(json.dumps({"epochs": 24, "lr": 1e-3}))
    reports = {}
    for name, ablation in (
        ("lang", "lang,h"), ("base", ""), ("H", "h"), ("H+CA", "h,ca"),
    ):
        ckpt = root / f"{name}.pt"
        rep = root / f"{name}.json"
        args = ["train", "--kind", "agent", "--instances", str(edh),
                "--out", str(ckpt), "--seed", "1", "--config", str(cfg)]
        if ablation:
            args += ["--ablation", ablation]
        assert cli.main(args) == 0
        assert cli.main(["eval", "--kind", "agent", "--checkpoint", str(ckpt),
                         "--instances", str(edh), "--out", str(rep)]) == 0
        reports[name] = json.loads(rep.read_text())
    return edh, reports, time.time() - t0


def test_acceptance_5_closed_loop_overfit_and_ordering(overfit_pipeline):
    edh, reports, elapsed = overfit_pipeline
    n_instances = len(list((edh / "instances").glob("*.json")))
    gc = {k: v["GC"] for k, v in reports.items()}
    ok = 40 <= n_instances <= 60
    ok &= reports["H+CA"]["SR"] >= 0.90 and reports["H+CA"]["GC"] >= 0.95
    ok &= gc["lang"] < gc["base"] < gc["H"] <= gc["H+CA"]
    ok &= elapsed < 30 * 60
    detail = (f"(instances={n_instances} GC: lang={gc['lang']:.3f} "
              f"base={gc['base']:.3f} H={gc['H']:.3f} H+CA={gc['H+CA']:.3f} "
              f"SR(H+CA)={reports['H+CA']['SR']:.3f} {elapsed:.0f}s)")
    _verdict(5, "closed-loop overfit with ablation ordering", ok, detail)


# ----------------------------------------------------------- 6. planner overfit


def test_acceptance_6_planner_overfit_and_plan_round_trip():
    from edhkit.corpus import build_vocab, extract_plan
    from edhkit.planner import PlannerConfig, predict_plan, train_planner

    t0 = time.time()
    pairs_ts = task_scenario_pairs()
    sessions, instances, seed = [], [], 0
    while len(instances) < 50:
        task, scen = pairs_ts[seed % len(pairs_ts)]
        sess = generate_session(seed, get_scenario(scen), get_task(task))
        sessions.append(sess)
        instances.extend(build_edh_instances(sess))
        seed += 1
    instances = instances[:50]
    tv, _, _ = build_vocab(sessions)
    data = [(inst.dialog_history, extract_plan(inst)) for inst in instances]
    cfg = PlannerConfig(
        n_tokens=len(tv), d_model=64, encoder_layers=1, decoder_layers=1,
        attention_heads=4, max_src_len=96, max_tgt_len=8, dropout=0.0,
        lr=2e-3, warmup_steps=20, weight_decay=0.0, epochs=200, batch_size=8,
        seed=0,
    )
    model, _ = train_planner(data, cfg, tv)
    scores = [
        rouge_l(plan_to_text(predict_plan(model, dialog, tv)), plan_to_text(plan))[2]
        for dialog, plan in data
    ]
    mean_rouge = sum(scores) / len(scores)
    elapsed = time.time() - t0
    ok = mean_rouge >= 0.95 and elapsed < 600

    rng = random.Random(66)
    pool = [("pickup", "knife"), ("slice", "bread"), ("place", "table"),
            ("toggle_on", "toaster"), ("pour", "plant"), ("open", "box"),
            ("close", "box"), ("pickup", "mug")]
    for _ in range(1000):
        plan = Plan(steps=[rng.choice(pool) for _ in range(rng.randint(0, 6))])
        back = parse_plan(plan_to_text(plan))
        ok &= back.steps == plan.steps and not back.malformed
    _verdict(6, "dialog-to-plan overfit and plan round-trip",
             ok, f"(ROUGE-L={mean_rouge:.4f} {elapsed:.0f}s)")


# ------------------------------------------------------------ 7. corpus fidelity


def test_acceptance_7_navigation_skew_and_replay():
    from edhkit.agent import restore_initial_state

    pairs_ts = task_scenario_pairs()
    sessions = [
        generate_session(s, get_scenario(pairs_ts[s % len(pairs_ts)][1]),
                         get_task(pairs_ts[s % len(pairs_ts)][0]))
        for s in range(100)
    ]
    share = navigation_share(sessions)
    ok = abs(share - 0.80) <= 0.05
    n_instances = 0
    for sess in sessions:
        for inst in build_edh_instances(sess):
            n_instances += 1
            sim, state = restore_initial_state(inst)
            for step in inst.future_actions:
                state, _, outcome = sim.step(state, step["action"], step["object_id"])
                ok &= outcome == "ok"
            ok &= digest_hash(snapshot_state(state)) == digest_hash(inst.final_digest)
    _verdict(7, "navigation skew and instance replay fidelity", ok,
             f"(share={share:.3f} instances={n_instances})")


# -------------------------------------------------------------- 8. determinism


def test_acceptance_8_pipeline_determinism(tmp_path):
    def run(root):
        corpus, edh = root / "corpus", root / "edh"
        ckpt, rep = root / "agent.pt", root / "report.json"
        cfg = root / "cfg.json"
        assert cli.main(["generate", "--out", str(corpus), "--sessions", "4",
                         "--seed-base", "0"]) == 0
        assert cli.main(["build-edh", "--corpus", str(corpus),
                         "--out", str(edh)]) == 0
        cfg.write_text(json.dumps({"epochs": 6, "lr": 1e-3}))
        assert cli.main(["train", "--kind", "agent", "--instances", str(edh),
                         "--out", str(ckpt), "--ablation", "h,ca", "--seed", "0",
                         "--config", str(cfg)]) == 0
        assert cli.main(["eval", "--kind", "agent", "--checkpoint", str(ckpt),
                         "--instances", str(edh), "--out", str(rep)]) == 0
        return rep.read_bytes()

    a = run(tmp_path / "run_a")
    b = run(tmp_path / "run_b")
    _verdict(8, "byte-identical pipeline reports", a == b)

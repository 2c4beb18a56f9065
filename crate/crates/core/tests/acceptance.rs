//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use senrel::eval::{linear_grid, wsp_fail_prob_closed_form, wsp_fail_prob_quadrature};
use senrel::sen::{Analysis, SpareConfig, Variant};
use senrel::{
    build_model, dft_to_drbd, enumerate_exact, eval_curve, mc_curve, preset_paper_128, prob_fail, reliability,
    sen_counts, DftNode, DormancyFactor, DrbdNode, FailureDistribution, Formalism, Model, SenModelSpec, WspParams,
};

use common::TreeGen;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: fn() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    out.detail = format!("{}; {elapsed:.2?}", out.detail);
    if let Some(limit) = limit {
        out.passed &= elapsed <= limit;
        out.detail = format!("{} (limit {limit:.0?})", out.detail);
    }
    out
}

fn spec(n: u32, variant: Variant, analysis: Analysis, formalism: Formalism, spares: SpareConfig) -> SenModelSpec {
    SenModelSpec {
        n,
        variant,
        analysis,
        formalism,
        spares,
        rate: 1e-5,
        dormancy: DormancyFactor::new(0.1).unwrap(),
    }
}

fn dft(model: &Model) -> &DftNode {
    match model {
        Model::Dft(root) => root,
        Model::Drbd(_) => panic!("expected a DFT"),
    }
}

fn drbd(model: &Model) -> &DrbdNode {
    match model {
        Model::Drbd(root) => root,
        Model::Dft(_) => panic!("expected a DRBD"),
    }
}

fn is_dft_leaf(node: &DftNode) -> bool {
    matches!(node, DftNode::BasicEvent { .. } | DftNode::Wsp { .. })
}

fn is_drbd_leaf(node: &DrbdNode) -> bool {
    matches!(node, DrbdNode::Block { .. } | DrbdNode::Wsp { .. })
}

fn or_children(node: &DftNode) -> &[DftNode] {
    match node {
        DftNode::Or(c) => c,
        other => panic!("expected an OR gate, got {other:?}"),
    }
}

fn and_children(node: &DftNode) -> &[DftNode] {
    match node {
        DftNode::And(c) => c,
        other => panic!("expected an AND gate, got {other:?}"),
    }
}

/// Inputs of an OR gate with directly nested OR gates merged into it.
fn merged_or_fan_in(node: &DftNode) -> usize {
    or_children(node)
        .iter()
        .map(|c| match c {
            DftNode::Or(_) => merged_or_fan_in(c),
            _ => 1,
        })
        .sum()
}

fn count_wsp(node: &DftNode) -> usize {
    match node {
        DftNode::Wsp { .. } => 1,
        DftNode::BasicEvent { .. } => 0,
        DftNode::Or(c) | DftNode::And(c) => c.iter().map(count_wsp).sum(),
    }
}

fn expect(failures: &mut Vec<String>, what: &str, got: Option<u64>, want: u64) {
    if got != Some(want) {
        failures.push(format!("{what}: got {got:?}, want {want}"));
    }
}

fn structure_goldens() -> Outcome {
    use Analysis::*;
    use Formalism::*;
    use SpareConfig::PaperDefault;
    use Variant::*;

    let mut bad = Vec::new();
    let n = |v: usize| Some(v as u64);

    // terminal SEN, n = 8: path of 3 switches
    let s = spec(8, Sen, Terminal, Dft, PaperDefault);
    let c = sen_counts(&s).unwrap();
    expect(&mut bad, "terminal SEN 8 path (counts)", c.path_length, 3);
    let m = build_model(&s).unwrap();
    let root = or_children(dft(&m));
    expect(&mut bad, "terminal SEN 8 path (tree)", n(root.iter().filter(|c| is_dft_leaf(c)).count()), 3);

    // broadcast SEN, n = 8: 7 switches
    let s = spec(8, Sen, Broadcast, Dft, PaperDefault);
    expect(&mut bad, "broadcast SEN 8 size (counts)", Some(sen_counts(&s).unwrap().total_components), 7);
    expect(&mut bad, "broadcast SEN 8 size (tree)", n(build_model(&s).unwrap().leaf_count()), 7);

    // terminal SEN+, n = 128: first-level OR fan-in 6
    let s = spec(128, SenPlus, Terminal, Dft, PaperDefault);
    expect(&mut bad, "terminal SEN+ 128 first-level OR (counts)", sen_counts(&s).unwrap().first_level_or_inputs, 6);
    let m = build_model(&s).unwrap();
    for (i, or) in and_children(&or_children(dft(&m))[1]).iter().enumerate() {
        expect(&mut bad, &format!("terminal SEN+ 128 first-level OR {i} (tree)"), n(or_children(or).len()), 6);
    }

    // broadcast SEN+, n = 128: fan-ins 63 and 66, output series 64
    let s = spec(128, SenPlus, Broadcast, Dft, PaperDefault);
    let c = sen_counts(&s).unwrap();
    expect(&mut bad, "broadcast SEN+ 128 first-level OR (counts)", c.first_level_or_inputs, 63);
    expect(&mut bad, "broadcast SEN+ 128 top OR (counts)", c.top_or_inputs, 66);
    expect(&mut bad, "broadcast SEN+ 128 output series (counts)", c.output_series_length, 64);
    let m = build_model(&s).unwrap();
    let top = dft(&m);
    for (i, or) in and_children(&or_children(top)[1]).iter().enumerate() {
        expect(&mut bad, &format!("broadcast SEN+ 128 first-level OR {i} (tree)"), n(or_children(or).len()), 63);
    }
    expect(&mut bad, "broadcast SEN+ 128 top OR (tree)", n(merged_or_fan_in(top)), 66);
    let m = build_model(&spec(128, SenPlus, Broadcast, Drbd, PaperDefault)).unwrap();
    let series_len = match drbd(&m) {
        DrbdNode::Series(c) => c.iter().find_map(|c| match c {
            DrbdNode::Series(blocks) if blocks.iter().all(is_drbd_leaf) => Some(blocks.len() as u64),
            _ => None,
        }),
        _ => None,
    };
    expect(&mut bad, "broadcast SEN+ 128 output series (tree)", series_len, 64);

    // network SEN+, n = 128
    let (s, m) = preset_paper_128(Network, Dft).unwrap();
    let c = sen_counts(&s).unwrap();
    expect(&mut bad, "network SEN+ 128 AND gates (counts)", c.and_gate_count, 32);
    expect(&mut bad, "network SEN+ 128 OR fan-in (counts)", c.network_or_inputs, 160);
    expect(&mut bad, "network SEN+ 128 input spares (counts)", Some(c.spared_count), 64);
    expect(&mut bad, "network SEN+ 128 output blocks (counts)", c.output_series_length, 64);
    expect(&mut bad, "network SEN+ 128 total (counts)", Some(c.total_components), 512);
    let top = or_children(dft(&m));
    let pairs = top
        .iter()
        .filter(|c| matches!(c, DftNode::And(g) if g.len() == 2 && g.iter().all(is_dft_leaf)))
        .count();
    expect(&mut bad, "network SEN+ 128 AND gates (tree)", n(pairs), 32);
    let ors: Vec<usize> = top
        .iter()
        .filter_map(|c| match c {
            DftNode::And(g) if g.iter().all(|x| matches!(x, DftNode::Or(_))) => Some(g),
            _ => None,
        })
        .flatten()
        .map(|or| or_children(or).len())
        .collect();
    if ors != [160, 160] {
        bad.push(format!("network SEN+ 128 OR fan-in (tree): got {ors:?}, want [160, 160]"));
    }
    expect(&mut bad, "network SEN+ 128 input spares (tree)", n(count_wsp(dft(&m))), 64);
    expect(&mut bad, "network SEN+ 128 total (tree)", n(m.leaf_count()), 512);
    let (_, net) = preset_paper_128(Network, Drbd).unwrap();
    let outputs = match drbd(&net) {
        DrbdNode::Series(c) => c
            .iter()
            .filter_map(|c| match c {
                DrbdNode::Series(b) if b.iter().all(|x| matches!(x, DrbdNode::Block { .. })) => Some(b.len() as u64),
                _ => None,
            })
            .max(),
        _ => None,
    };
    expect(&mut bad, "network SEN+ 128 output blocks (tree)", outputs, 64);

    if bad.is_empty() {
        outcome(true, "all counts and trees match")
    } else {
        outcome(false, bad.join("; "))
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut gen = TreeGen::new(12, 1e-6, 1e-3);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let tree = gen.dft(&mut rng);
        let model = Model::Dft(tree.clone());
        for _ in 0..5 {
            let t = rng.random_range(0.0..=2e5);
            let exact = enumerate_exact(&model, t).unwrap();
            let closed = prob_fail(&tree, t).unwrap();
            worst = worst.max((exact - closed).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max |enumerate - prob_fail| = {worst:.3e} over 500 trees x 5 t"))
}

fn monte_carlo_agreement() -> Outcome {
    let grid = linear_grid(0.0, 1e5, 51).unwrap();
    let presets = [
        ("terminal DFT", Analysis::Terminal, Formalism::Dft),
        ("broadcast DFT", Analysis::Broadcast, Formalism::Dft),
        ("network DFT", Analysis::Network, Formalism::Dft),
        ("network DRBD", Analysis::Network, Formalism::Drbd),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (seed, (name, analysis, formalism)) in presets.into_iter().enumerate() {
        let (_, model) = preset_paper_128(analysis, formalism).unwrap();
        let exact = eval_curve(&model, &grid).unwrap();
        let mc = mc_curve(&model, &grid, 100_000, seed as u64 + 11).unwrap();
        let within = exact.values().zip(&mc).filter(|(v, e)| e.covers(*v, 3.0)).count();
        let degenerate = exact
            .values()
            .zip(&mc)
            .filter(|(v, e)| !e.covers(*v, 3.0) && e.stderr == 0.0)
            .count();
        passed &= within as f64 >= 0.95 * grid.len() as f64;
        parts.push(format!("{name} {within}/{} ({degenerate} misses with stderr 0)", grid.len()));
    }
    outcome(passed, format!("points within 3 stderr: {}", parts.join(", ")))
}

fn wsp_kernel() -> Outcome {
    let steps = 20;
    let at = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (steps - 1) as f64;
    let mut worst = 0.0f64;
    let mut worst_hot = 0.0f64;
    for i in 0..steps {
        let lambda = 10f64.powf(at(-6.0, -3.0, i));
        let law = FailureDistribution::exponential(lambda).unwrap();
        for j in 0..steps {
            let alpha = DormancyFactor::new(at(0.05, 1.0, j)).unwrap();
            let params = WspParams::with_dormancy(law, law, alpha);
            for l in 0..steps {
                let t = at(0.0, 2e5, l);
                let quad = wsp_fail_prob_quadrature(&params, t).unwrap();
                let closed = wsp_fail_prob_closed_form(&params, t).unwrap();
                worst = worst.max((quad - closed).abs());
                if j == steps - 1 {
                    let product = law.cdf(t).unwrap() * law.cdf(t).unwrap();
                    worst_hot = worst_hot.max((quad - product).abs()).max((closed - product).abs());
                }
            }
        }
    }
    outcome(
        worst <= 1e-9 && worst_hot <= 1e-9,
        format!("max |quadrature - closed form| = {worst:.3e}; hot spare max |F - F_Y F_a| = {worst_hot:.3e}"),
    )
}

fn complement_identity() -> Outcome {
    let grid = linear_grid(0.0, 1e5, 51).unwrap();
    let mut trees = Vec::new();
    for analysis in [Analysis::Terminal, Analysis::Broadcast, Analysis::Network] {
        trees.push(dft(&preset_paper_128(analysis, Formalism::Dft).unwrap().1).clone());
    }
    let (_, net) = preset_paper_128(Analysis::Network, Formalism::Drbd).unwrap();
    trees.push(dft(&net.complement().unwrap()).clone());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut gen = TreeGen::new(12, 1e-6, 1e-3);
    trees.extend((0..200).map(|_| gen.dft(&mut rng)));

    let mut worst = 0.0f64;
    for tree in &trees {
        let block = dft_to_drbd(tree).unwrap();
        for &t in &grid {
            let gap = prob_fail(tree, t).unwrap() + reliability(&block, t).unwrap() - 1.0;
            worst = worst.max(gap.abs());
        }
    }
    outcome(worst <= 1e-12, format!("max |F + R - 1| = {worst:.3e} over 4 presets and 200 trees"))
}

fn spare_benefit() -> Outcome {
    let grid = linear_grid(0.0, 1e5, 201).unwrap();
    let curve = |spares| {
        let m = build_model(&spec(128, Variant::SenPlus, Analysis::Terminal, Formalism::Dft, spares)).unwrap();
        eval_curve(&m, &grid).unwrap()
    };
    let with = curve(SpareConfig::PaperDefault);
    let without = curve(SpareConfig::None);
    let violations = with.values().zip(without.values()).filter(|(a, b)| a > b).count();
    let at = |c: &senrel::Curve, t: f64| c.points.iter().find(|p| p.0 == t).map(|p| p.1).unwrap();
    let strict = [1e4, 1e5].iter().all(|&t| at(&with, t) < at(&without, t));
    outcome(
        violations == 0 && strict,
        format!(
            "{violations} grid points with spares above without; at t=1e4 {:.6e} < {:.6e}, at t=1e5 {:.6e} < {:.6e}",
            at(&with, 1e4),
            at(&without, 1e4),
            at(&with, 1e5),
            at(&without, 1e5)
        ),
    )
}

fn determinism() -> Outcome {
    let run = |workers: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_senrel"))
            .args(["mc", "--points", "51", "--trials", "100000", "--seed", "1234", "--workers", workers])
            .output()
            .expect("failed to run senrel");
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let reference = run("1");
    let runs = [run("1"), run("2"), run("8"), run("8")];
    let same = runs.iter().all(|r| *r == reference);
    outcome(same, format!("{} byte CSV identical across repeated runs and 1, 2, 8 workers", reference.len()))
}

type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: [Criterion; 7] = [
        ("structure goldens", secs(1), structure_goldens),
        ("oracle equivalence", secs(30), oracle_equivalence),
        ("monte carlo agreement", secs(300), monte_carlo_agreement),
        ("wsp kernel", secs(10), wsp_kernel),
        ("complement identity", None, complement_identity),
        ("spare benefit", None, spare_benefit),
        ("determinism", None, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let out = timed(limit, f);
        let tag = if out.passed { "PASS" } else { "FAIL" };
        println!("{tag} {} {name}: {}", i + 1, out.detail);
        failed += usize::from(!out.passed);
    }
    println!("{} of 7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

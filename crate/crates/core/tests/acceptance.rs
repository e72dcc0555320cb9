//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion does.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use atomloop::atoms::{compute_uc, weak_completeness_check, Algorithm, AtomEngine};
use atomloop::cli;
use atomloop::generators::{
    fig2_rules, gen_fig2, gen_hsa_hard, gen_random_network, gen_veriflow_hard, hsa_rule_sets,
    RandomFamily, VeriflowParams,
};
use atomloop::instance::write_instance;
use atomloop::metrics::{metrics, Rational};
use atomloop::network::{build_rule_index, detect_loops, LoopOptions, NetworkInstance};
use atomloop::oracle::{cross_check, header_value, oracle_classes, oracle_loops};
use atomloop::par::Exec;
use atomloop::report::validate_report;
use atomloop::setrep::{Cardinal, Geometry, RuleSet};
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FIG2_LIMIT: Duration = Duration::from_secs(1);
const HSA_128_LIMIT: Duration = Duration::from_secs(5);
const VERIFLOW_LIMIT: Duration = Duration::from_secs(1);
const ORACLE_SUITE_LIMIT: Duration = Duration::from_secs(60);
const HSA_ELLS: [usize; 6] = [4, 8, 16, 32, 64, 128];
const HSA_ORACLE_MAX: usize = 12;
const SUITE_SEEDS: u64 = 100;
const PERMUTATIONS: usize = 5;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn run_cli(args: &[&str], stdin: &str) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("atomloop").chain(args.iter().copied());
    let code = cli::run(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn within(what: &str, elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure!(elapsed < limit, "{what} took {elapsed:?}, limit {limit:?}");
    Ok(())
}

fn fig2_atoms() -> Verdict {
    let start = Instant::now();
    let text = write_instance(&gen_fig2());
    let (code, out, err) = run_cli(&["atoms", "-"], &text);
    let elapsed = start.elapsed();
    ensure!(code == 0, "atoms exited {code}: {err}");
    let lines: Vec<&str> = out.lines().collect();
    ensure!(
        lines.first() == Some(&"atoms: 7"),
        "header line {:?}",
        lines.first()
    );
    ensure!(lines.len() == 8, "{} combination lines", lines.len() - 1);
    let mut total = BigUint::ZERO;
    let mut sets = BTreeSet::new();
    for l in &lines[1..] {
        let mut cols = l.split('\t');
        sets.insert(cols.next().unwrap().to_string());
        total += cols.next().unwrap().parse::<BigUint>().unwrap();
    }
    ensure!(total == BigUint::from(8u8), "atom sizes sum to {total}");
    ensure!(!sets.contains("[[1,5]]"), "r2 = [1,5] is stored");

    let (g, rules) = fig2_rules();
    let oracle = oracle_classes(&g, &rules, Exec::Sequential).map_err(|e| e.to_string())?;
    let partition: BTreeSet<Vec<u64>> = oracle.classes.values().cloned().collect();
    let expected: BTreeSet<Vec<u64>> = [
        vec![0],
        vec![1],
        vec![2, 4],
        vec![3],
        vec![5],
        vec![6],
        vec![7],
    ]
    .into_iter()
    .collect();
    ensure!(partition == expected, "oracle partition {partition:?}");
    let engine = compute_uc(&g, &rules, Algorithm::Add).map_err(|e| e.to_string())?;
    for (_, c) in engine.store().iter() {
        let members = oracle
            .classes
            .get(&c.cont)
            .ok_or(format!("{} not an oracle class", c.set))?;
        ensure!(
            c.atsize == BigUint::from(members.len()),
            "{} has atom size {}",
            c.set,
            c.atsize
        );
    }
    within("fig2", elapsed, FIG2_LIMIT)?;
    Ok(format!(
        "7 classes, sizes sum to 8, r2 covered, {elapsed:?}"
    ))
}

fn fig2_metrics() -> Verdict {
    let (g, rules) = fig2_rules();
    let engine = compute_uc(&g, &rules, Algorithm::Add).map_err(|e| e.to_string())?;
    let m = metrics(&engine, Exec::Sequential);
    ensure!(m.k == 4, "k = {}", m.k);
    ensure!(m.k_bar == Rational::new(13, 7), "k_bar = {}", m.k_bar);
    ensure!(
        m.big_k_bar == Some(Rational::new(4, 1)),
        "K_bar = {:?}",
        m.big_k_bar
    );
    Ok(format!(
        "k = {}, k_bar = {}, K_bar = {}",
        m.k,
        m.k_bar,
        m.big_k_bar.unwrap()
    ))
}

fn hsa_hard() -> Verdict {
    let mut notes = Vec::new();
    for ell in HSA_ELLS.iter().copied().chain([HSA_ORACLE_MAX]) {
        let net = gen_hsa_hard(ell);
        let text = write_instance(&net);
        let start = Instant::now();
        let (code, out, err) = run_cli(&["loops", "-"], &text);
        let elapsed = start.elapsed();
        ensure!(code == 0, "ell = {ell}: loops exited {code}: {err}");
        let report = validate_report(&out)?;
        ensure!(
            report.loops.is_empty(),
            "ell = {ell}: {} loops",
            report.loops.len()
        );
        ensure!(
            report.atoms == ell + 1,
            "ell = {ell}: {} atoms",
            report.atoms
        );
        if ell == 128 {
            within("ell = 128", elapsed, HSA_128_LIMIT)?;
            notes.push(format!("ell = 128 in {elapsed:?}"));
        }

        let rep = detect_loops(&net, &LoopOptions::default()).map_err(|e| e.to_string())?;
        if ell <= HSA_ORACLE_MAX {
            let diff = cross_check(&net, &rep.engine, &rep.looping_classes(), Exec::Parallel)
                .map_err(|e| e.to_string())?;
            ensure!(diff.is_clean(), "ell = {ell}: oracle disagrees: {diff:?}");
        } else {
            // Every class is one drop rule intersected with the catch-all.
            let (_, sets) = hsa_rule_sets(ell);
            let full = net.geometry().full();
            for (_, c) in rep.engine.store().iter() {
                let rules: Vec<&RuleSet> = c.cont.iter().map(|&r| &rep.engine.rules()[r]).collect();
                ensure!(
                    rules.len() == 2 && rules.contains(&&full),
                    "ell = {ell}: {} containers",
                    rules.len()
                );
                ensure!(
                    sets.contains(&c.set) && c.atsize == c.set.cardinality(),
                    "ell = {ell}: class {}",
                    c.set
                );
            }
        }
    }
    notes.push(format!("oracle-checked up to ell = {HSA_ORACLE_MAX}"));
    Ok(format!(
        "no loops, ell + 1 atoms for ell in {HSA_ELLS:?}; {}",
        notes.join(", ")
    ))
}

fn veriflow_hard() -> Verdict {
    let params = VeriflowParams::standard(3, 10, 4);
    let start = Instant::now();
    let net = gen_veriflow_hard(&params).map_err(|e| e.to_string())?;
    let rep = detect_loops(&net, &LoopOptions::default()).map_err(|e| e.to_string())?;
    let m = metrics(&rep.engine, Exec::Sequential);
    let elapsed = start.elapsed();
    ensure!(m.n == 31, "n = {}", m.n);
    ensure!(m.m == 31, "m = {}", m.m);
    ensure!(m.k == 2, "k = {}", m.k);
    within("veriflow", elapsed, VERIFLOW_LIMIT)?;
    let diff = cross_check(&net, &rep.engine, &rep.looping_classes(), Exec::Parallel)
        .map_err(|e| e.to_string())?;
    ensure!(diff.is_clean(), "oracle disagrees: {diff:?}");

    let wide =
        gen_veriflow_hard(&VeriflowParams::standard(3, 10, 64)).map_err(|e| e.to_string())?;
    let (sets, _) = build_rule_index(&wide);
    let engine = compute_uc(wide.geometry(), &sets, Algorithm::Add).map_err(|e| e.to_string())?;
    ensure!(
        engine.atom_count() == 31,
        "widths (64,64,64): m = {}",
        engine.atom_count()
    );
    Ok(format!(
        "m = n = 31, k = 2 in {elapsed:?}; oracle-checked at widths (4,4,4)"
    ))
}

fn suite_instances() -> Vec<NetworkInstance> {
    let wild = RandomFamily::Wildcard {
        bits: 12,
        star_density: 0.5,
    };
    let ranges = RandomFamily::MultiRange {
        widths: vec![6, 6],
        full_field: 0.25,
    };
    let mut out = Vec::new();
    for seed in 0..SUITE_SEEDS {
        let nodes = 1 + (seed % 4) as usize;
        let n = 1 + (seed % 12) as usize;
        out.push(gen_random_network(seed, n, nodes, &wild).unwrap());
        let n = 1 + (seed % 10) as usize;
        out.push(gen_random_network(seed, n, nodes, &ranges).unwrap());
    }
    out
}

fn oracle_suite() -> Verdict {
    let instances = suite_instances();
    let start = Instant::now();
    let mut looping = 0;
    for (i, net) in instances.iter().enumerate() {
        let (code, out, err) = run_cli(&["check", "-"], &write_instance(net));
        ensure!(code == 0, "instance {i}: check exited {code}: {out}{err}");
        if !out.contains(" 0 looping headers") {
            looping += 1;
        }
    }
    let elapsed = start.elapsed();
    within("oracle suite", elapsed, ORACLE_SUITE_LIMIT)?;
    Ok(format!(
        "{} instances ({looping} with loops) match brute force in {elapsed:?}",
        instances.len()
    ))
}

fn incremental_properties(g: &Geometry, rules: &[RuleSet], seed: u64) -> Result<(), String> {
    let space: Cardinal = g.space_size();
    let mut add = AtomEngine::new(g.clone());
    let mut basic = AtomEngine::new(g.clone());
    for (i, r) in rules.iter().enumerate() {
        add.add_rule(r.clone(), Algorithm::Add)
            .map_err(|e| e.to_string())?;
        basic
            .add_rule(r.clone(), Algorithm::Basic)
            .map_err(|e| e.to_string())?;
        let total: Cardinal = add.store().iter().map(|(_, c)| &c.atsize).sum();
        ensure!(total == space, "after rule {i}: atom sizes sum to {total}");
        add.verify().map_err(|e| format!("after rule {i}: {e}"))?;
        ensure!(
            add.snapshot() == basic.snapshot(),
            "after rule {i}: add and basic differ"
        );
        ensure!(
            weak_completeness_check(add.store(), Exec::Parallel),
            "after rule {i}: weak completeness fails"
        );
    }
    let reference = add.snapshot();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = rules.to_vec();
    for p in 0..PERMUTATIONS {
        order.shuffle(&mut rng);
        let e = compute_uc(g, &order, Algorithm::Add).map_err(|e| e.to_string())?;
        ensure!(
            e.snapshot() == reference,
            "permutation {p} changes the store"
        );
    }
    Ok(())
}

fn property_suite() -> Verdict {
    let mut cases: Vec<(String, Geometry, Vec<RuleSet>)> = Vec::new();
    let (g, rules) = fig2_rules();
    cases.push(("fig2".into(), g, rules));
    for ell in HSA_ELLS {
        let (g, rules) = hsa_rule_sets(ell);
        cases.push((format!("hsa ell = {ell}"), g, rules));
    }
    let veriflow = gen_veriflow_hard(&VeriflowParams::standard(3, 10, 4)).unwrap();
    let (sets, _) = build_rule_index(&veriflow);
    cases.push(("veriflow".into(), veriflow.geometry().clone(), sets));
    for (i, net) in suite_instances().into_iter().enumerate() {
        let (sets, _) = build_rule_index(&net);
        cases.push((format!("random instance {i}"), net.geometry().clone(), sets));
    }
    let mut adds = 0;
    for (seed, (name, g, rules)) in cases.iter().enumerate() {
        incremental_properties(g, rules, seed as u64).map_err(|e| format!("{name}: {e}"))?;
        adds += rules.len();
    }
    Ok(format!(
        "{} instances, {adds} incremental adds, {PERMUTATIONS} permutations each",
        cases.len()
    ))
}

fn negative_control() -> Verdict {
    let mut net = gen_hsa_hard(4);
    let removed = net.remove_rules(0, &net.geometry().parse("0***").unwrap());
    ensure!(removed == 1, "removed {removed} rules");
    let (code, out, err) = run_cli(&["loops", "-", "--witness"], &write_instance(&net));
    ensure!(code == 1, "loops exited {code}: {err}");
    let report = validate_report(&out)?;
    ensure!(report.loops.len() == 1, "{} loops", report.loops.len());
    let l = &report.loops[0];
    ensure!(l.cycle == ["n0"], "cycle {:?}", l.cycle);
    let witness = l.witness.as_deref().ok_or("no witness")?;
    ensure!(
        witness.starts_with('0') && witness.len() == 4,
        "witness {witness} not in 0***"
    );
    let g = net.geometry();
    let h = header_value(g, &g.parse(witness).unwrap()).unwrap();
    let oracle = oracle_loops(&net, Exec::Sequential).map_err(|e| e.to_string())?;
    ensure!(oracle.contains(&h), "oracle finds no loop for {witness}");
    let expected: BTreeSet<u64> = (0..8).collect();
    ensure!(oracle == expected, "oracle loops on {oracle:?}");
    Ok(format!(
        "exit 1, cycle [n0], witness {witness}, oracle loops on exactly 0***"
    ))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 7] = [
        ("fig2 atoms", fig2_atoms),
        ("fig2 metrics", fig2_metrics),
        ("hsa-hard", hsa_hard),
        ("veriflow-hard", veriflow_hard),
        ("oracle equivalence", oracle_suite),
        ("incremental properties", property_suite),
        ("negative control", negative_control),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = f();
        let secs = start.elapsed().as_secs_f64();
        let line = match &verdict {
            Ok(detail) => format!("PASS {}. {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed.push(i + 1);
                format!("FAIL {}. {name} ({secs:.2}s): {why}", i + 1)
            }
        };
        writeln!(out, "{line}").unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

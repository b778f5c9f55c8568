//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use common::{close, enumerate_miqp, random_dataset};
use margot::bnb::{solve_miqp, BnbParams, BnbResult, BnbStatus};
use margot::dataset::{gen_partitions, Dataset, GeneratorSpec};
use margot::heuristic::{local_svm, HeuristicConfig};
use margot::margot::{
    build, check_feasible, extract_tree, Hyperparameters, ModelSolution, Variant, VariableMap,
};
use margot::qp::{solve_qp, solve_svm, QpSettings, QpStatus};
use margot::runner::{train, DatasetConfig, ModelConfig, RunConfig, RunReport};
use margot::tree::{Confusion, Metrics, TreeClassifier, TreeTopology};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FEAS_TOL: f64 = 1e-6;
const INT_TOL: f64 = 1e-5;
const FOUR_PARTITIONS_SEED: u64 = 2;
const ORACLE_INSTANCES: usize = 240;

/// Feasible solutions met by any criterion, replayed by the routing check.
static FEASIBLE: Mutex<Vec<(Dataset, VariableMap, ModelSolution)>> = Mutex::new(Vec::new());

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Solved {
    map: VariableMap,
    result: BnbResult,
    solution: Option<ModelSolution>,
}

fn solve(data: &Dataset, hp: &Hyperparameters, variant: Variant, params: &BnbParams, warm: Option<&[f64]>) -> Solved {
    let (prob, map) = build(data, hp, variant).unwrap();
    let result = solve_miqp(&prob, params, warm).unwrap();
    let solution = result
        .x
        .as_ref()
        .map(|x| ModelSolution::from_vector(&map, hp, x).unwrap());
    if let Some(sol) = &solution {
        FEASIBLE.lock().unwrap().push((data.clone(), map.clone(), sol.clone()));
    }
    Solved { map, result, solution }
}

fn random_hp<R: Rng>(rng: &mut R, depth: usize, n: usize, variant: Variant) -> Hyperparameters {
    let nb = (1 << depth) - 1;
    let mut hp = Hyperparameters::new(depth, (0..nb).map(|_| 10f64.powf(rng.gen_range(-1.0..1.0))).collect());
    if variant != Variant::Margot {
        hp = hp.with_budgets((0..nb).map(|_| rng.gen_range(1..=n)).collect());
    }
    if variant == Variant::Sfs {
        hp = hp.with_alpha(2f64.powi(rng.gen_range(-2..=3)));
    }
    hp
}

fn criterion_1() -> Check {
    let data = gen_partitions(&GeneratorSpec::four_partitions(), FOUR_PARTITIONS_SEED).unwrap();
    let hp = Hyperparameters::uniform(2, 100.0);
    let start = Instant::now();
    let heur = local_svm(&data, &HeuristicConfig::new(Variant::Margot, hp.clone())).unwrap();
    let params = BnbParams {
        time_limit: 120.0 - start.elapsed().as_secs_f64(),
        ..BnbParams::default()
    };
    let s = solve(&data, &hp, Variant::Margot, &params, Some(&heur.to_vector()));
    let elapsed = start.elapsed().as_secs_f64();
    ensure(s.result.status == BnbStatus::Optimal, || format!("status {:?} after {elapsed:.1} s", s.result.status))?;
    let clf = extract_tree(s.solution.as_ref().unwrap(), &s.map, &data).unwrap();
    let m = clf.evaluate(&data.features, &data.labels).unwrap();
    ensure(m.acc == 1.0, || format!("train ACC {}", m.acc))?;
    ensure(elapsed <= 120.0, || format!("took {elapsed:.1} s"))?;
    Ok(format!(
        "{} points, Optimal, ACC 100%, {} nodes, {elapsed:.1} s",
        data.num_samples(),
        s.result.stats.nodes
    ))
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut qps = 0;
    for k in 0..ORACLE_INSTANCES {
        let variant = [Variant::Margot, Variant::Hfs, Variant::Sfs][k % 3];
        let depth = 1 + (k / 3) % 2;
        let n = rng.gen_range(1..=2);
        // keep the number of binary fixings in the low thousands
        let max_m = if depth == 2 && variant != Variant::Margot && n == 2 { 5 } else { 8 };
        let m = rng.gen_range(2..=max_m);
        let data = random_dataset(&mut rng, m, n);
        let hp = random_hp(&mut rng, depth, n, variant);
        let (prob, _) = build(&data, &hp, variant).unwrap();
        let (oracle, count) = enumerate_miqp(&prob);
        qps += count;
        let oracle = oracle.ok_or_else(|| format!("instance {k}: enumeration found nothing"))?;
        let s = solve(&data, &hp, variant, &BnbParams::default(), None);
        ensure(s.result.status == BnbStatus::Optimal, || {
            format!("instance {k}: status {:?}", s.result.status)
        })?;
        let diff = (s.result.objective - oracle).abs() / oracle.abs().max(1e-9);
        worst = worst.max(if oracle.abs() < 1e-9 { s.result.objective.abs() } else { diff });
        ensure(worst <= 1e-5, || {
            format!(
                "instance {k} ({variant}, D={depth}, n={n}, m={m}): B&B {} vs enumeration {oracle}",
                s.result.objective
            )
        })?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 300.0, || format!("took {secs:.0} s"))?;
    Ok(format!(
        "{ORACLE_INSTANCES} instances, {qps} fixings solved, worst relative gap {worst:.1e}, {secs:.0} s"
    ))
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_obj, mut worst_w): (f64, f64) = (0.0, 0.0);
    for k in 0..50 {
        let m = rng.gen_range(3..=25);
        let n = rng.gen_range(1..=4);
        let data = random_dataset(&mut rng, m, n);
        let c = 10f64.powf(rng.gen_range(-1.0..2.0));
        let s = solve(&data, &Hyperparameters::uniform(1, c), Variant::Margot, &BnbParams::default(), None);
        let sol = s.solution.ok_or_else(|| format!("dataset {k}: no solution"))?;
        let svm = solve_svm(&data.features, &data.labels, &vec![c; m], None).unwrap();
        let d_obj = (s.result.objective - svm.objective).abs() / (1.0 + svm.objective.abs());
        let d_w = sol.w[0]
            .iter()
            .zip(&svm.w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst_obj = worst_obj.max(d_obj);
        worst_w = worst_w.max(d_w);
        ensure(d_obj <= 1e-6 && d_w <= 1e-6, || {
            format!("dataset {k}: objective gap {d_obj:.2e}, w gap {d_w:.2e}")
        })?;
    }
    Ok(format!("50 datasets, worst objective gap {worst_obj:.1e}, worst w gap {worst_w:.1e}"))
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for depth in 1..=4usize {
        for n in 1..=5usize {
            for m in 1..=20usize {
                let data = random_dataset(&mut rng, m, n);
                let nb = (1usize << depth) - 1;
                let nl = 1usize << (depth - 1);
                for variant in [Variant::Margot, Variant::Hfs, Variant::Sfs] {
                    let mut hp = Hyperparameters::uniform(depth, 1.0);
                    if variant != Variant::Margot {
                        hp = hp.with_budgets(vec![1; nb]);
                    }
                    if variant == Variant::Sfs {
                        hp = hp.with_alpha(1.0);
                    }
                    let (prob, map) = build(&data, &hp, variant).unwrap();
                    let fs = variant != Variant::Margot;
                    let continuous = (n + 1 + m) * nb + if variant == Variant::Sfs { nb } else { 0 };
                    let binary = m * nl + if fs { n * nb } else { 0 };
                    let routing = 2 * (nl - 1) * m;
                    let margin = nb * m;
                    let assignment = m;
                    let linking = if fs { 2 * n * nb } else { 0 };
                    let budget = if variant == Variant::Hfs { nb } else { 0 };
                    let excess = if variant == Variant::Sfs { nb } else { 0 };
                    let got = (
                        prob.num_vars() - prob.binary_vars.len(),
                        prob.binary_vars.len(),
                        map.routing_rows.len(),
                        map.margin_rows.len(),
                        map.assignment_rows.len(),
                        map.linking_rows.len(),
                        map.budget_rows.len(),
                        map.excess_rows.len(),
                    );
                    let want = (continuous, binary, routing, margin, assignment, linking, budget, excess);
                    ensure(got == want, || format!("{variant} D={depth} n={n} m={m}: {got:?} != {want:?}"))?;
                    ensure(prob.base.num_rows() == routing + margin + assignment + linking + budget + excess, || {
                        format!("{variant} D={depth} n={n} m={m}: total rows {}", prob.base.num_rows())
                    })?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} (variant, D, n, |I|) combinations"))
}

fn criterion_5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..12 {
        let depth = 1 + k % 2;
        let variant = [Variant::Margot, Variant::Hfs, Variant::Sfs][k % 3];
        let m = rng.gen_range(1..=8);
        let n = rng.gen_range(1..=3);
        let mut data = random_dataset(&mut rng, m, n);
        let y = if k % 2 == 0 { 1.0 } else { -1.0 };
        data.labels = vec![y; m];
        let hp = random_hp(&mut rng, depth, n, variant);
        let s = solve(&data, &hp, variant, &BnbParams::default(), None);
        let sol = s.solution.ok_or("single-class instance unsolved")?;
        ensure(s.result.objective.abs() <= 1e-8, || format!("fixture {k}: objective {}", s.result.objective))?;
        let wmax = sol.w.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        ensure(wmax <= 1e-8, || format!("fixture {k}: max |w| {wmax:.2e}"))?;
    }
    // node cost with w forced to zero: ξ_i = 1 − y_i b, minimized at b = ŷ
    let mut fixtures = 0;
    for (pos, neg) in [(5usize, 2usize), (3, 1), (1, 4), (7, 3), (2, 6)] {
        for c in [0.5, 10.0] {
            let m = pos + neg;
            let data = Dataset::new(
                (0..m).map(|i| vec![i as f64 / m as f64, ((i * 7) % m) as f64 / m as f64]).collect(),
                (0..m).map(|i| if i < pos { 1.0 } else { -1.0 }).collect(),
                vec!["a".into(), "b".into()],
                "fixture",
            )
            .unwrap();
            let hp = Hyperparameters::uniform(1, c);
            let (prob, map) = build(&data, &hp, Variant::Margot).unwrap();
            let mut qp = prob.base.clone();
            for j in 0..2 {
                qp.lb[map.w(0, j)] = 0.0;
                qp.ub[map.w(0, j)] = 0.0;
            }
            for i in 0..m {
                qp.lb[map.z(i, 0)] = 1.0;
            }
            let sol = solve_qp(&qp, &QpSettings::default()).unwrap();
            ensure(sol.status == QpStatus::Optimal, || "forced-zero QP not solved".into())?;
            let k = pos.min(neg) as f64;
            ensure((sol.objective - 2.0 * c * k).abs() <= 1e-6, || {
                format!("({pos}+, {neg}−, C={c}): cost {} vs 2·C·k = {}", sol.objective, 2.0 * c * k)
            })?;
            fixtures += 1;
        }
    }
    Ok(format!("12 single-class optima at 0 with w = 0; {fixtures} forced-zero nodes cost 2·C·k"))
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut datasets: Vec<(Dataset, usize, Variant, Hyperparameters, bool)> = Vec::new();
    for k in 0..36 {
        let variant = [Variant::Margot, Variant::Hfs, Variant::Sfs][k % 3];
        let depth = 1 + (k / 3) % 3;
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(4..=if depth == 3 { 10 } else { 12 });
        let data = random_dataset(&mut rng, m, n);
        let hp = random_hp(&mut rng, depth, n, variant);
        datasets.push((data, depth, variant, hp, depth <= 2));
    }
    let four = gen_partitions(&GeneratorSpec::four_partitions(), FOUR_PARTITIONS_SEED).unwrap();
    datasets.push((four, 2, Variant::Margot, Hyperparameters::uniform(2, 100.0), false));
    let six = gen_partitions(&GeneratorSpec::six_partitions(), 1).unwrap();
    datasets.push((six, 3, Variant::Margot, Hyperparameters::uniform(3, 100.0), false));

    let mut bounded = 0;
    for (k, (data, _, variant, hp, certify)) in datasets.iter().enumerate() {
        let heur = local_svm(data, &HeuristicConfig::new(*variant, hp.clone())).unwrap();
        let (prob, map) = build(data, hp, *variant).unwrap();
        let x = heur.to_vector();
        let report = check_feasible(&prob, &map, &x, FEAS_TOL, INT_TOL).unwrap();
        ensure(report.is_feasible(), || format!("dataset {k} ({variant}): {:?}", report.worst))?;
        FEASIBLE.lock().unwrap().push((data.clone(), map.clone(), heur.solution.clone()));
        if *certify {
            let params = BnbParams {
                time_limit: 60.0,
                ..BnbParams::default()
            };
            let s = solve(data, hp, *variant, &params, None);
            if s.result.status == BnbStatus::Optimal {
                ensure(heur.solution.objective >= s.result.objective - 1e-6 * (1.0 + s.result.objective.abs()), || {
                    format!(
                        "dataset {k}: heuristic {} below optimum {}",
                        heur.solution.objective, s.result.objective
                    )
                })?;
                bounded += 1;
            }
        }
    }
    Ok(format!(
        "{} heuristic solutions feasible; {bounded} compared with certified optima",
        datasets.len()
    ))
}

fn criterion_7() -> Check {
    let sol = solve_svm(&[vec![0.0], vec![1.0]], &[-1.0, 1.0], &[10.0, 10.0], None).unwrap();
    let margin = 2.0 / sol.w[0].abs();
    let ok = (sol.w[0] - 2.0).abs() <= 1e-8
        && (sol.b + 1.0).abs() <= 1e-8
        && (margin - 1.0).abs() <= 1e-8
        && (sol.objective - 2.0).abs() <= 1e-8;
    let line = format!("w = {:.10}, b = {:.10}, margin = {:.10}, objective = {:.10}", sol.w[0], sol.b, margin, sol.objective);
    ensure(ok, || line.clone())?;
    Ok(line)
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut sfs_checked = 0;
    for k in 0..12 {
        let depth = 1 + k % 2;
        let n = 2;
        let data = random_dataset(&mut rng, 4, n);
        let nb = (1 << depth) - 1;
        let hp = random_hp(&mut rng, depth, n, Variant::Margot);
        let margot = solve(&data, &hp, Variant::Margot, &BnbParams::default(), None).result.objective;
        let hfs_full = hp.clone().with_budgets(vec![n; nb]);
        let hfs = solve(&data, &hfs_full, Variant::Hfs, &BnbParams::default(), None).result.objective;
        ensure(close(hfs, margot, 1e-6), || format!("fixture {k}: HFS(B=n) {hfs} vs MARGOT {margot}"))?;

        let budgets: Vec<usize> = (0..nb).map(|_| rng.gen_range(1..=n)).collect();
        let hfs_hp = hp.clone().with_budgets(budgets.clone());
        let hfs_b = solve(&data, &hfs_hp, Variant::Hfs, &BnbParams::default(), None).result.objective;
        let sfs_hp = hfs_hp.clone().with_alpha(1e6 * n as f64);
        let sfs = solve(&data, &sfs_hp, Variant::Sfs, &BnbParams::default(), None);
        ensure(close(sfs.result.objective, hfs_b, 1e-5), || {
            format!("fixture {k}: SFS(α=1e6·n) {} vs HFS {hfs_b}", sfs.result.objective)
        })?;
        for alpha in [1e6 * n as f64, 0.5, 0.05] {
            let s = solve(&data, &hfs_hp.clone().with_alpha(alpha), Variant::Sfs, &BnbParams::default(), None);
            let sol = s.solution.ok_or("SFS unsolved")?;
            let (sv, u) = (sol.s.unwrap(), sol.u.unwrap());
            for t in 0..nb {
                let want = (sv[t].iter().sum::<f64>() - budgets[t] as f64).max(0.0);
                ensure((u[t] - want).abs() <= FEAS_TOL, || {
                    format!("fixture {k}, α={alpha}, node {t}: u = {} but excess = {want}", u[t])
                })?;
            }
            sfs_checked += 1;
        }
    }
    Ok(format!("12 four-point fixtures; u matched the budget excess at {sfs_checked} SFS optima"))
}

fn criterion_9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let stump = TreeClassifier::new(TreeTopology::new(1).unwrap(), vec![vec![1.0]], vec![0.0], vec!["x".into()]).unwrap();
    let mut degenerate = 0;
    for k in 0..100 {
        let mut c = Confusion {
            tp: rng.gen_range(0..40),
            tn: rng.gen_range(0..40),
            fp: rng.gen_range(0..40),
            fn_: rng.gen_range(0..40),
        };
        // one class missing
        match k % 10 {
            0 => (c.tp, c.fn_) = (0, 0),
            5 => (c.tn, c.fp) = (0, 0),
            _ => {}
        }
        if c.total() == 0 {
            continue;
        }
        // x = +1 predicts +1, x = −1 predicts −1
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (count, x, y) in [(c.tp, 1.0, 1.0), (c.tn, -1.0, -1.0), (c.fp, 1.0, -1.0), (c.fn_, -1.0, 1.0)] {
            features.extend(std::iter::repeat(vec![x]).take(count));
            labels.extend(std::iter::repeat(y).take(count));
        }
        let m = stump.evaluate(&features, &labels).map_err(|e| e.to_string())?;
        ensure(m.confusion == c, || format!("matrix {k}: counted {:?}, built {c:?}", m.confusion))?;
        let r = |a: usize, b: usize| if b == 0 { Ratio::new(0i64, 1) } else { Ratio::new(a as i64, b as i64) };
        let acc = r(c.tp + c.tn, c.total());
        let bacc = (r(c.tp, c.tp + c.fn_) + r(c.tn, c.tn + c.fp)) / Ratio::from_integer(2);
        let as_ratio = |v: f64| Ratio::<i64>::approximate_float(v).unwrap();
        let to_f64 = |q: Ratio<i64>| *q.numer() as f64 / *q.denom() as f64;
        ensure(m.acc == to_f64(acc), || format!("matrix {k}: ACC {} vs {acc}", m.acc))?;
        ensure(as_ratio(m.bacc) == bacc || (m.bacc - to_f64(bacc)).abs() <= f64::EPSILON, || {
            format!("matrix {k}: BACC {} vs {bacc}", m.bacc)
        })?;
        let deg = c.tp + c.fn_ == 0 || c.tn + c.fp == 0;
        ensure(m.degenerate == deg, || format!("matrix {k}: degenerate flag {}", m.degenerate))?;
        degenerate += usize::from(deg);
    }
    let worked = Metrics::from_confusion(Confusion { tp: 3, tn: 5, fp: 1, fn_: 1 });
    ensure(worked.acc == 0.8, || format!("worked example ACC {}", worked.acc))?;
    ensure((worked.bacc - 19.0 / 24.0).abs() <= f64::EPSILON, || format!("worked example BACC {}", worked.bacc))?;
    Ok(format!("100 random matrices ({degenerate} degenerate) and (3,5,1,1) → 0.8, 19/24"))
}

fn criterion_10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for k in 0..24 {
        let variant = [Variant::Margot, Variant::Hfs, Variant::Sfs][k % 3];
        let depth = 2 + k % 2;
        let n = rng.gen_range(1..=2);
        let m = rng.gen_range(4..=if depth == 3 { 7 } else { 10 });
        let data = random_dataset(&mut rng, m, n);
        let hp = random_hp(&mut rng, depth, n, variant);
        let heur = local_svm(&data, &HeuristicConfig::new(variant, hp.clone())).unwrap();
        let params = BnbParams {
            time_limit: 5.0,
            ..BnbParams::default()
        };
        solve(&data, &hp, variant, &params, Some(&heur.to_vector()));
        let map = VariableMap::new(variant, depth, n, m);
        FEASIBLE.lock().unwrap().push((data, map, heur.solution));
    }
    let pool = FEASIBLE.lock().unwrap();
    let mut samples = 0;
    for (k, (data, map, sol)) in pool.iter().enumerate() {
        let clf = extract_tree(sol, map, data).map_err(|e| format!("solution {k}: {e}"))?;
        for (i, x) in data.features.iter().enumerate() {
            let assigned = sol.assigned_node(i, map.depth).ok_or_else(|| format!("solution {k}: z row {i} not one-hot"))?;
            let routed = clf.route(x).unwrap().last_branch;
            ensure(assigned == routed, || {
                format!("solution {k}, sample {i}: z assigns node {assigned}, tree routes to {routed}")
            })?;
            samples += 1;
        }
    }
    Ok(format!("{} feasible solutions, {samples} samples routed as assigned", pool.len()))
}

fn smoke() -> Check {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/breast_cancer_diagnostic.csv")
        .canonicalize()
        .map_err(|e| e.to_string())?;
    let text = format!(
        "seed = 0\ntime_limit = 60.0\nwarm_start_time_limit = 20.0\n\n[dataset]\nformat = \"csv\"\npath = {:?}\nlabel_column = \"diagnosis\"\npositive_label = \"M\"\n\n[model]\nvariant = \"margot\"\ndepth = 2\nc_levels = [100.0, 1000.0]\n",
        root.display().to_string()
    );
    let config = RunConfig::from_toml(&text).map_err(|e| e.to_string())?;
    ensure(matches!(config.dataset, DatasetConfig::Csv { .. }), || "dataset not csv".into())?;
    ensure(config.model == ModelConfig { c_levels: Some(vec![100.0, 1000.0]), ..ModelConfig::new(Variant::Margot, 2) }, || "model".into())?;
    let start = Instant::now();
    let outcome = train(&config).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let r = &outcome.report;
    ensure(outcome.classifier.is_some(), || format!("no classifier, status {:?}", r.status))?;
    let test = r.test.ok_or("no test metrics")?;
    let train_m = r.train.ok_or("no train metrics")?;
    let back = RunReport::from_json(&r.to_json().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(back == *r, || "report JSON does not round-trip".into())?;
    ensure(secs <= 600.0, || format!("took {secs:.0} s"))?;
    Ok(format!(
        "{}: {:?}, train ACC {:.3}, test ACC {:.3}, {secs:.0} s",
        r.dataset, r.status, train_m.acc, test.acc
    ))
}

fn main() {
    let criteria: Vec<(&str, &str, fn() -> Check)> = vec![
        ("1", "separable-synthetic optimality", criterion_1),
        ("2", "oracle equivalence", criterion_2),
        ("3", "depth-1 reduction to SVM", criterion_3),
        ("4", "dimension formulas", criterion_4),
        ("5", "pruning analysis", criterion_5),
        ("6", "heuristic feasibility and bound", criterion_6),
        ("7", "SVM analytic fixture", criterion_7),
        ("8", "variant coherence", criterion_8),
        ("9", "metrics", criterion_9),
        ("10", "z-routing consistency", criterion_10),
        ("smoke", "end-to-end train on a public CSV", smoke),
    ];
    let mut failed = 0;
    let total = Instant::now();
    for (id, name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = Duration::from(start.elapsed()).as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{id}] {name}: {detail} ({secs:.1} s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{id}] {name}: {detail} ({secs:.1} s)");
            }
        }
    }
    println!(
        "acceptance: {failed} failed, {:.0} s total",
        total.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

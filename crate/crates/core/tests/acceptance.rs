//! End-to-end acceptance checks. Run with `--nocapture` to see one line per
//! criterion.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use minlb_core::bench::{relative_quality, tqp_score, tqp_value, RunRecord, RunStatus, TqpConfig};
use minlb_core::decompose::compute_cut;
use minlb_core::formula::Assignment;
use minlb_core::hashcount::{
    encode_xor_cnf, hashcount_lower_bound, independent_support, padoa_definable, precision_slack, HashCountConfig,
    XorConstraint,
};
use minlb_core::mingen::{brute_force_min_generators, cover, decode_generator, encode_mingen, Itemset, TransactionDb};
use minlb_core::minlb::{minlb, MinLbConfig};
use minlb_core::minmodel::{brute_force_mm, enumerate_minimal_models, is_minimal, MinModelOracle, Outcome};
use minlb_core::projenum::{proj_enum_count, proj_enum_trace, ProjEnumConfig};
use minlb_core::{Budget, Clause, CnfFormula, Method, Var, VarSet};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cnf(n: u32, cls: &[&[i32]]) -> CnfFormula {
    CnfFormula::from_dimacs_clauses(n, cls).unwrap()
}

fn example1() -> CnfFormula {
    cnf(5, &[&[1, 2, 3], &[-1, -2, 4], &[-1, -2, 5]])
}

fn hub(k: u32) -> CnfFormula {
    let hub: Vec<i32> = (1..=k as i32).collect();
    let mut cls = vec![hub.clone()];
    for &h in &hub {
        cls.push(vec![-h, k as i32 + 1]);
        cls.push(vec![-h, k as i32 + 2]);
    }
    let refs: Vec<&[i32]> = cls.iter().map(|c| c.as_slice()).collect();
    cnf(k + 2, &refs)
}

fn oracle_count(f: &CnfFormula) -> usize {
    brute_force_mm(f).unwrap().len()
}

fn exactness_vs_oracle() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..200 {
        let n = rng.gen_range(8..=14u32);
        let ratio = rng.gen_range(1.0..=4.0f64);
        let f = common::random_kcnf(&mut rng, n, (ratio * n as f64).round() as usize, 3);
        let r = proj_enum_count(&f, &compute_cut(&f), &ProjEnumConfig::default()).map_err(|e| e.to_string())?;
        let expect = BigUint::from(oracle_count(&f));
        ensure(r.exact && r.count.as_ref() == Some(&expect), || format!("instance {i}: {:?} vs {expect}", r.count))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("took {secs:.1}s"))?;
    Ok(format!("200/200 exact, {secs:.1}s"))
}

fn product_rule() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..50 {
        let parts = rng.gen_range(2..=4u32);
        let mut clauses = Vec::new();
        let mut offset = 0;
        for _ in 0..parts {
            let n = rng.gen_range(2..=6u32);
            let m = rng.gen_range(1..=2 * n as usize);
            clauses.extend(common::random_block(&mut rng, offset, n, m));
            offset += n;
        }
        let f = CnfFormula::new(offset, clauses).unwrap();
        let expect = oracle_count(&f);
        let rep = proj_enum_trace(&f, &compute_cut(&f), &ProjEnumConfig::default()).map_err(|e| e.to_string())?;
        let mut total = BigUint::from(0u32);
        for p in &rep.passes {
            let product: BigUint = p.factors.iter().map(|&x| BigUint::from(x)).product();
            ensure(product == p.product, || format!("instance {i}: factors {:?} vs {}", p.factors, p.product))?;
            total += product;
        }
        ensure(total == BigUint::from(expect), || format!("instance {i}: {total} vs {expect}"))?;
        // Each factor is the number of distinct projections of the minimal
        // models agreeing with the pass onto its component.
        let mms = brute_force_mm(&f).unwrap();
        for p in &rep.passes {
            for (x, &factor) in p.projection_sets.iter().zip(&p.factors) {
                let projections: BTreeSet<Assignment> =
                    mms.iter().filter(|m| p.tau.iter().all(|(v, b)| m.value(v) == b)).map(|m| m.project(x)).collect();
                ensure(projections.len() as u64 == factor, || format!("instance {i}: factor {factor} vs {}", projections.len()))?;
            }
        }
    }
    Ok("50/50 products match".into())
}

fn example1_regression() -> Result<String, String> {
    let f = example1();
    let mms: Vec<Vec<u32>> =
        brute_force_mm(&f).unwrap().iter().map(|m| m.true_vars().iter().map(|v| v.index()).collect()).collect();
    let set: BTreeSet<Vec<u32>> = mms.iter().cloned().collect();
    ensure(set == BTreeSet::from([vec![1], vec![2], vec![3]]) && mms.len() == 3, || format!("{mms:?}"))?;
    let r = proj_enum_count(&f, &compute_cut(&f), &ProjEnumConfig::default()).unwrap();
    ensure(r.count == Some(BigUint::from(3u32)), || format!("{:?}", r.count))?;

    // Conditioning on the whole cut assignment overcounts.
    let cut: VarSet = [Var::new(1), Var::new(2)].into_iter().collect();
    let mut naive = 0;
    for bits in 0..4u32 {
        let tau: Assignment = cut.iter().enumerate().map(|(i, v)| (v, bits >> i & 1 == 1)).collect();
        let g = f.condition(&tau);
        if !g.is_falsum() {
            naive += oracle_count(&g);
        }
    }
    ensure(naive == 4, || format!("naive sum {naive}"))?;
    // Conditioning on e = 1 admits {a}, which extends to {a, e}: not
    // minimal in F.
    let tau1: Assignment = [(Var::new(5), true)].into_iter().collect();
    let g = f.condition(&tau1);
    let has_a = brute_force_mm(&g).unwrap().iter().any(|m| m.true_vars() == vec![Var::new(1)]);
    let ae: Assignment = Assignment::from_lits([Var::new(1).pos(), Var::new(5).pos(), Var::new(2).neg(), Var::new(3).neg(), Var::new(4).neg()]);
    ensure(has_a && !is_minimal(&f, &ae).unwrap(), || "second failure mode not reproduced".into())?;
    Ok("MM = {a},{b},{c}; naive sum 4; {a,e} not minimal".into())
}

/// Formulas with an oracle count in `[2^3, 2^10]`.
fn counting_corpus(seed: u64, size: usize) -> Vec<(CnfFormula, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < size {
        let n = rng.gen_range(10..=15u32);
        let m = rng.gen_range(n as usize / 2..=2 * n as usize);
        let f = CnfFormula::new(n, common::random_block(&mut rng, 0, n, m)).unwrap();
        let c = oracle_count(&f);
        if (8..=1024).contains(&c) {
            out.push((f, c));
        }
    }
    out
}

fn hashcount_soundness() -> Result<String, String> {
    let start = Instant::now();
    let corpus = counting_corpus(4, 20);
    let (mut ok, mut runs) = (0, 0);
    for (f, count) in &corpus {
        let x = independent_support(f, &Budget::unlimited());
        for seed in 0..10 {
            let cfg = HashCountConfig { delta: 0.2, seed, budget: Budget::unlimited() };
            let rep = hashcount_lower_bound(f, &x, &cfg).map_err(|e| e.to_string())?;
            ensure((rep.result.bound_log2 - (rep.m_star as f64 - 3.321928094887362)).abs() < 1e-9, || "alpha".into())?;
            runs += 1;
            ok += usize::from(rep.result.bound_log2 <= (*count as f64).log2());
        }
    }
    let frac = ok as f64 / runs as f64;
    let secs = start.elapsed().as_secs_f64();
    ensure(frac >= 0.75 && secs < 600.0, || format!("fraction {frac:.3}, {secs:.1}s"))?;
    Ok(format!("{ok}/{runs} sound ({frac:.3}), {secs:.1}s"))
}

fn xor_encoding() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..100 {
        let n = rng.gen_range(1..=10u32);
        let vars: Vec<Var> = (1..=n).filter(|_| rng.gen_bool(0.6)).map(Var::new).collect();
        let q = XorConstraint { vars, constant: rng.gen_bool(0.5) };
        let enc = encode_xor_cnf(&q, n + 1);
        let total = n + enc.num_aux;
        let mut projected = BTreeSet::new();
        for bits in 0u64..1 << total {
            let values: Vec<bool> = (0..total).map(|j| bits >> j & 1 == 1).collect();
            if enc.clauses.iter().all(|c| c.eval(&values)) {
                projected.insert(values[..n as usize].to_vec());
            }
        }
        let expect: BTreeSet<Vec<bool>> = (0u64..1 << n)
            .map(|b| (0..n).map(|j| b >> j & 1 == 1).collect::<Vec<bool>>())
            .filter(|v| q.is_satisfied(v))
            .collect();
        ensure(projected == expect, || format!("constraint {i}: {q:?}"))?;
    }
    Ok("100/100 encodings exact".into())
}

fn support_validity() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..30 {
        let inputs = rng.gen_range(3..=6u32);
        let gates = rng.gen_range(1..=3u32);
        let n = inputs + gates;
        let base = rng.gen_range(0..=inputs as usize);
        let mut clauses = common::random_block(&mut rng, 0, inputs, base);
        let mut planted = Vec::new();
        for g in 0..gates {
            let out = inputs + g + 1;
            let mut ins: Vec<u32> = (1..=inputs).filter(|_| rng.gen_bool(0.5)).collect();
            if ins.len() < 2 {
                ins = vec![1, 2];
            }
            let o = Var::new(out);
            let lits: Vec<_> = ins.iter().map(|&v| Var::new(v)).collect();
            let mut push = |ls: Vec<minlb_core::Lit>| clauses.push(Clause::new(ls).unwrap());
            if rng.gen_bool(0.5) {
                // o ↔ ⋀ ins
                for v in &lits {
                    push(vec![o.neg(), v.pos()]);
                }
                push(std::iter::once(o.pos()).chain(lits.iter().map(|v| v.neg())).collect());
            } else {
                // o ↔ ⋁ ins
                for v in &lits {
                    push(vec![o.pos(), v.neg()]);
                }
                push(std::iter::once(o.neg()).chain(lits.iter().map(|v| v.pos())).collect());
            }
            planted.push((o, lits));
        }
        let f = CnfFormula::new(n, clauses).unwrap();
        let x = independent_support(&f, &Budget::unlimited());
        for v in VarSet::range(n).difference(&x).iter() {
            let d = padoa_definable(&f, v, &x, &Budget::unlimited()).map_err(|e| e.to_string())?;
            ensure(d == Some(true), || format!("instance {i}: {v} dropped but not definable"))?;
        }
        for (o, ins) in &planted {
            ensure(!(x.contains(*o) && ins.iter().all(|v| x.contains(*v))), || format!("instance {i}: gate {o} kept"))?;
        }
    }
    Ok("30/30 supports valid".into())
}

fn mingen_bijection() -> Result<String, String> {
    let a_ab = TransactionDb::new(vec![[0].into(), [0, 1].into()], []);
    let mut dbs = vec![a_ab.clone()];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    while dbs.len() < 101 {
        let items = rng.gen_range(1..=7u32);
        let txns = rng.gen_range(0..=8usize);
        let t: Vec<Itemset> = (0..txns).map(|_| (0..items).filter(|_| rng.gen_bool(0.5)).collect()).collect();
        dbs.push(TransactionDb::new(t, 0..items));
    }
    for (i, db) in dbs.iter().enumerate() {
        let enc = encode_mingen(db);
        let mms = brute_force_mm(&enc.formula).unwrap();
        let mut decoded = BTreeSet::new();
        for m in &mms {
            let (items, cov) = decode_generator(m, &enc);
            ensure(cov == cover(&items, db), || format!("db {i}: cover mismatch"))?;
            decoded.insert(items);
        }
        let expect = brute_force_min_generators(db).unwrap();
        ensure(decoded.len() == mms.len() && decoded == expect, || format!("db {i}: {decoded:?} vs {expect:?}"))?;
    }
    let ab = brute_force_min_generators(&a_ab).unwrap();
    ensure(ab == BTreeSet::from([Itemset::new(), [1].into()]), || format!("{ab:?}"))?;
    Ok("101/101 databases match, A/AB gives {∅, {B}}".into())
}

fn metrics() -> Result<String, String> {
    let cfg = TqpConfig { timeout: 5000.0, log_base: 10.0 };
    let none = RunRecord {
        instance: "x".into(),
        method: Method::HashCount,
        status: RunStatus::Timeout,
        time_s: 5000.0,
        bound_log2: None,
        count: None,
        exact: false,
        seed: 0,
        delta: 0.2,
    };
    ensure(tqp_score(&none, 1.0, &cfg) == 10_000.0, || "2T".into())?;
    let fixed = [relative_quality(3.0, 3.0, &cfg), relative_quality(9.0, 0.0, &cfg), relative_quality(0.0, 0.0, &cfg)];
    ensure(
        (fixed[0] - 1.0).abs() < 1e-12 && (fixed[1] - 2.0).abs() < 1e-12 && (fixed[2] - 1.0).abs() < 1e-12,
        || format!("{fixed:?}"),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10_000 {
        let t = rng.gen_range(0.0..=cfg.timeout);
        let t2 = rng.gen_range(0.0..=cfg.timeout);
        let c_min = rng.gen_range(0.0..1e6f64);
        let c1 = c_min + rng.gen_range(0.0..1e9f64);
        let c2 = c1 + rng.gen_range(0.0..1e9f64);
        let s1 = tqp_value(t, Some(c1), c_min, &cfg);
        let s2 = tqp_value(t, Some(c2), c_min, &cfg);
        ensure(s2 <= s1 + 1e-9, || format!("not monotone in C: {c1} {c2}"))?;
        let (lo, hi) = if t < t2 { (t, t2) } else { (t2, t) };
        if lo < hi {
            ensure(tqp_value(lo, Some(c1), c_min, &cfg) < tqp_value(hi, Some(c1), c_min, &cfg), || "not increasing in t".into())?;
        }
        ensure(s1 >= t && s1 <= 2.0 * cfg.timeout + 1e-9, || format!("score {s1} out of [t, 2T]"))?;
        let (ca, cb) = (rng.gen_range(0.0..1e9f64), rng.gen_range(0.0..1e9f64));
        let prod = relative_quality(ca, cb, &cfg) * relative_quality(cb, ca, &cfg);
        ensure((prod - 1.0).abs() < 1e-12, || format!("reciprocity {prod}"))?;
    }
    Ok("2T = 10000, r = (1, 2, 1), 10^4 triples monotone".into())
}

fn justification() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0usize;
    while checked < 10_000 {
        let n = rng.gen_range(3..=12u32);
        let m = rng.gen_range(1..=3 * n as usize);
        let f = CnfFormula::new(n, common::random_block(&mut rng, 0, n, m)).unwrap();
        let (enumerated, _) = enumerate_minimal_models(&f, u64::MAX, &Budget::unlimited());
        let brute = brute_force_mm(&f).unwrap();
        let mut oracle = MinModelOracle::new(&f);
        let cut = compute_cut(&f);
        let mut blocked = Vec::new();
        while let Outcome::Found(mm) = oracle.next(&[], &Budget::unlimited()) {
            oracle.block(&mm.project(&cut));
            blocked.push(mm);
        }
        for mm in enumerated.iter().chain(&brute).chain(&blocked) {
            ensure(common::justified(&f, mm.values()), || format!("unjustified model {:?}", mm.true_vars()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} models justified"))
}

fn minlb_end_to_end() -> Result<String, String> {
    let r = minlb(&CnfFormula::falsum(3), &MinLbConfig::default()).unwrap().result.unwrap();
    ensure(r.exact && r.count == Some(BigUint::from(0u32)), || "falsum".into())?;

    let at = minlb(&hub(50), &MinLbConfig::default()).unwrap();
    ensure(at.cut_size == Some(50) && at.branch == Method::ProjEnum, || format!("k=50: {:?} {:?}", at.cut_size, at.branch))?;
    ensure(at.result.unwrap().count == Some(BigUint::from(50u32)), || "k=50 count".into())?;

    let alpha = precision_slack(0.2);
    let (mut ok, mut runs) = (0, 0);
    for seed in 0..100 {
        let cfg = MinLbConfig { seed, ..MinLbConfig::default() };
        let rep = minlb(&hub(51), &cfg).unwrap();
        ensure(rep.cut_size == Some(51) && rep.branch == Method::HashCount, || format!("k=51: {:?}", rep.branch))?;
        let r = rep.result.unwrap();
        ensure(r.method == Method::HashCount && (r.confidence - 0.8).abs() < 1e-12, || "k=51 tags".into())?;
        runs += 1;
        ok += usize::from(r.bound_log2 <= 51f64.log2());
    }
    for (f, count) in counting_corpus(10, 10) {
        if compute_cut(&f).is_empty() {
            continue;
        }
        for seed in 0..10 {
            let cfg = MinLbConfig { seed, cut_limit: 0, ..MinLbConfig::default() };
            let r = minlb(&f, &cfg).unwrap().result.unwrap();
            ensure(r.method == Method::HashCount, || "forced hashing".into())?;
            runs += 1;
            ok += usize::from(r.bound_log2 <= (count as f64).log2());
        }
    }
    let frac = ok as f64 / runs as f64;
    ensure(frac >= 0.75, || format!("soundness {frac:.3}"))?;
    ensure(alpha > 3.32 && alpha < 3.33, || "alpha".into())?;
    Ok(format!("falsum 0; cut 50 exact, cut 51 hashed; {ok}/{runs} sound ({frac:.3})"))
}

fn main() {
    let checks: [(&str, Check); 10] = [
        ("exactness vs oracle", exactness_vs_oracle),
        ("component product rule", product_rule),
        ("example 1 regression", example1_regression),
        ("hashcount soundness", hashcount_soundness),
        ("xor encoding equivalence", xor_encoding),
        ("independent support validity", support_validity),
        ("mingen bijection", mingen_bijection),
        ("metric unit tests", metrics),
        ("justification invariant", justification),
        ("end-to-end minlb", minlb_end_to_end),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

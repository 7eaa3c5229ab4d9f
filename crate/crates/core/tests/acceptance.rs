//! Acceptance criteria, one line each.
//!
//! Runs without the libtest harness so every line is printed on a normal
//! `cargo test`. A criterion listed in `KNOWN_RED` is expected to fail; its
//! entry names a check that must reproduce the documented counterexample
//! instead. The process fails if any other criterion fails, if a known-red
//! criterion starts passing, or if its counterexample stops reproducing.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use tvalues::evaluator::{eval, eval_direct, EvalRequest};
use tvalues::indices::{enumerate_admissible, enumerate_up_to};
use tvalues::numerics::{const_catalan, const_pi};
use tvalues::order::{Certifier, PhiCoord, Verdict};
use tvalues::verify::{self, FindingVerdict, ScanReport, ScanStatus};
use tvalues::{Enclosure, MultiIndex, PrecisionBudget, ValueSpec};

type Check = Result<String, String>;

fn idx(e: &[u32]) -> MultiIndex {
    MultiIndex::from(e)
}

fn full(k: &MultiIndex) -> ValueSpec {
    ValueSpec::new(k.clone(), 0).unwrap()
}

fn tail(k: &MultiIndex) -> ValueSpec {
    ValueSpec::new(k.clone(), 1).unwrap()
}

fn all_passed(r: &ScanReport) -> Check {
    if r.status == ScanStatus::AllPassed {
        Ok(format!("{} findings", r.findings.len()))
    } else {
        let bad: Vec<String> = r
            .findings
            .iter()
            .filter(|f| matches!(f.verdict, FindingVerdict::Violation | FindingVerdict::Unresolved))
            .take(3)
            .map(|f| format!("{} {:?} {}", f.indices.join("|"), f.verdict, f.detail))
            .collect();
        Err(format!("{:?}: {}", r.status, bad.join("; ")))
    }
}

fn within(t: Instant, limit: Duration) -> Check {
    let el = t.elapsed();
    if el <= limit {
        Ok(format!("{:.2?}", el))
    } else {
        Err(format!("took {el:.2?} > {limit:?}"))
    }
}

fn ac1(_: &Certifier) -> Check {
    let t0 = Instant::now();
    let spec = full(&idx(&[2]));
    let e = eval(&EvalRequest::new(spec, 1e-30, PrecisionBudget::default()).unwrap()).map_err(|e| e.to_string())?;
    let want = const_pi(256).unwrap().square().div_u64(8);
    if !e.width_at_most(1e-30) || !e.overlaps(&want) {
        return Err(format!("got {e:.32}"));
    }
    Ok(format!("width {:.1e}, {}", e.width_f64(), within(t0, Duration::from_secs(10))?))
}

fn ac2(c: &Certifier) -> Check {
    let t0 = Instant::now();
    let r = verify::verify_repeated(c, 3, 1e-20).map_err(|e| e.to_string())?;
    Ok(format!("{}, {}", all_passed(&r)?, within(t0, Duration::from_secs(120))?))
}

fn ac3(c: &Certifier) -> Check {
    all_passed(&verify::verify_sum_formula(c, 4, 1e-12).map_err(|e| e.to_string())?)
}

fn ac4(c: &Certifier) -> Check {
    let r = verify::verify_catalan(c, 12, Some((12, verify::CATALAN_GAP_12_BOUND))).map_err(|e| e.to_string())?;
    all_passed(&r)?;
    let gap = &r.findings[11].enclosures["gap"];
    Ok(format!("gap(12) <= {:.4e} < {:e}", gap.hi_f64(), verify::CATALAN_GAP_12_BOUND))
}

fn ac5(_: &Certifier) -> Check {
    let pi = const_pi(256).unwrap();
    let d = const_catalan(256).unwrap().mul_u64(2).sub(&pi.square().div_u64(8));
    let (zero, one) = (Enclosure::zero(256), Enclosure::one(256));
    if d.certainly_gt(&zero) && d.certainly_lt(&one) {
        Ok(format!("2G - pi^2/8 in [{:.12}, {:.12}]", d.lo_f64(), d.hi_f64()))
    } else {
        Err(format!("{d:.20}"))
    }
}

fn ac6(c: &Certifier) -> Check {
    let t0 = Instant::now();
    let r = verify::verify_chain(c, 4, 8).map_err(|e| e.to_string())?;
    all_passed(&r)?;
    if r.findings.len() != 35 {
        return Err(format!("{} pairs", r.findings.len()));
    }
    Ok(format!("35 pairs, {}", within(t0, Duration::from_secs(300))?))
}

fn ac7(c: &Certifier) -> Check {
    let t = c.beta_table(4).map_err(|e| e.to_string())?;
    let sources: Vec<String> = t.iter().map(|e| e.source.to_string()).collect();
    if sources != ["empty", "2", "2,1", "3"] {
        return Err(format!("sources {sources:?}"));
    }
    for w in t.windows(2) {
        let o = c.compare(&tail(&w[0].source), &tail(&w[1].source)).map_err(|e| e.to_string())?;
        if o.verdict != Verdict::Greater || o.separation <= 0.0 {
            return Err(format!("{} vs {}: {:?}", w[0].source, w[1].source, o));
        }
    }
    let pi = const_pi(256).unwrap();
    if !t[0].value.overlaps(&Enclosure::one(256)) {
        return Err(format!("beta_1 = {}", t[0].value));
    }
    if !t[1].value.overlaps(&pi.square().div_u64(8).sub(&Enclosure::one(256))) {
        return Err(format!("beta_2 = {}", t[1].value));
    }
    Ok(sources.join(" > "))
}

fn ac8(c: &Certifier) -> Check {
    let cases: [(&[u32], (usize, usize)); 4] = [(&[2], (1, 1)), (&[4], (1, 3)), (&[2, 3], (2, 3)), (&[2, 1, 1], (3, 1))];
    let mut s = Vec::new();
    for (k, (band, position)) in cases {
        let got = c.phi(&idx(k)).map_err(|e| e.to_string())?;
        if got != (PhiCoord { band, position }) {
            return Err(format!("phi({}) = {got}", idx(k)));
        }
        s.push(format!("({})->{got}", idx(k)));
    }
    Ok(s.join(" "))
}

fn ac9(_: &Certifier) -> Check {
    let mut specs = Vec::new();
    for w in 2..=6 {
        for k in enumerate_admissible(w).unwrap() {
            specs.push(full(&k));
            specs.push(tail(&k));
        }
    }
    if specs.len() != 62 {
        return Err(format!("{} specs", specs.len()));
    }
    let bad: Vec<String> = specs
        .par_iter()
        .filter_map(|s| {
            let a = eval(&EvalRequest::new(s.clone(), 1e-8, PrecisionBudget::default()).unwrap());
            let b = eval_direct(s, 1_000_000, 56);
            match (a, b) {
                (Ok(a), Ok(b)) if a.overlaps(&b) => None,
                (a, b) => Some(format!("{s}: {a:?} vs {b:?}")),
            }
        })
        .collect();
    if bad.is_empty() {
        Ok("62 of 62 overlap".into())
    } else {
        Err(bad.join("; "))
    }
}

fn ac10(c: &Certifier) -> Check {
    let pool: Vec<MultiIndex> = enumerate_up_to(7).into_iter().filter(|k| !k.is_empty()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let pairs: Vec<(MultiIndex, MultiIndex)> = (0..50)
        .map(|_| {
            let k = &pool[rng.gen_range(0..pool.len())];
            let i = rng.gen_range(0..k.depth());
            (k.clone(), k.incremented(i))
        })
        .collect();
    for (k, l) in &pairs {
        let o = c.compare(&full(k), &full(l)).map_err(|e| e.to_string())?;
        if o.verdict != Verdict::Greater {
            return Err(format!("t({k}) vs t({l}): {:?}", o.verdict));
        }
    }
    let r = verify::verify_tail_recurrence(c, 8, 1e-10).map_err(|e| e.to_string())?;
    Ok(format!("50 decreasing pairs; recurrence {}", all_passed(&r)?))
}

fn ac11(c: &Certifier) -> Check {
    let p = verify::scan_p_sets(c, 3, 10).map_err(|e| e.to_string())?;
    all_passed(&p).map_err(|e| format!("P-sets: {e}"))?;
    let col = verify::scan_tail_collisions(c, 8, 1e-25).map_err(|e| e.to_string())?;
    if col.count(FindingVerdict::Unresolved) != 0 {
        return Err(format!("{} unresolved tail pairs", col.count(FindingVerdict::Unresolved)));
    }
    let phi = phi_scan(c)?;
    let (agree, total) = (phi.count(FindingVerdict::Pass), phi.findings.len());
    let shifted = phi.count(FindingVerdict::Note);
    let b = phi.findings.iter().find(|f| f.indices[0] == "2,1,2").map(|f| f.detail.clone()).unwrap_or_default();
    if !b.contains("reading_b=(2, 2)") || shifted != 9 {
        return Err(format!("documented discrepancies missing: {b:?}, {shifted} shifted"));
    }
    if phi.status != ScanStatus::AllPassed && phi.count(FindingVerdict::Violation) > 0 {
        return Err(format!(
            "reading A agrees on {agree}/{total}; first disagreement {}",
            first_violation(&phi)
        ));
    }
    Ok(format!("P-sets empty, tails separated, reading A agrees on {agree}/{total}"))
}

fn ac12(c: &Certifier) -> Check {
    let mut s = Vec::new();
    for k in [idx(&[]), idx(&[2]), idx(&[2, 1])] {
        let r = verify::verify_limits(c, &k, 12).map_err(|e| e.to_string())?;
        all_passed(&r).map_err(|e| format!("({k}): {e}"))?;
        s.push(format!("({k}) C={}", r.parameters["constant"].as_str().unwrap_or("?")));
    }
    Ok(s.join(", "))
}

fn phi_scan(c: &Certifier) -> Result<ScanReport, String> {
    verify::check_phi_conjecture(c, 9, 10, 10).map_err(|e| e.to_string())
}

fn first_violation(r: &ScanReport) -> String {
    r.findings
        .iter()
        .find(|f| f.verdict == FindingVerdict::Violation)
        .map(|f| format!("({}) {}", f.indices[0], f.detail))
        .unwrap_or_default()
}

/// Reading A fails because `t(2,1,1,1) > t(3)_1 = β_4`, so `(2,1,1,1)` lies
/// in `P_5` and `t(2,1,1,1)` opens band 4 ahead of `t(3,1)`.
fn ac11_documented(c: &Certifier) -> Check {
    let gt = c
        .compare(&full(&idx(&[2, 1, 1, 1])), &tail(&idx(&[3])))
        .map_err(|e| e.to_string())?;
    if gt.verdict != Verdict::Greater {
        return Err(format!("t(2,1,1,1) vs t(3)_1: {:?}", gt.verdict));
    }
    let p5 = verify::scan_p_sets(c, 5, 3).map_err(|e| e.to_string())?;
    let members: Vec<String> = p5
        .findings
        .iter()
        .filter(|f| f.verdict == FindingVerdict::Violation)
        .map(|f| f.indices[0].clone())
        .collect();
    if members != ["2,1,1,1"] {
        return Err(format!("P_5 members {members:?}"));
    }
    let phi31 = c.phi(&idx(&[3, 1])).map_err(|e| e.to_string())?;
    if phi31 != (PhiCoord { band: 4, position: 2 }) {
        return Err(format!("phi(3,1) = {phi31}"));
    }
    Ok(format!(
        "t(2,1,1,1) > t(3)_1 by {:.3e}; P_5 = {{(2,1,1,1)}}; phi(3,1) = (4, 2) not (4, 1)",
        gt.separation
    ))
}

type Criterion = (&'static str, &'static str, fn(&Certifier) -> Check);

const CRITERIA: [Criterion; 12] = [
    ("AC1", "t(2) to width 1e-30 contains pi^2/8 within 10 s", ac1),
    ("AC2", "repeated-argument closed forms, n <= 3, width 1e-20", ac2),
    ("AC3", "even-argument sum formula, n <= 4, tol 1e-12", ac3),
    ("AC4", "Catalan partial sums and frozen gap(12) bound", ac4),
    ("AC5", "0 < 2G - pi^2/8 < 1", ac5),
    ("AC6", "chain prefix, 4 blocks x 8 items", ac6),
    ("AC7", "beta table prefix empty, 2, (2,1), 3", ac7),
    ("AC8", "phi spot checks", ac8),
    ("AC9", "accelerated vs direct, weight <= 6, offsets 0 and 1", ac9),
    ("AC10", "monotonicity sample and tail recurrence", ac10),
    ("AC11", "P-sets, tail collisions, phi conjecture reading A", ac11),
    ("AC12", "limits for empty, (2), (2,1), n <= 12", ac12),
];

const KNOWN_RED: [(&str, fn(&Certifier) -> Check); 1] = [("AC11", ac11_documented)];

fn main() {
    let start = Instant::now();
    let cert = Certifier::new(PrecisionBudget::default());
    let mut unexpected = 0;
    for (id, what, f) in CRITERIA {
        let t0 = Instant::now();
        let result = f(&cert);
        let el = t0.elapsed();
        let known = KNOWN_RED.iter().find(|(k, _)| *k == id);
        match (&result, known) {
            (Ok(detail), None) => println!("{id:<5} PASS  {what} [{detail}] ({el:.1?})"),
            (Err(why), None) => {
                unexpected += 1;
                println!("{id:<5} FAIL  {what} [{why}] ({el:.1?})");
            }
            (Ok(detail), Some(_)) => {
                unexpected += 1;
                println!("{id:<5} PASS  {what} [{detail}] ({el:.1?}) -- listed as known red, update the list");
            }
            (Err(why), Some((_, doc))) => {
                println!("{id:<5} FAIL  {what} [{why}] ({el:.1?})");
                match doc(&cert) {
                    Ok(d) => println!("      known red, counterexample reproduced: {d}"),
                    Err(e) => {
                        unexpected += 1;
                        println!("      known red, but the documented counterexample did not reproduce: {e}");
                    }
                }
            }
        }
    }
    println!("total {:.1?}", start.elapsed());
    if start.elapsed() > Duration::from_secs(600) {
        println!("suite exceeded 10 minutes");
        unexpected += 1;
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected result(s)");
        std::process::exit(1);
    }
}

use super::*;
use crate::numerics::PrecisionBudget;

fn cert() -> Certifier {
    Certifier::new(PrecisionBudget::default())
}

fn status(r: &ScanReport) -> ScanStatus {
    r.status
}

#[test]
fn compositions_count() {
    for n in 1..8u32 {
        for d in 1..=n as usize {
            let c = compositions_into(n, d);
            let want = binomial(n as u64 - 1, d as u64 - 1);
            assert_eq!(BigInt::from(c.len()), want);
            assert!(c.iter().all(|p| p.iter().sum::<u32>() == n && p.len() == d));
        }
    }
}

#[test]
fn repeated_closed_forms() {
    let r = verify_repeated(&cert(), 3, 1e-12).unwrap();
    assert_eq!(status(&r), ScanStatus::AllPassed, "{}", r.to_table());
    assert_eq!(r.findings.len(), 9);
}

#[test]
fn sum_formula() {
    let r = verify_sum_formula(&cert(), 4, 1e-12).unwrap();
    assert_eq!(status(&r), ScanStatus::AllPassed, "{}", r.to_table());
    assert_eq!(r.findings.len(), 10);
}

#[test]
fn sum_formula_detects_wrong_value() {
    // t(4) is not π⁴/384
    let c = cert();
    let pi = const_pi(CONST_BITS).unwrap();
    let got = c.narrow(&full(&MultiIndex::from(&[4u32][..])), 1e-20).unwrap();
    let wrong = pi.powi(4).div_u64(384);
    let f = containment(vec!["4".into()], &got, &wrong, 1e-12);
    assert_eq!(f.verdict, FindingVerdict::Violation);
}

#[test]
fn catalan_partial_sums() {
    let r = verify_catalan(&cert(), 12, Some((12, CATALAN_GAP_12_BOUND))).unwrap();
    assert_eq!(status(&r), ScanStatus::AllPassed, "{}", r.to_table());
    let gap = r.findings[11].enclosures["gap"].hi_f64();
    assert!(gap > 2.0e-4 && gap < CATALAN_GAP_12_BOUND);
    let tight = verify_catalan(&cert(), 12, Some((12, 1e-4))).unwrap();
    assert_ne!(status(&tight), ScanStatus::AllPassed);
}

#[test]
fn tail_recurrence() {
    let r = verify_tail_recurrence(&cert(), 8, 1e-10).unwrap();
    assert_eq!(status(&r), ScanStatus::AllPassed, "{}", r.to_table());
    assert_eq!(r.findings.len(), 1 + (2..=8).map(|w| 1usize << (w - 2)).sum::<usize>());
    assert_eq!(r.count(FindingVerdict::Note), 1);
}

#[test]
fn chain_four_blocks() {
    let r = verify_chain(&cert(), 4, 8).unwrap();
    assert_eq!(status(&r), ScanStatus::AllPassed, "{}", r.to_table());
    assert_eq!(r.findings.len(), 4 * 9 - 1);
}

#[test]
fn chain_breaks_at_fifth_block() {
    // β_4 = t(3)_1 sits below t(2,1,1,1), the first entry of block 5
    let r = verify_chain(&cert(), 5, 2).unwrap();
    assert_eq!(status(&r), ScanStatus::Counterexample);
    let bad: Vec<_> = r.findings.iter().filter(|f| f.verdict == FindingVerdict::Violation).collect();
    assert_eq!(bad.len(), 1);
    assert_eq!(bad[0].indices, vec!["tail:1:3".to_string(), "2,1,1,1".to_string()]);
}

#[test]
fn limits() {
    let c = cert();
    for k in [MultiIndex::empty(), MultiIndex::from(&[2u32][..]), MultiIndex::from(&[3u32, 1][..])] {
        let r = verify_limits(&c, &k, 8).unwrap();
        assert_eq!(status(&r), ScanStatus::AllPassed, "{}", r.to_table());
    }
    assert!(verify_limits(&c, &MultiIndex::from(&[1u32][..]), 8).is_err());
    assert!(verify_limits(&c, &MultiIndex::empty(), 2).is_err());
}

#[test]
fn p_sets_small_ranks_empty() {
    let r = scan_p_sets(&cert(), 3, 6).unwrap();
    assert_eq!(status(&r), ScanStatus::AllPassed, "{}", r.to_table());
    assert!(r.findings.is_empty());
}

#[test]
fn p5_nonempty() {
    let r = scan_p_sets(&cert(), 5, 3).unwrap();
    assert_eq!(status(&r), ScanStatus::Counterexample);
    assert_eq!(r.findings[0].indices[0], "2,1,1,1");
}

#[test]
fn tail_collisions_separated() {
    let r = scan_tail_collisions(&cert(), 6, 1e-25).unwrap();
    assert_eq!(status(&r), ScanStatus::AllPassed, "{}", r.to_table());
    assert_eq!(r.count(FindingVerdict::Note), 1);
}

#[test]
fn phi_conjecture_small() {
    let r = check_phi_conjecture(&cert(), 3, 3, 5).unwrap();
    let find = |name: &str| r.findings.iter().find(|f| f.indices[0] == name).unwrap();
    assert_eq!(find("2").verdict, FindingVerdict::Note);
    assert_eq!(find("2,3").verdict, FindingVerdict::Pass);
    assert!(find("2,1,2").detail.contains("reading_b=(2, 2)"));
    assert!(find("2,1,2").detail.contains("a:agree b:disagree"));
    assert_eq!(find("3,1").verdict, FindingVerdict::Violation);
    assert_eq!(status(&r), ScanStatus::Counterexample);
}

#[test]
fn reports_are_replayable() {
    let a = verify_chain(&cert(), 2, 3).unwrap().to_json();
    let b = verify_chain(&cert(), 2, 3).unwrap().to_json();
    assert_eq!(a, b);
}

#[test]
fn bad_parameters() {
    let c = cert();
    assert!(verify_repeated(&c, 0, 1e-12).is_err());
    assert!(verify_catalan(&c, 0, None).is_err());
    assert!(verify_tail_recurrence(&c, 1, 1e-10).is_err());
    assert!(verify_chain(&c, 0, 3).is_err());
    assert!(scan_tail_collisions(&c, 1, 1e-20).is_err());
}

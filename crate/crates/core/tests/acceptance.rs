use flowout_core::verify::{run_criterion, CriterionReport, CRITERIA};

const SEED: u64 = 20240611;

fn check(id: usize) -> CriterionReport {
    let r = run_criterion(id, SEED);
    println!("{r}");
    r
}

#[test]
fn acceptance_suite() {
    let reports: Vec<CriterionReport> = (1..=CRITERIA).map(check).collect();
    let failed: Vec<usize> = reports.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    let total: f64 = reports.iter().map(|r| r.seconds).sum();
    println!("{} / {CRITERIA} criteria pass in {total:.1} s", CRITERIA - failed.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

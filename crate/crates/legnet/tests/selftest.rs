use legnet::par::Exec;
use legnet::selftest::{run, SelftestOptions, SUITES};

fn opts(seed: u64, filter: Option<&str>, exec: Exec) -> SelftestOptions {
    SelftestOptions { seed, filter: filter.map(String::from), exec, ..SelftestOptions::default() }
}

#[test]
fn full_run_passes() {
    let report = run(&SelftestOptions::default());
    let names: Vec<&str> = report.suites.iter().map(|s| s.name).collect();
    assert_eq!(names, SUITES);
    assert!(report.all_passed(), "{report}");
    let (passed, total) = report.counts();
    assert_eq!(passed, total);
    assert!(report.to_string().ends_with(&format!("{total}/{total} checks passed\n")));
}

#[test]
fn same_seed_same_report() {
    let a = run(&opts(42, Some("s3"), Exec::Parallel)).to_string();
    let b = run(&opts(42, Some("s3"), Exec::Parallel)).to_string();
    assert_eq!(a, b);
    // The execution strategy does not change the result.
    let c = run(&opts(42, Some("s3"), Exec::Sequential)).to_string();
    assert_eq!(a, c);
    assert!(a.starts_with("selftest seed = 42\n"));
}

#[test]
fn filter_selects_suites() {
    let r = run(&opts(0, Some("s3"), Exec::Sequential));
    assert_eq!(r.suites.len(), 1);
    assert_eq!(r.suites[0].name, "s3");
    assert!(r.all_passed());
    assert!(run(&opts(0, Some("nothing"), Exec::Sequential)).suites.is_empty());
}

#[test]
fn other_seeds_pass() {
    for seed in [1, 7, 12345] {
        let r = run(&opts(seed, Some("s3"), Exec::default()));
        assert!(r.all_passed(), "{r}");
        let r = run(&opts(seed, Some("bounds"), Exec::default()));
        assert!(r.all_passed(), "{r}");
    }
}

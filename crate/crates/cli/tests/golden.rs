use std::path::Path;

use bct_cli::golden::{self, cases, check_cases};

fn fresh_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for case in cases() {
        let from = bct_cli::default_golden_dir().join(case.file);
        std::fs::copy(&from, dir.path().join(case.file))
            .unwrap_or_else(|e| panic!("{}: {e}", from.display()));
    }
    dir
}

#[test]
fn committed_goldens_match() {
    let outcome = golden::check(&bct_cli::default_golden_dir()).unwrap();
    assert!(outcome.passed(), "{:?}", outcome.mismatches);
    assert_eq!(outcome.compared, cases().len());
}

/// Bumps the M_min field of the first data row.
fn perturb(path: &Path) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut fields: Vec<String> = lines[1].split(',').map(str::to_string).collect();
    fields[2] = (fields[2].parse::<u32>().unwrap() + 1).to_string();
    lines[1] = fields.join(",");
    std::fs::write(path, lines.join("\n") + "\n").unwrap();
}

#[test]
fn perturbed_file_reports_a_diff() {
    let dir = fresh_copy();
    perturb(&dir.path().join("rate_biased.csv"));
    let outcome = golden::check(dir.path()).unwrap();
    assert!(!outcome.passed());
    assert_eq!(outcome.mismatches.len(), 1);
    let (file, diffs) = &outcome.mismatches[0];
    assert_eq!(file, "rate_biased.csv");
    assert!(!diffs.is_empty());
}

#[test]
fn changed_seed_fails_only_seeded_reports() {
    let dir = fresh_copy();
    let mut altered = cases();
    for case in &mut altered {
        case.config.seed = Some(case.config.seed.unwrap_or(0) + 1000);
    }
    let outcome = check_cases(dir.path(), &altered).unwrap();
    let mut failed: Vec<&str> = outcome.mismatches.iter().map(|(f, _)| f.as_str()).collect();
    failed.sort();
    let mut seeded: Vec<&str> = cases().iter().filter(|c| c.seeded).map(|c| c.file).collect();
    seeded.sort();
    assert_eq!(failed, seeded);
}

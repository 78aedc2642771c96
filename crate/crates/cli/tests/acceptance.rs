//! Acceptance criteria 1–11. Runs sequentially so that the runtime limits
//! are measured without interference, prints one line per criterion and
//! fails if any criterion fails.

use std::time::Instant;

use genlyap_cli::verify::{self, Check, Mutation};

const SEED: u64 = 0;

struct Line {
    id: usize,
    passed: bool,
    detail: String,
}

fn from_check(id: usize, c: &Check, limit: Option<f64>) -> Line {
    let within = limit.is_none_or(|l| c.seconds < l);
    let mut detail = format!("{} ({:.1} s", c.detail, c.seconds);
    if let Some(l) = limit {
        detail.push_str(&format!(", limit {l:.0} s"));
    }
    detail.push(')');
    Line {
        id,
        passed: c.passed && within,
        detail,
    }
}

fn criterion_9() -> Line {
    let t = Instant::now();
    let rows = match verify::scaled_heat_experiment(10, 40, SEED) {
        Ok(r) => r,
        Err(e) => {
            return Line {
                id: 9,
                passed: false,
                detail: format!("error: {e}"),
            }
        }
    };
    let secs = t.elapsed().as_secs_f64();
    let mut passed = secs < 300.0;
    let mut parts = Vec::new();
    for r in &rows {
        let reach = r.dim_at_1e6.is_some_and(|d| d <= 40);
        let close = 2 * r.within_10x >= r.records;
        passed &= reach && close;
        parts.push(format!(
            "{}: residual 1e-6 at dim {}, error within 10x of SVD at {}/{} dims",
            r.label,
            r.dim_at_1e6.map_or("-".to_string(), |d| d.to_string()),
            r.within_10x,
            r.records
        ));
    }
    Line {
        id: 9,
        passed,
        detail: format!("{} ({secs:.1} s, limit 300 s)", parts.join("; ")),
    }
}

fn criterion_11() -> Line {
    let t = Instant::now();
    let mut sets = Vec::new();
    for seed in 0..10 {
        let checks = verify::suite(seed, Mutation::default());
        let set: Vec<(&'static str, bool)> = checks.iter().map(|c| (c.id, c.passed)).collect();
        sets.push(set);
    }
    let secs = t.elapsed().as_secs_f64();
    let identical = sets.windows(2).all(|w| w[0] == w[1]);
    let failures: Vec<String> = sets
        .iter()
        .enumerate()
        .flat_map(|(s, set)| {
            set.iter()
                .filter(|(_, p)| !p)
                .map(move |(id, _)| format!("seed {s} {id}"))
        })
        .collect();
    Line {
        id: 11,
        passed: identical && failures.is_empty() && secs < 900.0,
        detail: format!(
            "10 seeds, {} checks each, identical pass set {identical}, failures [{}] ({secs:.1} s, limit 900 s)",
            sets[0].len(),
            failures.join(", ")
        ),
    }
}

#[test]
fn acceptance_criteria() {
    let mut lines = Vec::new();
    lines.push(from_check(1, &verify::oracle_soundness(SEED, 50), Some(10.0)));
    lines.push(from_check(2, &verify::psd_residual_chain(SEED, 20, Mutation::default()), Some(60.0)));
    lines.push(from_check(3, &verify::als_equals_birka(SEED, 20), None));
    let (c4, c5) = verify::h2_identities(SEED, 20);
    lines.push(from_check(4, &c4, None));
    lines.push(from_check(5, &c5, None));
    lines.push(from_check(6, &verify::fixed_point_properties(SEED, 10), None));
    lines.push(from_check(7, &verify::span_theorem(SEED, 10), None));
    lines.push(from_check(8, &verify::variant_e_degeneracy(), None));
    lines.push(criterion_9());
    lines.push(from_check(10, &verify::benchmark_sanity(), None));
    lines.push(criterion_11());
    for l in &lines {
        println!(
            "criterion {:>2}: {}  {}",
            l.id,
            if l.passed { "PASS" } else { "FAIL" },
            l.detail
        );
    }
    let failed: Vec<usize> = lines.iter().filter(|l| !l.passed).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

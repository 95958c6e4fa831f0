//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use relu_mip::bnb::BnbConfig;
use relu_mip::oracle::suites::{
    alternating_sum_suite, certificate_suite, corner_neuron_suite, end_to_end_suite, facet_suite,
    hull_suite, separation_suite, vertex_suite, SuiteSummary, END_TO_END_ARCH,
};
use relu_mip::verify::ResultRecord;

const SEED: u64 = 0xACCE;

struct Outcome {
    pass: bool,
    detail: String,
}

fn line(n: usize, title: &str, started: Instant, out: &Outcome) {
    println!(
        "criterion {n} [{}] {title} ({:.2}s): {}",
        if out.pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64(),
        out.detail
    );
}

fn fmt_counters(s: &SuiteSummary) -> String {
    s.counters
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Every summary the criteria rely on, for the determinism rerun.
struct Run {
    summaries: Vec<SuiteSummary>,
    records: Vec<ResultRecord>,
}

fn separation() -> SuiteSummary {
    separation_suite(1000, 12, SEED + 1).expect("separation suite runs")
}

fn corner_neuron() -> SuiteSummary {
    corner_neuron_suite().expect("corner suite runs")
}

fn alternating_sum() -> SuiteSummary {
    alternating_sum_suite(&[2, 4, 6]).expect("alternating suite runs")
}

fn hull() -> SuiteSummary {
    hull_suite(100, 20, 8, SEED + 4).expect("hull suite runs")
}

fn facets() -> SuiteSummary {
    facet_suite(100, 8, SEED + 5).expect("facet suite runs")
}

fn certificates() -> SuiteSummary {
    certificate_suite(500, 10, SEED + 6).expect("certificate suite runs")
}

fn vertices() -> SuiteSummary {
    vertex_suite(50, 3, SEED + 7).expect("vertex suite runs")
}

fn end_to_end() -> (SuiteSummary, Vec<ResultRecord>) {
    let config = BnbConfig {
        time_limit: 3600.0,
        ..BnbConfig::default()
    };
    end_to_end_suite(20, &END_TO_END_ARCH, SEED + 8, &config).expect("end-to-end suite runs")
}

fn run_all() -> Run {
    let (e2e, records) = end_to_end();
    Run {
        summaries: vec![
            separation(),
            corner_neuron(),
            alternating_sum(),
            hull(),
            facets(),
            certificates(),
            vertices(),
            e2e,
        ],
        records,
    }
}

fn main() -> ExitCode {
    let mut all_pass = true;
    let mut report = |n: usize, title: &str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let out = f();
        line(n, title, t, &out);
        all_pass &= out.pass;
    };

    report(1, "separation equals brute force within 1e-9", &|| {
        let s = separation();
        Outcome {
            pass: s.cases == 1000 && s.failures == 0 && s.max_error <= 1e-9,
            detail: format!(
                "cases={} max_err={:e} {}",
                s.cases,
                s.max_error,
                fmt_counters(&s)
            ),
        }
    });

    report(
        2,
        "two-input example: LP 0.25, cut subset {1} (0-based) with violation 0.5, re-solve 0",
        &|| {
            let s = corner_neuron();
            Outcome {
                pass: s.cases == 4 && s.failures == 0 && s.max_error <= 1e-8,
                detail: format!("checks={} max_err={:e}", s.cases, s.max_error),
            }
        },
    );

    report(
        3,
        "alternating example: root eta/2, cut loop to 0 within eta rounds",
        &|| {
            let s = alternating_sum();
            let rounds_ok = [2u64, 4, 6]
                .iter()
                .all(|&e| s.counter(&format!("rounds_eta_{e}")) <= e);
            Outcome {
                pass: s.cases == 6 && s.failures == 0 && s.max_error <= 1e-8 && rounds_ok,
                detail: format!("max_err={:e} {}", s.max_error, fmt_counters(&s)),
            }
        },
    );

    report(4, "ideal system and extended LP agree within 1e-6", &|| {
        let s = hull();
        Outcome {
            pass: s.cases == 100 && s.counter("objectives") == 2000 && s.max_error <= 1e-6,
            detail: format!("contexts={} max_gap={:e}", s.cases, s.max_error),
        }
    });

    report(
        5,
        "facet witnesses feasible, tight and of full rank",
        &|| {
            let s = facets();
            Outcome {
                pass: s.cases == 100 && s.failures == 0 && s.max_error <= 1e-9,
                detail: format!(
                    "cases={} max_err={:e} {}",
                    s.cases,
                    s.max_error,
                    fmt_counters(&s)
                ),
            }
        },
    );

    report(
        6,
        "redundancy certificates within 1e-10, both signs of h",
        &|| {
            let s = certificates();
            let both = s.counter("h_nonnegative") > 0 && s.counter("h_negative") > 0;
            Outcome {
                pass: s.cases == 500 && s.failures == 0 && s.max_error <= 1e-10 && both,
                detail: format!("max_residual={:e} {}", s.max_error, fmt_counters(&s)),
            }
        },
    );

    report(7, "every vertex has integral z within 1e-7", &|| {
        let s = vertices();
        Outcome {
            pass: s.cases == 50 && s.failures == 0 && s.max_error <= 1e-7,
            detail: format!(
                "contexts={} max_err={:e} {}",
                s.cases,
                s.max_error,
                fmt_counters(&s)
            ),
        }
    });

    report(
        8,
        "methods agree; cuts never loosen and usually tighten the root bound",
        &|| {
            let (s, _) = end_to_end();
            let pass = s.cases == 20
                && s.failures == 0
                && s.max_error <= 1e-6
                && s.counter("proven") > 0
                && s.counter("falsified") > 0
                && s.counter("root_bound_violations") == 0
                && 2 * s.counter("strict_root_improvements") >= 20;
            Outcome {
                pass,
                detail: format!("max_obj_diff={:e} {}", s.max_error, fmt_counters(&s)),
            }
        },
    );

    report(9, "reruns with fixed seeds are bitwise identical", &|| {
        let (a, b) = (run_all(), run_all());
        let same_summaries = a.summaries.len() == b.summaries.len()
            && a.summaries
                .iter()
                .zip(&b.summaries)
                .all(|(x, y)| x.bitwise_eq(y));
        let same_records = a.records.len() == b.records.len()
            && a.records.iter().zip(&b.records).all(|(x, y)| {
                x.to_json_line() == y.to_json_line()
                    && x.bound.map(f64::to_bits) == y.bound.map(f64::to_bits)
                    && x.incumbent.map(f64::to_bits) == y.incumbent.map(f64::to_bits)
            });
        Outcome {
            pass: same_summaries && same_records,
            detail: format!(
                "summaries={} records={} identical_summaries={same_summaries} identical_records={same_records}",
                a.summaries.len(),
                a.records.len()
            ),
        }
    });

    if all_pass {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}

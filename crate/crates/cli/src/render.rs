//! Text, CSV and JSON-lines renderings. Output is a pure function of the
//! results, so equal inputs give byte-identical files.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;
use sqkd_core::mock::DemoRow;
use sqkd_core::protocol::{ClassTally, RunReport};
use sqkd_core::robustness::{RandomAttackCase, SweepRow, Verdict};

use crate::args::{Format, MockDemoArgs, ProtocolArgs, RunArgs, SweepArgs, VerifyArgs};

const PER_ROUND_NOTE: &str = "# per-round analysis: each round carries a fresh probe (collective attacks)";

fn protocol_fields(p: &ProtocolArgs) -> String {
    format!(
        "n={} delta={} p_ctrl={} p_test={} seed={} trials={} security_margin={}",
        p.n, p.delta, p.p_ctrl, p.p_test, p.seed, p.trials, p.security_margin
    )
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Text => "text",
        Format::Csv => "csv",
        Format::JsonLines => "json-lines",
    }
}

pub fn run_header(a: &RunArgs) -> String {
    format!(
        "# sqkd run: {} attack={} format={}",
        protocol_fields(&a.protocol),
        a.attack,
        format_name(a.output.format)
    )
}

pub fn mock_header(a: &MockDemoArgs) -> String {
    format!(
        "# sqkd mock-demo: {} attack=cnot-probe format={}",
        protocol_fields(&a.protocol),
        format_name(a.output.format)
    )
}

pub fn sweep_header(a: &SweepArgs) -> String {
    format!(
        "# sqkd sweep: attack={} points={} format={}",
        a.attack,
        a.points,
        format_name(a.output.format)
    )
}

pub fn verify_header(a: &VerifyArgs) -> String {
    let target = if a.random_attacks > 0 {
        format!("random_attacks={} seed={}", a.random_attacks, a.seed)
    } else {
        format!("attack={}", a.attack)
    };
    format!(
        "# sqkd verify: {target} tol_disturb={} tol_info={} format={}",
        a.tol_disturb,
        a.tol_info,
        format_name(a.output.format)
    )
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn opt_text(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "n/a".into())
}

fn tally_text(t: &ClassTally) -> String {
    format!("{} ({}/{})", opt_text(t.rate), t.mismatches, t.count)
}

fn csv_body<R: Serialize>(rows: impl IntoIterator<Item = R>) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    for row in rows {
        w.serialize(row).expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("UTF-8 CSV")
}

fn json_lines<R: Serialize>(rows: impl IntoIterator<Item = R>) -> String {
    rows.into_iter()
        .map(|r| serde_json::to_string(&r).expect("serializable record") + "\n")
        .collect()
}

#[derive(Serialize)]
struct RunCsvRow {
    trial: usize,
    seed: u64,
    num_rounds: usize,
    sift: usize,
    z_ctrl: usize,
    x_ctrl: usize,
    discard: usize,
    test_rate: String,
    z_ctrl_rate: String,
    x_ctrl_rate: String,
    aborted: bool,
    abort_reason: String,
    eve_accuracy: String,
    eve_sift_accuracy: String,
    final_key_len: usize,
    keys_match: bool,
}

pub fn run(header: &str, reports: &[RunReport], format: Format) -> String {
    match format {
        Format::Csv => csv_body(reports.iter().enumerate().map(|(trial, r)| RunCsvRow {
            trial,
            seed: r.config.seed,
            num_rounds: r.num_rounds,
            sift: r.counts.sift,
            z_ctrl: r.counts.z_ctrl,
            x_ctrl: r.counts.x_ctrl,
            discard: r.counts.discard,
            test_rate: opt(r.rates.test.rate),
            z_ctrl_rate: opt(r.rates.z_ctrl.rate),
            x_ctrl_rate: opt(r.rates.x_ctrl.rate),
            aborted: r.aborted,
            abort_reason: format!("{:?}", r.abort_reason),
            eve_accuracy: opt(r.eve_accuracy),
            eve_sift_accuracy: opt(r.eve_sift_accuracy),
            final_key_len: r.final_key_alice.as_ref().map_or(0, Vec::len),
            keys_match: r.keys_match(),
        })),
        Format::JsonLines => json_lines(
            reports
                .iter()
                .enumerate()
                .map(|(trial, r)| json!({ "trial": trial, "report": r })),
        ),
        Format::Text => {
            let mut s = format!("{header}\n");
            for (trial, r) in reports.iter().enumerate() {
                run_text(&mut s, trial, r);
            }
            let aborted = reports.iter().filter(|r| r.aborted).count();
            let _ = writeln!(s, "summary: {} trials, {aborted} aborted", reports.len());
            s
        }
    }
}

fn run_text(s: &mut String, trial: usize, r: &RunReport) {
    let c = &r.counts;
    let _ = writeln!(s, "trial {trial} (seed {}, {:?} protocol, attack {})", r.config.seed, r.protocol, r.attack);
    let _ = writeln!(s, "  rounds: {}", r.num_rounds);
    let _ = writeln!(
        s,
        "  classes: sift={} z_ctrl={} x_ctrl={} discard={}",
        c.sift, c.z_ctrl, c.x_ctrl, c.discard
    );
    let _ = writeln!(
        s,
        "  error rates: test={} z_ctrl={} x_ctrl={}",
        tally_text(&r.rates.test),
        tally_text(&r.rates.z_ctrl),
        tally_text(&r.rates.x_ctrl)
    );
    if r.aborted {
        let _ = writeln!(s, "  verdict: aborted ({:?})", r.abort_reason);
    } else {
        let _ = writeln!(s, "  verdict: completed");
    }
    let _ = writeln!(
        s,
        "  eve accuracy: info={} sift={}",
        opt_text(r.eve_accuracy),
        opt_text(r.eve_sift_accuracy)
    );
    if let Some(pp) = &r.postprocessing {
        let _ = writeln!(
            s,
            "  key: info={} leaked={} final={} residual_mismatches={} keys_match={}{}",
            r.info_indices.len(),
            pp.syndromes.leaked_bits(),
            pp.key_length.bits,
            pp.residual_mismatches,
            r.keys_match(),
            if pp.key_length.empty_key_warning { " (warning: empty key)" } else { "" }
        );
        let _ = writeln!(s, "  key length is a demonstration-grade heuristic, not a proven rate");
    }
}

#[derive(Serialize)]
struct MockCsvRow<'a> {
    trial: usize,
    seed: u64,
    protocol: &'a str,
    attack: &'a str,
    test_rate: String,
    z_ctrl_rate: String,
    x_ctrl_rate: String,
    eve_accuracy: String,
    aborted: bool,
    abort_reason: String,
}

fn protocol_name(row: &DemoRow) -> &'static str {
    match row.protocol {
        sqkd_core::protocol::ProtocolKind::Full => "full",
        sqkd_core::protocol::ProtocolKind::Mock => "mock",
    }
}

pub fn mock_demo(header: &str, trials: &[Vec<DemoRow>], format: Format) -> String {
    let rows = || {
        trials
            .iter()
            .enumerate()
            .flat_map(|(t, rows)| rows.iter().map(move |r| (t, r)))
    };
    match format {
        Format::Csv => csv_body(rows().map(|(trial, r)| MockCsvRow {
            trial,
            seed: r.report.config.seed,
            protocol: protocol_name(r),
            attack: &r.attack,
            test_rate: opt(r.test_rate),
            z_ctrl_rate: opt(r.z_ctrl_rate),
            x_ctrl_rate: opt(r.x_ctrl_rate),
            eve_accuracy: opt(r.eve_accuracy),
            aborted: r.aborted,
            abort_reason: format!("{:?}", r.report.abort_reason),
        })),
        Format::JsonLines => json_lines(rows().map(|(trial, r)| json!({ "trial": trial, "row": r }))),
        Format::Text => {
            let mut s = format!("{header}\n");
            let _ = writeln!(
                s,
                "{:>5} {:>6} {:<8} {:<14} {:>9} {:>9} {:>9} {:>12}  verdict",
                "trial", "seed", "protocol", "attack", "test", "z_ctrl", "x_ctrl", "eve_accuracy"
            );
            for (trial, r) in rows() {
                let verdict = if r.aborted {
                    format!("aborted ({:?})", r.report.abort_reason)
                } else {
                    "completed".to_string()
                };
                let _ = writeln!(
                    s,
                    "{:>5} {:>6} {:<8} {:<14} {:>9} {:>9} {:>9} {:>12}  {verdict}",
                    trial,
                    r.report.config.seed,
                    protocol_name(r),
                    r.attack,
                    opt_text(r.test_rate),
                    opt_text(r.z_ctrl_rate),
                    opt_text(r.x_ctrl_rate),
                    opt_text(r.eve_accuracy),
                );
            }
            s
        }
    }
}

pub fn sweep(header: &str, rows: &[SweepRow], format: Format) -> String {
    match format {
        Format::Csv => csv_body(rows),
        Format::JsonLines => json_lines(rows),
        Format::Text => {
            let mut s = format!("{header}\n{PER_ROUND_NOTE}\n");
            let _ = writeln!(s, "{:>12} {:>14} {:>14}", "theta", "disturbance", "info_advantage");
            for r in rows {
                let _ = writeln!(s, "{:>12.6} {:>14.10} {:>14.10}", r.theta, r.disturbance, r.info_advantage);
            }
            s
        }
    }
}

fn verdict_word(v: &Verdict) -> &'static str {
    if v.pass {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Serialize)]
struct VerifyCsvRow<'a> {
    index: usize,
    family: String,
    probe_qubits: usize,
    mid_policy: String,
    test: f64,
    z_ctrl: f64,
    x_ctrl: f64,
    helstrom_info: f64,
    max_f_state_distance: f64,
    verdict: &'a str,
}

pub fn verify_random(header: &str, cases: &[RandomAttackCase], verdicts: &[Verdict], format: Format) -> String {
    let passed = verdicts.iter().filter(|v| v.pass).count();
    let pairs = || cases.iter().zip(verdicts);
    match format {
        Format::Csv => csv_body(pairs().map(|(c, v)| VerifyCsvRow {
            index: c.index,
            family: format!("{:?}", c.family).to_lowercase(),
            probe_qubits: c.probe_qubits,
            mid_policy: format!("{:?}", c.mid_policy),
            test: v.analysis.detection.test,
            z_ctrl: v.analysis.detection.z_ctrl,
            x_ctrl: v.analysis.detection.x_ctrl,
            helstrom_info: v.analysis.helstrom_info,
            max_f_state_distance: v.analysis.max_f_state_distance,
            verdict: verdict_word(v),
        })),
        Format::JsonLines => json_lines(pairs().map(|(c, v)| json!({ "case": c, "verdict": v }))),
        Format::Text => {
            let mut s = format!("{header}\n{PER_ROUND_NOTE}\n");
            let silent = verdicts.iter().filter(|v| v.zero_disturbance).count();
            for (c, v) in pairs() {
                let d = &v.analysis.detection;
                let _ = writeln!(
                    s,
                    "attack {:>4} {:<10} probe={} mid={:<13} test={:.3e} z_ctrl={:.3e} x_ctrl={:.3e} info_advantage={:.3e} {}",
                    c.index,
                    format!("{:?}", c.family).to_lowercase(),
                    c.probe_qubits,
                    format!("{:?}", c.mid_policy),
                    d.test,
                    d.z_ctrl,
                    d.x_ctrl,
                    v.analysis.info_advantage(),
                    verdict_word(v)
                );
            }
            let _ = writeln!(s, "undetectable attacks: {silent}");
            let overall = if passed == verdicts.len() { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "verdict: {overall} ({passed}/{} attacks)", verdicts.len());
            s
        }
    }
}

pub fn verify_single(header: &str, v: &Verdict, format: Format) -> String {
    let a = &v.analysis;
    match format {
        Format::Csv => csv_body([VerifyCsvRow {
            index: 0,
            family: a.attack.clone(),
            probe_qubits: a.probe_qubits,
            mid_policy: String::new(),
            test: a.detection.test,
            z_ctrl: a.detection.z_ctrl,
            x_ctrl: a.detection.x_ctrl,
            helstrom_info: a.helstrom_info,
            max_f_state_distance: a.max_f_state_distance,
            verdict: verdict_word(v),
        }]),
        Format::JsonLines => json_lines([v]),
        Format::Text => {
            let mut s = format!("{header}\n{PER_ROUND_NOTE}\n");
            let _ = writeln!(s, "attack: {} (probe qubits {})", a.attack, a.probe_qubits);
            let _ = writeln!(
                s,
                "forward structure: {}  backward structure: {}  max cross term: {:.3e}",
                a.forward_structured, a.backward_structured, a.max_offdiagonal
            );
            let _ = writeln!(
                s,
                "detection: test={} z_ctrl={} x_ctrl={}",
                a.detection.test, a.detection.z_ctrl, a.detection.x_ctrl
            );
            let _ = writeln!(
                s,
                "eve: helstrom={} trace_distance={} f_state_distance={}",
                a.helstrom_info, a.trace_distance, a.max_f_state_distance
            );
            let _ = writeln!(
                s,
                "zero disturbance: {}  informative: {}",
                v.zero_disturbance, v.informative
            );
            let _ = writeln!(s, "verdict: {}", verdict_word(v));
            s
        }
    }
}

//! The mock protocol, where Bob keeps every qubit he measures, and the
//! CNOT-probe attack that breaks it.
//!
//! The pipeline, thresholds and round count are those of the full protocol.
//! Only the round differs: a SIFT qubit never returns, so Alice has no return
//! measurement for it and Eve's backward pass only runs on CTRL rounds.

use serde::Serialize;

use crate::adversary::{build_attack, AttackModel, AttackSpec};
use crate::protocol::{execute, run_protocol, ProtocolConfig, ProtocolError, ProtocolKind, RunReport};
use crate::round::Variant;

pub fn run_mock_protocol(config: &ProtocolConfig, attack: &AttackModel) -> Result<RunReport, ProtocolError> {
    execute(config, attack, Variant::Mock)
}

/// One line of the side-by-side comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoRow {
    pub protocol: ProtocolKind,
    pub attack: String,
    pub test_rate: Option<f64>,
    pub z_ctrl_rate: Option<f64>,
    pub x_ctrl_rate: Option<f64>,
    /// Accuracy on INFO bits when the run finished, otherwise on all SIFT bits.
    pub eve_accuracy: Option<f64>,
    pub aborted: bool,
    pub report: RunReport,
}

impl DemoRow {
    fn from_report(report: RunReport) -> Self {
        DemoRow {
            protocol: report.protocol,
            attack: report.attack.clone(),
            test_rate: report.rates.test.rate,
            z_ctrl_rate: report.rates.z_ctrl.rate,
            x_ctrl_rate: report.rates.x_ctrl.rate,
            eve_accuracy: report.eve_accuracy.or(report.eve_sift_accuracy),
            aborted: report.aborted,
            report,
        }
    }
}

/// Runs the same CNOT probe against the mock protocol and, with and without
/// a mid-round probe measurement, against the full protocol.
///
/// Expected picture: the mock row shows no disturbance and perfect accuracy;
/// the full protocol forces Eve to choose between an X-CTRL error rate near
/// one half (measure) and coin-flip accuracy (do not measure).
pub fn nonrobustness_demo(config: &ProtocolConfig) -> Result<Vec<DemoRow>, ProtocolError> {
    let cnot = |measure_mid| {
        build_attack(&AttackSpec::CnotProbe { measure_mid }).expect("built-in attack")
    };
    Ok(vec![
        DemoRow::from_report(run_mock_protocol(config, &cnot(false))?),
        DemoRow::from_report(run_protocol(config, &cnot(true))?),
        DemoRow::from_report(run_protocol(config, &cnot(false))?),
    ])
}
